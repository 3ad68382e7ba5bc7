"""Recurrence and match searches shared by the codecs and the harness.

Conventions used throughout:

* Sequences are 0-indexed numpy arrays wrapped in SymbolSequence.
* A match offset t >= 1 compares the block starting at position `start`
  with the block starting at `start - t`.  Offsets smaller than the
  block length are legal; the two blocks then overlap, and equality of
  the fully written sequences is exactly the condition under which a
  left-to-right copy reproduces the current block.
* Match offsets are always enumerated in increasing t.  Both codec ends
  can recompute that order from the side information alone, which is
  what makes rank-based positions decodable.

Searches are read-only over immutable sequences, so concurrent queries
against one index are safe; building an index is a single-writer phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymbolSequence",
    "fuse",
    "RecurrenceResult",
    "WindowMatch",
    "BlockIndex",
    "RecurrenceSearcher",
    "fixed_recurrence",
    "window_longest_match",
    "window_side_matches",
    "recurrence_time",
    "matches_until_recurrence",
]

# block ranks are kept as exact int64 keys whenever alphabet**block_len
# stays below this; larger blocks fall back to byte-string keys
_PACK_LIMIT = 1 << 62


def _dtype_for(alphabet_size: int) -> np.dtype:
    if alphabet_size <= 256:
        return np.dtype(np.uint8)
    if alphabet_size <= 65536:
        return np.dtype(np.uint16)
    return np.dtype(np.int64)


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A finite-alphabet sequence: the object every codec consumes."""

    alphabet_size: int
    symbols: np.ndarray

    def __post_init__(self) -> None:
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be at least 2")
        arr = np.asarray(self.symbols)
        if arr.ndim != 1:
            raise ValueError("symbols must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet_size):
            raise ValueError("symbol out of range for alphabet")
        arr = arr.astype(_dtype_for(self.alphabet_size), copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)

    @classmethod
    def of(cls, values, alphabet_size: int) -> "SymbolSequence":
        return cls(alphabet_size, np.asarray(list(values), dtype=np.int64))

    def __len__(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet_size == other.alphabet_size and np.array_equal(
            self.symbols, other.symbols
        )

    def __repr__(self) -> str:  # pragma: no cover
        head = ",".join(str(int(s)) for s in self.symbols[:12])
        tail = ",..." if len(self) > 12 else ""
        return f"SymbolSequence(|A|={self.alphabet_size}, [{head}{tail}], len={len(self)})"


def fuse(x: SymbolSequence, y: SymbolSequence) -> SymbolSequence:
    """Zip two aligned sequences into one over the product alphabet.

    Blocks of the fused sequence match exactly when both component
    blocks match, which turns joint-match searches into plain searches.
    """
    if len(x) != len(y):
        raise ValueError("sequences must have equal length")
    values = x.symbols.astype(np.int64) * y.alphabet_size + y.symbols
    return SymbolSequence(x.alphabet_size * y.alphabet_size, values)


@dataclass(frozen=True)
class RecurrenceResult:
    """Outcome of a fixed-block recurrence search at one phrase start.

    joint_offset: smallest t whose shifted block matches on both
        sequences simultaneously, 0 when none exists.
    joint_rank: number of side-sequence matches at offsets up to and
        including joint_offset, 0 when there is no joint match.  When
        positive, the joint_rank-th smallest side-match offset equals
        joint_offset.
    side_total: number of side-sequence match offsets over the whole
        available past.
    x_offset: smallest t whose shifted block matches on the primary
        sequence alone, 0 when none (computed only on request).
    """

    joint_offset: int
    joint_rank: int
    side_total: int
    x_offset: int = 0


@dataclass(frozen=True)
class WindowMatch:
    """Longest in-window joint match at one parsing position.

    length: longest joint match length, clamped up to 1 when no match
        of even a single symbol exists.
    side_count: number of window offsets whose side blocks of `length`
        symbols match the current one.
    pick_rank: 0-based rank of the chosen joint-match offset among those
        side-match offsets in increasing-offset order, or None when the
        length was clamped (no joint match to point at).
    """

    length: int
    side_count: int
    pick_rank: int | None


class BlockIndex:
    """Positions of equal fixed-length blocks, bucketed for fast lookup.

    Keys are the exact block contents (packed into an int64 when the
    block fits, raw bytes otherwise), so two positions share a bucket
    exactly when their blocks are equal; no verification pass is needed.
    """

    def __init__(self, symbols: np.ndarray, alphabet_size: int, block_len: int):
        if block_len < 1:
            raise ValueError("block_len must be positive")
        self._symbols = symbols
        self._block_len = block_len
        count = symbols.size - block_len + 1
        self._packed: np.ndarray | None = None
        self._buckets: dict = {}
        if count <= 0:
            return
        if alphabet_size**block_len <= _PACK_LIMIT:
            windows = np.lib.stride_tricks.sliding_window_view(symbols, block_len)
            powers = alphabet_size ** np.arange(block_len - 1, -1, -1, dtype=np.int64)
            self._packed = windows.astype(np.int64) @ powers
            order = np.argsort(self._packed, kind="stable")
            keys = self._packed[order]
            starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
            bounds = np.r_[starts, keys.size]
            for a, b in zip(bounds[:-1], bounds[1:]):
                self._buckets[int(keys[a])] = order[a:b]
        else:
            grouped: dict[bytes, list[int]] = {}
            for j in range(count):
                grouped.setdefault(symbols[j : j + block_len].tobytes(), []).append(j)
            self._buckets = {
                key: np.asarray(pos, dtype=np.int64) for key, pos in grouped.items()
            }

    def _bucket(self, start: int) -> np.ndarray:
        if self._packed is not None:
            key = int(self._packed[start])
        else:
            key = self._symbols[start : start + self._block_len].tobytes()
        return self._buckets.get(key, _EMPTY_POSITIONS)

    def match_positions(self, start: int, before: int) -> np.ndarray:
        """Ascending positions j < before whose block equals the one at start."""
        bucket = self._bucket(start)
        return bucket[: np.searchsorted(bucket, before)]

    def match_positions_in(self, start: int, lo: int, hi: int) -> np.ndarray:
        """Ascending matching positions j with lo <= j < hi."""
        bucket = self._bucket(start)
        return bucket[np.searchsorted(bucket, lo) : np.searchsorted(bucket, hi)]

    def match_count(self, start: int, before: int) -> int:
        """Number of positions j < before whose block equals the one at start."""
        return int(np.searchsorted(self._bucket(start), before))

    def last_match(self, start: int, before: int) -> int:
        """Largest matching position j < before, or -1 when none exists."""
        bucket = self._bucket(start)
        i = int(np.searchsorted(bucket, before))
        return int(bucket[i - 1]) if i else -1

    def nth_recent_match(self, start: int, n: int, before: int) -> int:
        """The n-th matching position counting back from before, or -1."""
        bucket = self._bucket(start)
        i = int(np.searchsorted(bucket, before)) - n
        return int(bucket[i]) if 0 <= i < bucket.size else -1


_EMPTY_POSITIONS = np.empty(0, dtype=np.int64)


class RecurrenceSearcher:
    """Per-phrase recurrence queries over one (x, y) pair and block length."""

    def __init__(
        self,
        x: SymbolSequence,
        y: SymbolSequence,
        block_len: int,
        with_x: bool = False,
    ) -> None:
        if len(x) != len(y):
            raise ValueError("sequences must have equal length")
        self.block_len = block_len
        self._side = BlockIndex(y.symbols, y.alphabet_size, block_len)
        joint = fuse(x, y)
        self._joint = BlockIndex(joint.symbols, joint.alphabet_size, block_len)
        self._x = BlockIndex(x.symbols, x.alphabet_size, block_len) if with_x else None

    def at(self, start: int) -> RecurrenceResult:
        """Search the past of the block starting at 0-based index start."""
        side_total = self._side.match_count(start, start)
        j = self._joint.last_match(start, start)
        if j < 0:
            joint_offset = 0
            joint_rank = 0
        else:
            joint_offset = start - j
            joint_rank = side_total - self._side.match_count(start, j)
        x_offset = 0
        if self._x is not None:
            jx = self._x.last_match(start, start)
            x_offset = start - jx if jx >= 0 else 0
        return RecurrenceResult(joint_offset, joint_rank, side_total, x_offset)


def fixed_recurrence(
    x: SymbolSequence, y: SymbolSequence, start: int, block_len: int
) -> RecurrenceResult:
    """One-shot recurrence search for the block at 0-based index start.

    The block spans [start, start + block_len); every offset
    t in [1, start] is examined, including overlapping ones.
    """
    if start + block_len > len(x):
        raise ValueError("block extends past the end of the sequence")
    return RecurrenceSearcher(x, y, block_len, with_x=True).at(start)


def window_side_matches(
    y: SymbolSequence | np.ndarray, pos: int, length: int, window: int
) -> np.ndarray:
    """Ascending offsets t in [1, window] whose side block of `length`
    symbols starting at pos - t equals the one starting at pos.

    Computable from the side information alone, hence available to the
    decoder before the current block is known.  This is the plain
    reference implementation; WindowMatcher answers the same query from
    gram buckets and is what the codecs use.
    """
    arr = y.symbols if isinstance(y, SymbolSequence) else y
    offsets = np.arange(1, window + 1, dtype=np.int64)
    for n in range(length):
        offsets = offsets[arr[pos + n - offsets] == arr[pos + n]]
        if offsets.size == 0:
            break
    return offsets


def _extend_offsets(
    arr: np.ndarray, pos: int, offsets: np.ndarray, start: int, limit: int
) -> tuple[int, np.ndarray]:
    """Grow equal-prefix offsets from a verified length toward a limit.

    offsets already match arr for `start` symbols; returns the longest
    n <= limit some offset reaches together with the survivors at n.
    """
    n = start
    while n < limit:
        survivors = offsets[arr[pos + n - offsets] == arr[pos + n]]
        if survivors.size == 0:
            break
        offsets = survivors
        n += 1
    return n, offsets


class WindowMatcher:
    """Sliding-window match queries backed by short-gram position buckets.

    Candidate offsets come from equal-gram buckets (8 symbols, falling
    back to 2) and are then extended one symbol at a time, so results are
    exact; single-symbol counts come from per-value prefix sums.  The
    outputs are identical to the plain scans, only faster on windows
    large enough for the bucket lookups to pay off.
    """

    PROBE = 8
    SHORT = 2

    def __init__(
        self,
        y: np.ndarray,
        y_alphabet: int,
        window: int,
        z: np.ndarray | None = None,
        z_alphabet: int | None = None,
    ) -> None:
        self._y = y
        self._z = z
        self._window = window
        self._y_probe = self._gram_index(y, y_alphabet, self.PROBE)
        self._y_short = self._gram_index(y, y_alphabet, self.SHORT)
        self._y_counts = self._prefix_counts(y, y_alphabet)
        if z is not None:
            self._z_probe = self._gram_index(z, z_alphabet, self.PROBE)
            self._z_short = self._gram_index(z, z_alphabet, self.SHORT)
            self._z_counts = self._prefix_counts(z, z_alphabet)

    @staticmethod
    def _gram_index(arr: np.ndarray, alphabet: int, gram: int) -> BlockIndex | None:
        if arr.size < gram or alphabet**gram > _PACK_LIMIT:
            return None
        return BlockIndex(arr, alphabet, gram)

    @staticmethod
    def _prefix_counts(arr: np.ndarray, alphabet: int) -> np.ndarray | None:
        if alphabet > 16:
            return None
        counts = np.zeros((alphabet, arr.size + 1), dtype=np.int64)
        for v in range(alphabet):
            np.cumsum(arr == v, out=counts[v, 1:])
        return counts

    def _bucket_offsets(self, index: BlockIndex, pos: int) -> np.ndarray:
        positions = index.match_positions_in(pos, pos - self._window, pos)
        return (pos - positions)[::-1]

    def _single_count(self, arr: np.ndarray, counts: np.ndarray | None, pos: int) -> int:
        if counts is not None:
            v = int(arr[pos])
            return int(counts[v, pos] - counts[v, pos - self._window])
        lo = pos - self._window
        return int((arr[lo:pos] == arr[pos]).sum())

    def _single_offsets(self, arr: np.ndarray, pos: int) -> np.ndarray:
        lo = pos - self._window
        rel = np.flatnonzero(arr[lo:pos] == arr[pos])
        return ((pos - lo) - rel)[::-1]

    def longest_joint(self, pos: int) -> tuple[int, np.ndarray | None]:
        """Longest joint-match length at pos and the offsets reaching it.

        Offsets are reported (ascending) only for lengths >= 2, which is
        all the codec can ever point at; for shorter results they are
        None and the caller may enumerate them directly if it cares.
        """
        z = self._z
        horizon = z.size - pos
        limit = horizon
        if self._z_probe is not None and horizon >= self.PROBE:
            cand = self._bucket_offsets(self._z_probe, pos)
            if cand.size:
                return _extend_offsets(z, pos, cand, self.PROBE, horizon)
            limit = self.PROBE - 1  # an 8-gram hit would have been found
        if horizon >= self.SHORT:
            if self._z_short is not None:
                cand = self._bucket_offsets(self._z_short, pos)
                start = self.SHORT
            else:
                cand = self._single_offsets(z, pos)
                start = 1
            if cand.size:
                length, offs = _extend_offsets(z, pos, cand, start, limit)
                return length, (offs if length >= 2 else None)
        if self._single_count(z, self._z_counts, pos):
            return 1, None
        return 0, None

    def side_matches(self, pos: int, length: int) -> np.ndarray:
        """Ascending side-match offsets of exactly `length` symbols."""
        y = self._y
        if length == 1:
            return self._single_offsets(y, pos)
        if self._y_probe is not None and length >= self.PROBE:
            cand = self._bucket_offsets(self._y_probe, pos)
            start = self.PROBE
        elif self._y_short is not None:
            cand = self._bucket_offsets(self._y_short, pos)
            start = self.SHORT
        else:
            cand = self._single_offsets(y, pos)
            start = 1
        for n in range(start, length):
            if cand.size == 0:
                break
            cand = cand[y[pos + n - cand] == y[pos + n]]
        return cand

    def side_count(self, pos: int, length: int) -> int:
        """Number of side matches of exactly `length` symbols."""
        if length == 1:
            return self._single_count(self._y, self._y_counts, pos)
        return int(self.side_matches(pos, length).size)


def window_longest_match(
    x: SymbolSequence, y: SymbolSequence, pos: int, window: int
) -> WindowMatch:
    """Longest joint match within the trailing window at 0-based pos.

    Match sources may run past pos - 1 (overlap with the region being
    produced); copies then resolve left to right.  Requires pos >= window
    so that the whole window lies inside the sequences.
    """
    if len(x) != len(y):
        raise ValueError("sequences must have equal length")
    if pos < window:
        raise ValueError("position must leave a full window of history")
    if pos >= len(x):
        raise ValueError("position past the end of the sequence")
    z = fuse(x, y)
    matcher = WindowMatcher(
        y.symbols, y.alphabet_size, window, z.symbols, z.alphabet_size
    )
    length, joint = matcher.longest_joint(pos)
    if length == 0:
        return WindowMatch(1, matcher.side_count(pos, 1), None)
    side = matcher.side_matches(pos, length)
    if joint is None:
        joint = matcher._single_offsets(z.symbols, pos)
    rank = int(np.searchsorted(side, joint[0]))
    return WindowMatch(length, int(side.size), rank)


def _as_array(seq) -> np.ndarray:
    if isinstance(seq, SymbolSequence):
        return seq.symbols
    if isinstance(seq, tuple):
        return fuse(*seq).symbols
    return np.asarray(seq)


def recurrence_time(seq, block_len: int, j: int = 1) -> int | None:
    """The j-th smallest offset at which the final block recurs.

    The block is the last block_len symbols of the supplied realization;
    everything before it is the available past.  Accepts a single
    sequence or an (x, y) pair, which is matched jointly.  Returns None
    when fewer than j recurrences exist in the supplied past, so the
    caller can widen its simulation instead of trusting a made-up value.
    """
    if j < 1:
        raise ValueError("recurrence rank must be at least 1")
    arr = _as_array(seq)
    start = arr.size - block_len
    if start < 0:
        raise ValueError("sequence shorter than one block")
    block = arr[start:]
    windows = np.lib.stride_tricks.sliding_window_view(arr, block_len)
    hits = np.flatnonzero((windows[:start] == block).all(axis=1))
    if hits.size < j:
        return None
    return int(start - hits[-j])


def matches_until_recurrence(
    x: SymbolSequence, y: SymbolSequence, block_len: int
) -> int | None:
    """Side matches seen up to and including the first joint recurrence.

    Uses the same final-block convention as recurrence_time.  Returns
    None when the supplied past holds no joint recurrence at all.
    """
    joint = recurrence_time((x, y), block_len)
    if joint is None:
        return None
    arr = y.symbols
    start = arr.size - block_len
    block = arr[start:]
    windows = np.lib.stride_tricks.sliding_window_view(arr, block_len)
    lo = start - joint
    return int((windows[lo:start] == block).all(axis=1).sum())
