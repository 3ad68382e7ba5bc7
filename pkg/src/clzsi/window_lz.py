"""Variable-length sliding-window codec with shared side information.

The first `window` symbols go out raw.  From then on the encoder finds
the longest joint match whose source starts inside the trailing window,
sends its length with an Elias delta code, and then either the raw
phrase or the rank of the chosen match among the window's side-sequence
matches of that length.  The decoder recounts those side matches from
the side information alone, evaluates the same branch rule, and copies.

Every phrase advances the cursor by its length, so the phrase intervals
tile the region after the initial window with no gaps or overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitio import Bitstream, block_width, ceil_log2, read_block, write_block
from .errors import CorruptStreamError
from .matching import SymbolSequence, WindowMatcher, fuse
from .prefix_codes import elias_delta_decode, elias_delta_encode

__all__ = [
    "WindowConfig",
    "WindowPhraseTrace",
    "encode_window",
    "decode_window",
]

BRANCH_RAW = "raw"
BRANCH_POSITION = "position"


@dataclass(frozen=True)
class WindowConfig:
    """Window size and total symbol count for one stream."""

    window: int
    total_symbols: int
    alphabet_size: int = 2
    side_alphabet_size: int = 2

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be positive")
        if self.total_symbols <= self.window:
            raise ValueError("total_symbols must exceed the window size")
        if self.alphabet_size < 2 or self.side_alphabet_size < 2:
            raise ValueError("alphabet sizes must be at least 2")


@dataclass(frozen=True)
class WindowPhraseTrace:
    """Per-phrase record: cursor, match length, side-match count, branch."""

    start: int
    length: int
    side_count: int
    branch: str
    bits: int


def _raw_branch(length: int, side_count: int, alphabet_size: int) -> bool:
    """Raw whenever a position costs at least as much as the phrase itself,
    and always for single-symbol phrases."""
    if length == 1:
        return True
    return ceil_log2(side_count) >= block_width(alphabet_size, length)


def encode_window(
    x: SymbolSequence, y: SymbolSequence, cfg: WindowConfig
) -> tuple[Bitstream, list[WindowPhraseTrace]]:
    """Encode x against side information y; returns the stream and trace."""
    if len(x) != cfg.total_symbols or len(y) != cfg.total_symbols:
        raise ValueError(f"sequences must hold exactly {cfg.total_symbols} symbols")
    if x.alphabet_size != cfg.alphabet_size or y.alphabet_size != cfg.side_alphabet_size:
        raise ValueError("sequence alphabets do not match the configuration")
    xs, ys = x.symbols, y.symbols
    z = fuse(x, y)
    matcher = WindowMatcher(ys, y.alphabet_size, cfg.window, z.symbols, z.alphabet_size)
    stream = Bitstream()
    traces: list[WindowPhraseTrace] = []

    write_block(stream, xs[: cfg.window], cfg.alphabet_size)
    pos = cfg.window
    while pos < cfg.total_symbols:
        before = stream.bits_written
        length, joint = matcher.longest_joint(pos)
        if length == 0:
            length = 1
        elias_delta_encode(stream, length)
        if length == 1:
            side_count = matcher.side_count(pos, 1)
            write_block(stream, xs[pos : pos + 1], cfg.alphabet_size)
            branch = BRANCH_RAW
        else:
            side = matcher.side_matches(pos, length)
            side_count = int(side.size)
            if _raw_branch(length, side_count, cfg.alphabet_size):
                write_block(stream, xs[pos : pos + length], cfg.alphabet_size)
                branch = BRANCH_RAW
            else:
                rank = int(np.searchsorted(side, joint[0]))
                stream.write_bits(rank, ceil_log2(side_count))
                branch = BRANCH_POSITION
        traces.append(
            WindowPhraseTrace(pos, length, side_count, branch, stream.bits_written - before)
        )
        pos += length
    return stream, traces


def decode_window(
    code: Bitstream, y: SymbolSequence, cfg: WindowConfig
) -> SymbolSequence:
    """Invert encode_window given the same side information and config."""
    if len(y) != cfg.total_symbols:
        raise ValueError("side information length does not match the configuration")
    if y.alphabet_size != cfg.side_alphabet_size:
        raise ValueError("side alphabet does not match the configuration")
    ys = y.symbols
    matcher = WindowMatcher(ys, y.alphabet_size, cfg.window)
    out = np.zeros(cfg.total_symbols, dtype=np.int64)
    out[: cfg.window] = read_block(code, cfg.alphabet_size, cfg.window)

    pos = cfg.window
    while pos < cfg.total_symbols:
        length = elias_delta_decode(code)
        if length > cfg.total_symbols - pos:
            raise CorruptStreamError(
                f"phrase length {length} overruns the remaining {cfg.total_symbols - pos} symbols"
            )
        if length == 1:
            out[pos] = read_block(code, cfg.alphabet_size, 1)[0]
            pos += 1
            continue
        side = matcher.side_matches(pos, length)
        side_count = int(side.size)
        if side_count == 0:
            # a joint match of this length implies at least one side match
            raise CorruptStreamError(f"length {length} with no side match in window")
        if _raw_branch(length, side_count, cfg.alphabet_size):
            out[pos : pos + length] = read_block(code, cfg.alphabet_size, length)
        else:
            rank = code.read_bits(ceil_log2(side_count))
            if rank >= side_count:
                raise CorruptStreamError(
                    f"match rank {rank} with only {side_count} side matches"
                )
            offset = int(side[rank])
            if offset >= length:
                out[pos : pos + length] = out[pos - offset : pos - offset + length]
            else:
                for i in range(length):
                    out[pos + i] = out[pos - offset + i]
        pos += length
    return SymbolSequence(cfg.alphabet_size, out)
