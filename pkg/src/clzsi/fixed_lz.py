"""Fixed-block-parsing codecs with shared side information.

Three variants parse the input into blocks of a fixed length and, for
each block after the first, describe where the pair (input block, side
block) last occurred simultaneously:

* variant 1 sends the rank of that joint match among the side-sequence
  matches with a capped prefix code, escaping to a raw block when the
  rank is 0 (no match) or too large for the code.
* variant 2 prefixes a flag bit: flag 0 carries the rank (the top code
  value is a literal rank there, not an escape), flag 1 falls back to an
  input-only match offset under a second, smaller code parameter, and
  escapes to a raw block when even that fails.
* variant 3 adapts the code parameter per block to the total number of
  side matches seen so far, which both ends can count, and never emits
  a longer codeword than variant 1 for the same input.

The decoder reconstructs every rank walk from the side sequence alone;
ties and enumeration order follow the matching module, so encoder and
decoder stay bit-exact.  Jobs are deterministic and sequential per
stream; independent jobs can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitio import Bitstream, block_width, ceil_log2, floor_log2, read_block, write_block
from .errors import CorruptStreamError
from .matching import BlockIndex, RecurrenceSearcher, SymbolSequence
from .prefix_codes import capped_decode, capped_encode, prefix_width

__all__ = [
    "FixedParseConfig",
    "PhraseTrace",
    "encode_fixed",
    "decode_fixed",
    "expected_bits",
    "phrase_lengths",
]

CASE_RAW_FIRST = "raw_first"
CASE_XY_MATCH = "xy_match"
CASE_ESCAPE_RAW = "escape_raw"
CASE_FLAG0_MATCH = "flag0_match"
CASE_FLAG1_X_MATCH = "flag1_x_match"
CASE_FLAG1_ESCAPE = "flag1_escape"
CASE_ADAPTIVE_MATCH = "adaptive_match"
CASE_ADAPTIVE_ESCAPE = "adaptive_escape"


@dataclass(frozen=True)
class FixedParseConfig:
    """Parse geometry and code parameters for the fixed-block codecs.

    block_len and num_blocks fix the parse; variant selects the codec;
    x_offset_bits is the fallback-offset code parameter used only by
    variant 2 (offsets up to 2**x_offset_bits - 1 are addressable).
    """

    block_len: int
    num_blocks: int
    variant: int
    alphabet_size: int = 2
    side_alphabet_size: int = 2
    x_offset_bits: int | None = None

    def __post_init__(self) -> None:
        if self.block_len < 1:
            raise ValueError("block_len must be positive")
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be positive")
        if self.variant not in (1, 2, 3):
            raise ValueError("variant must be 1, 2, or 3")
        if self.alphabet_size < 2 or self.side_alphabet_size < 2:
            raise ValueError("alphabet sizes must be at least 2")
        if self.variant == 2:
            if self.x_offset_bits is None or self.x_offset_bits < 1:
                raise ValueError("variant 2 needs x_offset_bits >= 1")
        elif self.x_offset_bits is not None:
            raise ValueError("x_offset_bits applies to variant 2 only")

    @property
    def raw_block_bits(self) -> int:
        """Bits of one uncompressed block: ceil(block_len * log2(alphabet))."""
        return block_width(self.alphabet_size, self.block_len)

    @property
    def total_symbols(self) -> int:
        return self.block_len * self.num_blocks


@dataclass(frozen=True)
class PhraseTrace:
    """Per-block encoding record; the audit surface for codeword lengths.

    joint_rank, side_total, and x_offset mirror RecurrenceResult;
    adaptive_bits is variant 3's per-block code parameter.  Fields that a
    case never consults are None.  bits is the exact number of payload
    bits this block emitted.
    """

    index: int
    case: str
    bits: int
    joint_rank: int | None = None
    side_total: int | None = None
    x_offset: int | None = None
    adaptive_bits: int | None = None


def _validate_pair(x: SymbolSequence, y: SymbolSequence, cfg: FixedParseConfig) -> None:
    if len(x) != cfg.total_symbols or len(y) != cfg.total_symbols:
        raise ValueError(
            f"need exactly {cfg.num_blocks} blocks of {cfg.block_len} symbols, "
            f"got lengths {len(x)} and {len(y)}"
        )
    if x.alphabet_size != cfg.alphabet_size or y.alphabet_size != cfg.side_alphabet_size:
        raise ValueError("sequence alphabets do not match the configuration")


def encode_fixed(
    x: SymbolSequence, y: SymbolSequence, cfg: FixedParseConfig
) -> tuple[Bitstream, list[PhraseTrace]]:
    """Encode x against side information y; returns the stream and trace."""
    _validate_pair(x, y, cfg)
    L = cfg.block_len
    k = cfg.raw_block_bits
    stream = Bitstream()
    traces: list[PhraseTrace] = []

    write_block(stream, x.symbols[:L], cfg.alphabet_size)
    traces.append(PhraseTrace(1, CASE_RAW_FIRST, k))

    searcher = RecurrenceSearcher(x, y, L, with_x=cfg.variant == 2)
    for i in range(2, cfg.num_blocks + 1):
        start = (i - 1) * L
        rec = searcher.at(start)
        before = stream.bits_written
        if cfg.variant == 1:
            case, adaptive = _emit_plain(stream, x, cfg, start, rec.joint_rank, k)
        elif cfg.variant == 2:
            case, adaptive = _emit_flagged(stream, x, cfg, start, rec)
        else:
            case, adaptive = _emit_adaptive(stream, x, cfg, start, rec)
        traces.append(
            PhraseTrace(
                index=i,
                case=case,
                bits=stream.bits_written - before,
                joint_rank=rec.joint_rank,
                side_total=rec.side_total,
                x_offset=rec.x_offset if cfg.variant == 2 else None,
                adaptive_bits=adaptive,
            )
        )
    return stream, traces


def _emit_plain(stream, x, cfg, start, rank, param) -> tuple[str, int | None]:
    """Variant 1 body, reused by variant 3 once the adaptive phase ends."""
    L = cfg.block_len
    if 1 <= rank <= (1 << param) - 1:
        capped_encode(stream, param, rank)
        return CASE_XY_MATCH, None
    capped_encode(stream, param, 1 << param)
    write_block(stream, x.symbols[start : start + L], cfg.alphabet_size)
    return CASE_ESCAPE_RAW, None


def _emit_flagged(stream, x, cfg, start, rec) -> tuple[str, int | None]:
    L = cfg.block_len
    k = cfg.raw_block_bits
    m = cfg.x_offset_bits
    if 1 <= rec.joint_rank <= (1 << k):
        stream.write_bits(0, 1)
        capped_encode(stream, k, rec.joint_rank)
        return CASE_FLAG0_MATCH, None
    stream.write_bits(1, 1)
    if 1 <= rec.x_offset <= (1 << m) - 1:
        capped_encode(stream, m, rec.x_offset)
        return CASE_FLAG1_X_MATCH, None
    capped_encode(stream, m, 1 << m)
    write_block(stream, x.symbols[start : start + L], cfg.alphabet_size)
    return CASE_FLAG1_ESCAPE, None


def _emit_adaptive(stream, x, cfg, start, rec) -> tuple[str, int | None]:
    L = cfg.block_len
    k = cfg.raw_block_bits
    if rec.side_total >= (1 << k) - 1:
        return _emit_plain(stream, x, cfg, start, rec.joint_rank, k)
    adaptive = ceil_log2(rec.side_total + 1)
    if 1 <= rec.joint_rank <= (1 << adaptive) - 1:
        capped_encode(stream, adaptive, rec.joint_rank)
        return CASE_ADAPTIVE_MATCH, adaptive
    capped_encode(stream, adaptive, 1 << adaptive)
    write_block(stream, x.symbols[start : start + L], cfg.alphabet_size)
    return CASE_ADAPTIVE_ESCAPE, adaptive


def _copy_block(out: np.ndarray, start: int, offset: int, length: int) -> None:
    """Copy length symbols from start - offset, resolving overlap left to right."""
    if offset >= length:
        out[start : start + length] = out[start - offset : start - offset + length]
    else:
        for i in range(length):
            out[start + i] = out[start - offset + i]


def decode_fixed(
    code: Bitstream, y: SymbolSequence, cfg: FixedParseConfig
) -> SymbolSequence:
    """Invert encode_fixed given the same side information and config."""
    if len(y) != cfg.total_symbols:
        raise ValueError("side information length does not match the configuration")
    if y.alphabet_size != cfg.side_alphabet_size:
        raise ValueError("side alphabet does not match the configuration")
    L = cfg.block_len
    k = cfg.raw_block_bits
    side = BlockIndex(y.symbols, y.alphabet_size, L)
    out = np.zeros(cfg.total_symbols, dtype=np.int64)
    out[:L] = read_block(code, cfg.alphabet_size, L)

    for i in range(2, cfg.num_blocks + 1):
        start = (i - 1) * L
        if cfg.variant == 1:
            value = capped_decode(code, k)
            if value == 1 << k:
                out[start : start + L] = read_block(code, cfg.alphabet_size, L)
            else:
                _copy_ranked(out, side, start, value, L)
        elif cfg.variant == 2:
            if code.read_bits(1) == 0:
                _copy_ranked(out, side, start, capped_decode(code, k), L)
            else:
                m = cfg.x_offset_bits
                value = capped_decode(code, m)
                if value == 1 << m:
                    out[start : start + L] = read_block(code, cfg.alphabet_size, L)
                else:
                    _copy_block(out, start, value, L)
        else:
            total = side.match_count(start, start)
            param = ceil_log2(total + 1) if total < (1 << k) - 1 else k
            value = capped_decode(code, param)
            if value == 1 << param:
                out[start : start + L] = read_block(code, cfg.alphabet_size, L)
            else:
                _copy_ranked(out, side, start, value, L)
    return SymbolSequence(cfg.alphabet_size, out)


def _copy_ranked(out: np.ndarray, side: BlockIndex, start: int, rank: int, L: int) -> None:
    """Copy from the side-match offset of the given rank (increasing offset
    order, so the rank-th most recent matching start position)."""
    j = side.nth_recent_match(start, rank, start)
    if j < 0:
        raise CorruptStreamError(
            f"rank {rank} exceeds the available side matches at block start {start}"
        )
    _copy_block(out, start, start - j, L)


def expected_bits(trace: PhraseTrace, cfg: FixedParseConfig) -> int:
    """Closed-form codeword length for a traced case.

    This recomputes, from the recorded counters alone, the length the
    code tables promise; conformance tests compare it with trace.bits.
    """
    k = cfg.raw_block_bits
    if trace.case == CASE_RAW_FIRST:
        return k
    if trace.case == CASE_XY_MATCH:
        return prefix_width(k) + floor_log2(trace.joint_rank)
    if trace.case == CASE_ESCAPE_RAW:
        return prefix_width(k) + k
    if trace.case == CASE_FLAG0_MATCH:
        extra = 0 if trace.joint_rank == 1 << k else floor_log2(trace.joint_rank)
        return 1 + prefix_width(k) + extra
    if trace.case == CASE_FLAG1_X_MATCH:
        return 1 + prefix_width(cfg.x_offset_bits) + floor_log2(trace.x_offset)
    if trace.case == CASE_FLAG1_ESCAPE:
        return 1 + prefix_width(cfg.x_offset_bits) + k
    if trace.case == CASE_ADAPTIVE_MATCH:
        return prefix_width(trace.adaptive_bits) + floor_log2(trace.joint_rank)
    if trace.case == CASE_ADAPTIVE_ESCAPE:
        return prefix_width(trace.adaptive_bits) + k
    raise ValueError(f"unknown trace case {trace.case!r}")


def phrase_lengths(traces: list[PhraseTrace]) -> dict[str, tuple[int, int]]:
    """Aggregate emitted bits by case: {case: (blocks, total_bits)}."""
    table: dict[str, tuple[int, int]] = {}
    for t in traces:
        count, bits = table.get(t.case, (0, 0))
        table[t.case] = (count + 1, bits + t.bits)
    return table
