"""Lossless compression with shared side information.

Codecs that exploit a side sequence known identically to compressor and
decompressor: three fixed-block-parsing variants and a variable-length
sliding-window variant, plus the source models, entropy estimators, and
experiment harness used to study their rates.
"""

from .analysis import (
    AdvantageRow,
    MatchBoundRow,
    RateRow,
    flag_advantage,
    kac_bound_check,
    run_rate_experiment,
    write_advantage_csv,
    write_match_bound_csv,
    write_rate_csv,
)
from .bitio import Bitstream
from .container import compress_to_container, decompress_container, side_digest
from .errors import (
    ChecksumMismatchError,
    ClzsiError,
    ContainerFormatError,
    CorruptStreamError,
    TruncatedStreamError,
)
from .fixed_lz import (
    FixedParseConfig,
    PhraseTrace,
    decode_fixed,
    encode_fixed,
    expected_bits,
    phrase_lengths,
)
from .matching import (
    RecurrenceResult,
    SymbolSequence,
    WindowMatch,
    fixed_recurrence,
    fuse,
    matches_until_recurrence,
    recurrence_time,
    window_longest_match,
    window_side_matches,
)
from .sources import (
    EntropyEstimate,
    MarkovModel,
    PairedSource,
    block_conditional_entropy,
    block_conditional_probability,
    conditional_entropy_rate,
    correlated_binary_model,
    generate,
    joint_entropy_rate,
    rate_bound,
    side_entropy_rate,
    stationary_distribution,
)
from .window_lz import WindowConfig, WindowPhraseTrace, decode_window, encode_window

__version__ = "0.1.0"

__all__ = [
    "AdvantageRow",
    "Bitstream",
    "ChecksumMismatchError",
    "ClzsiError",
    "ContainerFormatError",
    "CorruptStreamError",
    "EntropyEstimate",
    "FixedParseConfig",
    "MarkovModel",
    "MatchBoundRow",
    "PairedSource",
    "PhraseTrace",
    "RateRow",
    "RecurrenceResult",
    "SymbolSequence",
    "TruncatedStreamError",
    "WindowConfig",
    "WindowMatch",
    "WindowPhraseTrace",
    "block_conditional_entropy",
    "block_conditional_probability",
    "compress_to_container",
    "conditional_entropy_rate",
    "correlated_binary_model",
    "decode_fixed",
    "decode_window",
    "decompress_container",
    "encode_fixed",
    "encode_window",
    "expected_bits",
    "fixed_recurrence",
    "flag_advantage",
    "fuse",
    "generate",
    "joint_entropy_rate",
    "kac_bound_check",
    "matches_until_recurrence",
    "phrase_lengths",
    "rate_bound",
    "recurrence_time",
    "run_rate_experiment",
    "side_digest",
    "side_entropy_rate",
    "stationary_distribution",
    "window_longest_match",
    "window_side_matches",
    "write_advantage_csv",
    "write_match_bound_csv",
    "write_rate_csv",
]
