"""Universal integer prefix codes used by the codecs.

Two codes:

* capped code over [1, 2**k]: an exponent field of ceil(log2(k+1)) bits
  followed by the mantissa bits of n below its leading one.  The top
  exponent value k stands for n = 2**k, carries no mantissa, and doubles
  as the escape word in the codecs.  Codeword lengths are
  ceil(log2(k+1)) + floor(log2(n)) for n < 2**k and ceil(log2(k+1)) for
  n = 2**k.  k = 0 is legal and degenerate: the domain is {1} and the
  codeword is empty.

* Elias delta over positive integers, used for phrase lengths in the
  sliding-window codec.  Its length is within 4*log2(n+1) for all n >= 1.

Both are pure functions of their arguments and freely shareable across
threads.
"""

from __future__ import annotations

from .bitio import Bitstream, ceil_log2, floor_log2
from .errors import CorruptStreamError

__all__ = [
    "prefix_width",
    "capped_encode",
    "capped_decode",
    "capped_length",
    "elias_delta_encode",
    "elias_delta_decode",
    "elias_delta_length",
]


def prefix_width(k: int) -> int:
    """Bits in the exponent field of the capped code: ceil(log2(1+k))."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return ceil_log2(k + 1)


def _check_domain(k: int, n: int) -> None:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not 1 <= n <= (1 << k):
        raise ValueError(f"n={n} outside [1, 2^{k}]")


def capped_length(k: int, n: int) -> int:
    """Codeword length of the capped code without encoding."""
    _check_domain(k, n)
    if n == 1 << k:
        return prefix_width(k)
    return prefix_width(k) + floor_log2(n)


def capped_encode(stream: Bitstream, k: int, n: int) -> None:
    """Append the capped codeword for n in [1, 2**k]."""
    _check_domain(k, n)
    width = prefix_width(k)
    if n == 1 << k:
        stream.write_bits(k, width)
        return
    e = floor_log2(n)
    stream.write_bits(e, width)
    stream.write_bits(n & ((1 << e) - 1), e)


def capped_decode(stream: Bitstream, k: int) -> int:
    """Read one capped codeword and return its integer in [1, 2**k]."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    e = stream.read_bits(prefix_width(k))
    if e > k:
        raise CorruptStreamError(f"capped code exponent {e} exceeds parameter {k}")
    if e == k:
        return 1 << k
    return (1 << e) | stream.read_bits(e)


def elias_delta_length(n: int) -> int:
    """Codeword length of Elias delta for n >= 1."""
    if n < 1:
        raise ValueError("Elias delta encodes positive integers only")
    b = n.bit_length()
    return (b - 1) + 2 * b.bit_length() - 1


def elias_delta_encode(stream: Bitstream, n: int) -> None:
    """Append the Elias delta codeword for n >= 1."""
    if n < 1:
        raise ValueError("Elias delta encodes positive integers only")
    b = n.bit_length()
    # gamma code of b: its bit count again, as leading zeros, then b itself
    stream.write_bits(b, 2 * b.bit_length() - 1)
    stream.write_bits(n & ((1 << (b - 1)) - 1), b - 1)


def elias_delta_decode(stream: Bitstream) -> int:
    """Read one Elias delta codeword and return its positive integer."""
    zeros = 0
    while stream.read_bits(1) == 0:
        zeros += 1
    b = (1 << zeros) | stream.read_bits(zeros)
    return (1 << (b - 1)) | stream.read_bits(b - 1)
