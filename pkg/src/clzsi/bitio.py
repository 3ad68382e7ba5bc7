"""MSB-first bit buffer underlying every codec.

Bits are appended most significant first, so a hex dump of a finalized
stream reads left to right in write order.  Finalization pads the last
byte with zeros; the true bit count travels out of band (the container
header records it), so padding is never mistaken for data.

A stream instance is meant for a single writer or a single reader at a
time; distinct instances are fully independent.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptStreamError, TruncatedStreamError

__all__ = [
    "Bitstream",
    "ceil_log2",
    "floor_log2",
    "block_width",
    "block_rank",
    "rank_block",
    "write_block",
    "read_block",
]


def floor_log2(n: int) -> int:
    """Largest e with 2**e <= n, for n >= 1."""
    if n < 1:
        raise ValueError(f"floor_log2 needs n >= 1, got {n}")
    return n.bit_length() - 1


def ceil_log2(n: int) -> int:
    """Smallest e with 2**e >= n, for n >= 1."""
    if n < 1:
        raise ValueError(f"ceil_log2 needs n >= 1, got {n}")
    return (n - 1).bit_length()


class Bitstream:
    """Append-only bit buffer with a separate read cursor."""

    __slots__ = ("_buf", "_acc", "_nacc", "_written", "_read")

    def __init__(self) -> None:
        self._buf = bytearray()  # whole bytes, oldest first
        self._acc = 0            # pending bits not yet a full byte
        self._nacc = 0           # number of pending bits, always < 8
        self._written = 0
        self._read = 0

    @classmethod
    def from_bytes(cls, data: bytes, bit_length: int) -> "Bitstream":
        """Rebuild a stream from finalize() output and its true bit count."""
        if bit_length < 0:
            raise ValueError("bit_length must be nonnegative")
        if len(data) != (bit_length + 7) // 8:
            raise ValueError(
                f"byte count {len(data)} does not fit bit_length {bit_length}"
            )
        stream = cls()
        nbytes = bit_length // 8
        stream._buf = bytearray(data[:nbytes])
        tail = bit_length - 8 * nbytes
        if tail:
            stream._acc = data[nbytes] >> (8 - tail)
            stream._nacc = tail
        stream._written = bit_length
        return stream

    @property
    def bits_written(self) -> int:
        return self._written

    @property
    def bits_read(self) -> int:
        return self._read

    @property
    def bit_length(self) -> int:
        """Bits written and not yet consumed by a read."""
        return self._written - self._read

    def write_bits(self, value: int, width: int) -> None:
        """Append the width-bit representation of value, MSB first."""
        if width < 0:
            raise ValueError("width must be nonnegative")
        if value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nacc += width
        self._written += width
        if self._nacc >= 8:
            keep = self._nacc & 7
            chunk = self._acc >> keep
            self._buf += chunk.to_bytes(self._nacc >> 3, "big")
            self._acc &= (1 << keep) - 1
            self._nacc = keep

    def read_bits(self, width: int) -> int:
        """Consume width bits and return them as an integer, MSB first."""
        if width < 0:
            raise ValueError("width must be nonnegative")
        if self._read + width > self._written:
            raise TruncatedStreamError(
                f"read of {width} bits with only {self.bit_length} unread"
            )
        start = self._read
        end = start + width
        nbuf = len(self._buf) * 8
        value = 0
        if start < nbuf:
            hi = min(end, nbuf)
            first = start >> 3
            last = (hi + 7) >> 3
            chunk = int.from_bytes(self._buf[first:last], "big")
            chunk >>= 8 * (last - first) - (hi - 8 * first)
            value = chunk & ((1 << (hi - start)) - 1)
        if end > nbuf:
            lo = max(start, nbuf)
            nbits = end - lo
            drop = self._nacc - (end - nbuf)
            value = (value << nbits) | ((self._acc >> drop) & ((1 << nbits) - 1))
        self._read = end
        return value

    def finalize(self) -> bytes:
        """Return all written bits zero-padded to a byte boundary.

        Non-mutating; the read cursor and buffer are untouched.
        """
        out = bytes(self._buf)
        if self._nacc:
            out += bytes([self._acc << (8 - self._nacc) & 0xFF])
        return out

    def bit_string(self) -> str:
        """All written bits as a '0'/'1' string, for small streams."""
        bits = []
        for byte in self._buf:
            bits.append(format(byte, "08b"))
        if self._nacc:
            bits.append(format(self._acc, f"0{self._nacc}b"))
        return "".join(bits)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Bitstream(written={self._written}, read={self._read})"


def block_width(alphabet_size: int, length: int) -> int:
    """Bits needed for a length-symbol block: ceil(length * log2(alphabet))."""
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be at least 2")
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return 0
    if alphabet_size & (alphabet_size - 1) == 0:
        return length * (alphabet_size.bit_length() - 1)
    return ceil_log2(alphabet_size**length)


def block_rank(symbols: np.ndarray, alphabet_size: int) -> int:
    """Rank of a block in the lexicographic order of equal-length blocks."""
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        return 0
    if alphabet_size == 2:
        packed = np.packbits(symbols.astype(np.uint8))
        pad = (-symbols.size) % 8
        return int.from_bytes(packed.tobytes(), "big") >> pad
    rank = 0
    for s in symbols.tolist():
        rank = rank * alphabet_size + int(s)
    return rank


def rank_block(rank: int, alphabet_size: int, length: int) -> np.ndarray:
    """Inverse of block_rank: rebuild the block symbols from their rank."""
    if alphabet_size == 2:
        nbytes = (length + 7) // 8
        raw = (rank << ((-length) % 8)).to_bytes(nbytes, "big")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:length].astype(np.uint8)
    out = np.empty(length, dtype=np.int64)
    for i in range(length - 1, -1, -1):
        rank, out[i] = divmod(rank, alphabet_size)
    return out


def write_block(stream: Bitstream, symbols: np.ndarray, alphabet_size: int) -> None:
    """Append a symbol block as its lexicographic rank in block_width bits."""
    stream.write_bits(block_rank(symbols, alphabet_size), block_width(alphabet_size, len(symbols)))


def read_block(stream: Bitstream, alphabet_size: int, length: int) -> np.ndarray:
    """Consume block_width bits and rebuild the symbol block."""
    rank = stream.read_bits(block_width(alphabet_size, length))
    if alphabet_size & (alphabet_size - 1) and rank >= alphabet_size**length:
        # power-of-two alphabets fill the width exactly, so only the
        # remainder alphabets can decode an out-of-range rank
        raise CorruptStreamError(f"block rank {rank} out of range for {alphabet_size}^{length}")
    return rank_block(rank, alphabet_size, length)
