"""On-disk container for compressed streams.

Layout, all integers big-endian:

    magic   6 bytes  b"CLZSI1"
    version 1 byte   currently 1
    algo    1 byte   1..4
    |A|-1   1 byte   input alphabet size minus one (2..256 supported)
    |B|-1   1 byte   side alphabet size minus one
    params           algo 1/3: block_len, num_blocks   (4 bytes each)
                     algo 2:   block_len, num_blocks, x_offset_bits
                     algo 4:   window, total_symbols
    bits    8 bytes  payload length in bits
    payload          zero-padded to a byte boundary
    crc32   4 bytes  over header, payload, and the side-information digest

Side information never travels in the container; the digest only binds
the file to the exact side content so decoding against the wrong side
sequence fails loudly instead of producing garbage.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass

from .bitio import Bitstream
from .errors import ChecksumMismatchError, ContainerFormatError
from .fixed_lz import FixedParseConfig, decode_fixed, encode_fixed
from .matching import SymbolSequence
from .window_lz import WindowConfig, decode_window, encode_window

__all__ = [
    "ContainerHeader",
    "compress_to_container",
    "decompress_container",
    "parse_container",
    "side_digest",
]

MAGIC = b"CLZSI1"
VERSION = 1


@dataclass(frozen=True)
class ContainerHeader:
    algorithm: int
    alphabet_size: int
    side_alphabet_size: int
    params: tuple[int, ...]
    payload_bits: int

    def codec_config(self):
        if self.algorithm in (1, 3):
            block_len, num_blocks = self.params
            return FixedParseConfig(
                block_len, num_blocks, self.algorithm, self.alphabet_size, self.side_alphabet_size
            )
        if self.algorithm == 2:
            block_len, num_blocks, x_offset_bits = self.params
            return FixedParseConfig(
                block_len,
                num_blocks,
                2,
                self.alphabet_size,
                self.side_alphabet_size,
                x_offset_bits,
            )
        window, total = self.params
        return WindowConfig(window, total, self.alphabet_size, self.side_alphabet_size)


def side_digest(side: SymbolSequence) -> bytes:
    """SHA-256 over the side alphabet and symbol bytes."""
    h = hashlib.sha256()
    h.update(struct.pack(">I", side.alphabet_size))
    h.update(side.symbols.astype("uint8" if side.alphabet_size <= 256 else ">u4").tobytes())
    return h.digest()


def _param_count(algorithm: int) -> int:
    return {1: 2, 2: 3, 3: 2, 4: 2}[algorithm]


def _check_alphabet_byte(size: int, label: str) -> int:
    if not 2 <= size <= 256:
        raise ValueError(f"{label} alphabet size {size} outside the container range 2..256")
    return size - 1


def _serialize_header(header: ContainerHeader) -> bytes:
    parts = [
        MAGIC,
        struct.pack(
            ">BBBB",
            VERSION,
            header.algorithm,
            _check_alphabet_byte(header.alphabet_size, "input"),
            _check_alphabet_byte(header.side_alphabet_size, "side"),
        ),
    ]
    for value in header.params:
        parts.append(struct.pack(">I", value))
    parts.append(struct.pack(">Q", header.payload_bits))
    return b"".join(parts)


def compress_to_container(
    x: SymbolSequence,
    y: SymbolSequence,
    algorithm: int,
    block_len: int | None = None,
    x_offset_bits: int | None = None,
    window: int | None = None,
) -> bytes:
    """Encode x against y and frame the result as container bytes."""
    if algorithm in (1, 2, 3):
        if block_len is None:
            raise ValueError("fixed-parse algorithms need block_len")
        if len(x) % block_len:
            raise ValueError(
                f"input length {len(x)} is not a multiple of block_len {block_len}"
            )
        num_blocks = len(x) // block_len
        cfg = FixedParseConfig(
            block_len,
            num_blocks,
            algorithm,
            x.alphabet_size,
            y.alphabet_size,
            x_offset_bits if algorithm == 2 else None,
        )
        stream, _ = encode_fixed(x, y, cfg)
        params: tuple[int, ...] = (
            (block_len, num_blocks, x_offset_bits)
            if algorithm == 2
            else (block_len, num_blocks)
        )
    elif algorithm == 4:
        if window is None:
            raise ValueError("the sliding-window algorithm needs a window size")
        cfg = WindowConfig(window, len(x), x.alphabet_size, y.alphabet_size)
        stream, _ = encode_window(x, y, cfg)
        params = (window, len(x))
    else:
        raise ValueError("algorithm must be 1, 2, 3, or 4")

    header = ContainerHeader(
        algorithm, x.alphabet_size, y.alphabet_size, params, stream.bits_written
    )
    head = _serialize_header(header)
    payload = stream.finalize()
    crc = zlib.crc32(head + payload + side_digest(y)) & 0xFFFFFFFF
    return head + payload + struct.pack(">I", crc)


def parse_container(data: bytes) -> tuple[ContainerHeader, bytes, int]:
    """Split container bytes into header, payload, and stored checksum."""
    if len(data) < len(MAGIC) + 4:
        raise ContainerFormatError("container shorter than its fixed header")
    if data[: len(MAGIC)] != MAGIC:
        raise ContainerFormatError("bad magic")
    version, algorithm, a_byte, b_byte = struct.unpack_from(">BBBB", data, len(MAGIC))
    if version != VERSION:
        raise ContainerFormatError(f"unsupported version {version}")
    if algorithm not in (1, 2, 3, 4):
        raise ContainerFormatError(f"unknown algorithm id {algorithm}")
    offset = len(MAGIC) + 4
    count = _param_count(algorithm)
    need = offset + 4 * count + 8
    if len(data) < need:
        raise ContainerFormatError("truncated header")
    params = struct.unpack_from(f">{count}I", data, offset)
    offset += 4 * count
    (payload_bits,) = struct.unpack_from(">Q", data, offset)
    offset += 8
    payload_bytes = (payload_bits + 7) // 8
    if len(data) != offset + payload_bytes + 4:
        raise ContainerFormatError(
            f"container size {len(data)} does not match header ({offset + payload_bytes + 4})"
        )
    payload = data[offset : offset + payload_bytes]
    (crc,) = struct.unpack_from(">I", data, offset + payload_bytes)
    header = ContainerHeader(algorithm, a_byte + 1, b_byte + 1, params, payload_bits)
    return header, payload, crc


def decompress_container(data: bytes, y: SymbolSequence) -> SymbolSequence:
    """Verify and decode container bytes against the side information."""
    header, payload, stored_crc = parse_container(data)
    head = _serialize_header(header)
    crc = zlib.crc32(head + payload + side_digest(y)) & 0xFFFFFFFF
    if crc != stored_crc:
        raise ChecksumMismatchError(
            "checksum mismatch: wrong or altered side information, or damaged container"
        )
    stream = Bitstream.from_bytes(payload, header.payload_bits)
    try:
        cfg = header.codec_config()
    except ValueError as exc:
        raise ContainerFormatError(f"inconsistent header parameters: {exc}") from exc
    if header.algorithm == 4:
        return decode_window(stream, y, cfg)
    return decode_fixed(stream, y, cfg)
