import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clzsi.bitio import (
    Bitstream,
    block_rank,
    block_width,
    ceil_log2,
    floor_log2,
    rank_block,
    read_block,
    write_block,
)
from clzsi.errors import TruncatedStreamError


def test_write_examples():
    s = Bitstream()
    s.write_bits(5, 3)
    assert s.bit_string() == "101"
    s2 = Bitstream()
    s2.write_bits(0, 1)
    assert s2.bit_string() == "0"
    s.write_bits(1, 2)
    assert s.bit_string() == "10101"


def test_read_examples():
    s = Bitstream()
    s.write_bits(5, 3)
    assert s.read_bits(3) == 5
    s = Bitstream()
    s.write_bits(0b10101, 5)
    assert s.read_bits(3) == 5
    assert s.read_bits(2) == 1


def test_finalize_examples():
    s = Bitstream()
    s.write_bits(0b101, 3)
    assert s.finalize() == bytes([0b10100000])
    assert s.bits_written == 3
    assert Bitstream().finalize() == b""
    s = Bitstream()
    s.write_bits(0xFF, 8)
    assert s.finalize() == b"\xff"


def test_finalize_parse_identity():
    s = Bitstream()
    for value, width in [(5, 3), (0, 1), (1023, 10), (1, 64)]:
        s.write_bits(value, width)
    parsed = Bitstream.from_bytes(s.finalize(), s.bits_written)
    assert parsed.bit_string() == s.bit_string()
    assert parsed.bits_written == s.bits_written


def test_underrun_raises():
    s = Bitstream()
    s.write_bits(3, 2)
    with pytest.raises(TruncatedStreamError):
        s.read_bits(3)
    # stream is still usable for the bits that do exist
    assert s.read_bits(2) == 3


def test_value_out_of_range():
    s = Bitstream()
    with pytest.raises(ValueError):
        s.write_bits(4, 2)
    with pytest.raises(ValueError):
        s.write_bits(-1, 2)
    with pytest.raises(ValueError):
        s.write_bits(1, 0)
    s.write_bits(0, 0)  # zero-width zero is fine and writes nothing
    assert s.bits_written == 0


def test_from_bytes_validates_length():
    with pytest.raises(ValueError):
        Bitstream.from_bytes(b"\x00", 9)
    with pytest.raises(ValueError):
        Bitstream.from_bytes(b"\x00\x00", 3)


def test_wide_values():
    s = Bitstream()
    big = (1 << 64) - 3
    s.write_bits(big, 64)
    s.write_bits(1, 1)
    assert s.read_bits(64) == big
    assert s.read_bits(1) == 1
    # widths beyond 64 work too; the container layer relies on this
    s = Bitstream()
    huge = (1 << 1000) - 12345
    s.write_bits(huge, 1000)
    assert s.read_bits(1000) == huge


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.integers(min_value=0, max_value=64).flatmap(
            lambda w: st.tuples(st.integers(min_value=0, max_value=(1 << w) - 1), st.just(w))
        ),
        max_size=40,
    )
)
def test_round_trip_any_write_sequence(items):
    s = Bitstream()
    for value, width in items:
        s.write_bits(value, width)
    assert s.bit_length == sum(w for _, w in items)
    for value, width in items:
        assert s.read_bits(width) == value
    assert s.bit_length == 0


@settings(max_examples=120, deadline=None)
@given(
    st.lists(
        st.integers(min_value=0, max_value=64).flatmap(
            lambda w: st.tuples(st.integers(min_value=0, max_value=(1 << w) - 1), st.just(w))
        ),
        max_size=30,
    )
)
def test_finalize_parse_round_trip(items):
    s = Bitstream()
    for value, width in items:
        s.write_bits(value, width)
    parsed = Bitstream.from_bytes(s.finalize(), s.bits_written)
    for value, width in items:
        assert parsed.read_bits(width) == value


def test_log2_helpers():
    assert [floor_log2(n) for n in (1, 2, 3, 4, 7, 8)] == [0, 1, 1, 2, 2, 3]
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 7, 8)] == [0, 1, 2, 2, 3, 3]
    with pytest.raises(ValueError):
        floor_log2(0)
    with pytest.raises(ValueError):
        ceil_log2(0)


@pytest.mark.parametrize(
    "alphabet,length,expected",
    [(2, 4, 4), (2, 0, 0), (4, 3, 6), (3, 2, 4), (5, 3, 7), (256, 2, 16)],
)
def test_block_width(alphabet, length, expected):
    assert block_width(alphabet, length) == expected


@pytest.mark.parametrize("alphabet", [2, 3, 4, 5, 256])
def test_block_rank_round_trip(alphabet):
    rng = np.random.default_rng(alphabet)
    for length in (1, 2, 5, 9):
        block = rng.integers(0, alphabet, length)
        rank = block_rank(block, alphabet)
        assert rank == int("".join(str(s) for s in block), alphabet) if alphabet <= 10 else True
        assert np.array_equal(rank_block(rank, alphabet, length), block)


def test_write_read_block_stream():
    rng = np.random.default_rng(0)
    for alphabet in (2, 3, 256):
        block = rng.integers(0, alphabet, 7)
        s = Bitstream()
        write_block(s, block, alphabet)
        assert s.bits_written == block_width(alphabet, 7)
        assert np.array_equal(read_block(s, alphabet, 7), block)
