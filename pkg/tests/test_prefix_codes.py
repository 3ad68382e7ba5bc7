import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clzsi.bitio import Bitstream, ceil_log2, floor_log2
from clzsi.errors import CorruptStreamError, TruncatedStreamError
from clzsi.prefix_codes import (
    capped_decode,
    capped_encode,
    capped_length,
    elias_delta_decode,
    elias_delta_encode,
    elias_delta_length,
    prefix_width,
)


def encode_capped(k, n):
    s = Bitstream()
    capped_encode(s, k, n)
    return s.bit_string()


def encode_delta(n):
    s = Bitstream()
    elias_delta_encode(s, n)
    return s.bit_string()


@pytest.mark.parametrize(
    "k,n,bits",
    [
        (2, 1, "00"),
        (2, 2, "010"),
        (2, 4, "10"),
        (0, 1, ""),
        (3, 5, "1001"),
        (3, 8, "11"),
    ],
)
def test_capped_patterns(k, n, bits):
    assert encode_capped(k, n) == bits


@pytest.mark.parametrize("k,n,length", [(3, 5, 4), (3, 8, 2), (3, 1, 2), (2, 1, 2), (2, 2, 3)])
def test_capped_lengths(k, n, length):
    assert capped_length(k, n) == length


def test_capped_length_formula_exhaustive():
    # closed form: ceil(log2(1+k)) + floor(log2 n) below the cap, prefix only at it
    for k in range(0, 13):
        for n in range(1, (1 << k) + 1):
            expected = prefix_width(k) + (0 if n == 1 << k else floor_log2(n))
            assert capped_length(k, n) == expected


def test_capped_round_trip_exhaustive():
    for k in range(0, 13):
        for n in range(1, (1 << k) + 1):
            s = Bitstream()
            capped_encode(s, k, n)
            assert s.bits_written == capped_length(k, n)
            assert capped_decode(s, k) == n
            assert s.bit_length == 0


@pytest.mark.parametrize("k", [1, 2, 3, 6, 9, 12])
def test_capped_prefix_free(k):
    words = sorted(encode_capped(k, n) for n in range(1, (1 << k) + 1))
    assert len(set(words)) == len(words)
    for a, b in zip(words, words[1:]):
        assert not b.startswith(a)


def test_capped_decode_examples():
    s = Bitstream()
    s.write_bits(0b010, 3)
    assert capped_decode(s, 2) == 2
    assert s.bits_read == 3
    s = Bitstream()
    s.write_bits(0b10, 2)
    assert capped_decode(s, 2) == 4
    s = Bitstream()
    s.write_bits(0b1001, 4)
    assert capped_decode(s, 3) == 5
    assert s.bits_read == 4


def test_capped_domain_errors():
    with pytest.raises(ValueError):
        capped_length(2, 0)
    with pytest.raises(ValueError):
        capped_length(2, 5)
    with pytest.raises(ValueError):
        encode_capped(0, 2)


def test_capped_decode_corrupt_prefix():
    # prefix field decoding past the parameter means a corrupt stream:
    # with k=2 the two-bit exponent field can hold 3, but e must be <= 2
    s = Bitstream()
    s.write_bits(0b11, 2)
    with pytest.raises(CorruptStreamError):
        capped_decode(s, 2)


def test_capped_decode_truncated():
    s = Bitstream()
    s.write_bits(0b01, 2)  # promises one mantissa bit that never arrives
    with pytest.raises(TruncatedStreamError):
        capped_decode(s, 2)


@pytest.mark.parametrize(
    "n,bits",
    [(1, "1"), (2, "0100"), (3, "0101"), (4, "01100"), (5, "01101"), (10, "00100010")],
)
def test_delta_patterns(n, bits):
    assert encode_delta(n) == bits


def test_delta_round_trip_and_length():
    for n in list(range(1, 3000)) + [2**16, 2**16 + 1, 2**20, 2**25 - 7]:
        s = Bitstream()
        elias_delta_encode(s, n)
        assert s.bits_written == elias_delta_length(n)
        assert elias_delta_decode(s) == n
        assert s.bit_length == 0


def test_delta_prefix_free_sampled():
    words = sorted(encode_delta(n) for n in range(1, 4097))
    for a, b in zip(words, words[1:]):
        assert not b.startswith(a)


def test_delta_rejects_nonpositive():
    for n in (0, -1):
        with pytest.raises(ValueError):
            elias_delta_length(n)
        with pytest.raises(ValueError):
            elias_delta_encode(Bitstream(), n)


def test_delta_length_bound_sampled():
    for n in (1, 2, 3, 100, 2**10, 2**20, 2**30):
        assert elias_delta_length(n) <= 4 * math.log2(n + 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=2**62))
def test_delta_round_trip_property(n):
    s = Bitstream()
    elias_delta_encode(s, n)
    assert elias_delta_decode(s) == n
    assert s.bits_written == elias_delta_length(n)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=14), st.data())
def test_capped_round_trip_property(k, data):
    n = data.draw(st.integers(min_value=1, max_value=1 << k))
    s = Bitstream()
    capped_encode(s, k, n)
    assert capped_decode(s, k) == n
