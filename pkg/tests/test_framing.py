import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlorasim.errors import InvalidParameterError
from dlorasim.framing import (
    FrameConfig,
    bit_errors,
    chirp_count,
    count_bit_errors,
    interferer_chirp_count,
    payload_bit_count,
    random_packet,
    time_on_air_chips,
)
from dlorasim.phy import Channel, ChirpFamily

symbols7 = st.integers(0, 127)


@pytest.mark.parametrize("n_bytes, sf, bits", [(20, 7, 168), (20, 12, 192), (1, 7, 28)])
def test_payload_bit_count(n_bytes, sf, bits):
    assert payload_bit_count(n_bytes, sf) == bits


@pytest.mark.parametrize("n_bits, cr, sf, chirps", [(168, 1, 7, 30), (192, 1, 12, 20), (28, 0, 7, 4)])
def test_chirp_count(n_bits, cr, sf, chirps):
    assert chirp_count(n_bits, cr, sf) == chirps


@pytest.mark.parametrize(
    "call",
    [
        lambda: payload_bit_count(0, 7),
        lambda: payload_bit_count(20, 6),
        lambda: chirp_count(0, 1, 7),
        lambda: chirp_count(168, 4, 7),
        lambda: FrameConfig(0, 1, Channel(7, "up")),
    ],
)
def test_framing_rejects(call):
    with pytest.raises(InvalidParameterError):
        call()


def test_payload_bits_exhaustive():
    for n in range(1, 256):
        for sf in range(7, 13):
            bits = payload_bit_count(n, sf)
            assert bits % (4 * sf) == 0
            assert 8 * n <= bits < 8 * n + 4 * sf
            assert chirp_count(bits, 1, sf) >= bits / sf


def test_time_on_air():
    assert time_on_air_chips(30, 128) == 3840
    assert time_on_air_chips(20, 4096) == 81920
    assert time_on_air_chips(1, 128) == 128


@pytest.mark.parametrize("toa, m_i, n", [(3840, 256, 16), (3840, 128, 31), (1, 128, 2)])
def test_interferer_chirp_count(toa, m_i, n):
    assert interferer_chirp_count(toa, m_i) == n


def test_interferer_covers_window_for_any_shift():
    for sf_r in range(7, 13):
        toa = time_on_air_chips(FrameConfig(20, 1, Channel(sf_r, "up")).n_chirps, 2**sf_r)
        for sf_i in range(7, 13):
            m_i = 2**sf_i
            n = interferer_chirp_count(toa, m_i)
            assert n * m_i >= toa + m_i
            # worst shift: just under one interferer symbol
            assert (toa - 1) + (m_i - 1) + 0.99 < n * m_i


def test_random_packet_reproducible():
    ch = Channel(7, ChirpFamily.UP)
    a = random_packet(np.random.default_rng(3), ch, 30)
    b = random_packet(np.random.default_rng(3), ch, 30)
    np.testing.assert_array_equal(a.symbols, b.symbols)
    assert len(a.symbols) == 30 and a.symbols.max() < 128
    assert a.amplitude == 1.0


def test_random_packet_uniform():
    p = random_packet(np.random.default_rng(11), Channel(7, "up"), 100_000)
    counts = np.bincount(p.symbols, minlength=128)
    expected = 100_000 / 128
    sigma = math.sqrt(100_000 * (1 / 128) * (127 / 128))
    assert np.abs(counts - expected).max() < 5 * sigma


def test_bit_errors_examples():
    assert bit_errors(5, 5, 7) == 0
    assert bit_errors(0, 1, 7) == 1
    assert bit_errors(0, 127, 7) == 7
    with pytest.raises(InvalidParameterError):
        bit_errors(0, 128, 7)


def test_gray_mapping_neighbours_differ_by_one_bit():
    a = np.arange(127)
    assert (count_bit_errors(a, a + 1, "gray") == 1).all()
    assert count_bit_errors(0, 127, "gray") == 1


@given(symbols7, symbols7, symbols7)
def test_bit_errors_is_a_metric(a, b, c):
    assert bit_errors(a, b, 7) == bit_errors(b, a, 7)
    assert (bit_errors(a, b, 7) == 0) == (a == b)
    assert bit_errors(a, c, 7) <= bit_errors(a, b, 7) + bit_errors(b, c, 7)
    assert bit_errors(a, b, 7) <= 7


@given(symbols7, symbols7)
def test_bit_errors_matches_string_hamming(a, b):
    sa, sb = format(a, "07b"), format(b, "07b")
    assert bit_errors(a, b, 7) == sum(x != y for x, y in zip(sa, sb))
