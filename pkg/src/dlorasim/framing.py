"""Packet-size arithmetic, random packets and bit-error accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .phy import SF_VALUES, Channel

CR_VALUES = (0, 1, 2, 3)
BIT_MAPPINGS = ("natural", "gray")


@dataclass(frozen=True)
class FrameConfig:
    n_bytes: int
    cr: int
    channel: Channel

    def __post_init__(self):
        if self.n_bytes < 1:
            raise InvalidParameterError(f"n_bytes must be >= 1, got {self.n_bytes}")
        if self.cr not in CR_VALUES:
            raise InvalidParameterError(f"cr must be one of {CR_VALUES}, got {self.cr}")

    @property
    def n_chirps(self) -> int:
        sf = self.channel.sf
        return chirp_count(payload_bit_count(self.n_bytes, sf), self.cr, sf)


@dataclass(frozen=True)
class Packet:
    channel: Channel
    symbols: np.ndarray
    amplitude: float = 1.0


def _check_sf(sf):
    if sf not in SF_VALUES:
        raise InvalidParameterError(f"sf must be one of {SF_VALUES}, got {sf!r}")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def payload_bit_count(n_bytes: int, sf: int) -> int:
    """Payload bits padded up to a whole number of ``4*sf``-bit blocks."""
    _check_sf(sf)
    if n_bytes < 1:
        raise InvalidParameterError(f"n_bytes must be >= 1, got {n_bytes}")
    block = 4 * sf
    return _ceil_div(8 * n_bytes, block) * block


def chirp_count(n_bits: int, cr: int, sf: int) -> int:
    """Symbols needed for ``n_bits`` at code rate ``4/(cr+4)``."""
    _check_sf(sf)
    if n_bits < 1:
        raise InvalidParameterError(f"n_bits must be >= 1, got {n_bits}")
    if cr not in CR_VALUES:
        raise InvalidParameterError(f"cr must be one of {CR_VALUES}, got {cr}")
    return _ceil_div(n_bits * (cr + 4), 4 * sf)


def time_on_air_chips(n_chirps: int, m: int) -> int:
    return n_chirps * m


def interferer_chirp_count(toa_chips: int, m_i: int) -> int:
    # one extra symbol absorbs any shift below one interferer symbol
    return _ceil_div(toa_chips, m_i) + 1


def random_packet(rng: np.random.Generator, channel: Channel, n_chirps: int, amplitude: float = 1.0) -> Packet:
    if n_chirps < 1:
        raise InvalidParameterError(f"n_chirps must be >= 1, got {n_chirps}")
    symbols = rng.integers(0, 1 << channel.sf, size=n_chirps, dtype=np.int64)
    return Packet(channel, symbols, float(amplitude))


def gray_encode(symbols):
    symbols = np.asarray(symbols, dtype=np.int64)
    return symbols ^ (symbols >> 1)


def count_bit_errors(sent, received, mapping: str = "natural") -> np.ndarray:
    """Elementwise Hamming distance between symbol bit labels."""
    sent = np.asarray(sent, dtype=np.int64)
    received = np.asarray(received, dtype=np.int64)
    if mapping == "gray":
        sent, received = gray_encode(sent), gray_encode(received)
    elif mapping != "natural":
        raise InvalidParameterError(f"mapping must be one of {BIT_MAPPINGS}, got {mapping!r}")
    return np.bitwise_count(sent ^ received).astype(np.int64)


def bit_errors(sent: int, received: int, sf: int, mapping: str = "natural") -> int:
    _check_sf(sf)
    limit = 1 << sf
    if not (0 <= sent < limit and 0 <= received < limit):
        raise InvalidParameterError(f"symbols must be in [0, {limit - 1}]")
    return int(count_bit_errors(sent, received, mapping))
