"""LoRa (up-chirp) and DLoRa (down-chirp) waveform generation.

Symbols are evaluated on a per-symbol local time ``t`` in ``[0, T_s)``.
The up-chirp of symbol ``a`` starts at frequency ``B(a/M - 1/2)`` and
rises with slope ``B**2/M``, folding down by ``B`` once it reaches the
upper band edge at ``t = (M - a)/B``.  The down-chirp starts at the same
frequency, falls with the opposite slope and folds up by ``B`` after it
crosses the lower band edge at ``t = a/B``.  Phase is the integral of the
instantaneous frequency with zero initial phase.

Two evaluation routes are provided:

* :func:`chirp_value` evaluates a single complex sample at an arbitrary
  real time with plain floating point arithmetic.
* :func:`chirp_samples` and :func:`sample_stream` work on a grid of
  ``1/sr`` of a chip and compute the phase with exact integer arithmetic;
  :func:`sample_stream` is the compiled path used by the collision engine.
"""

from __future__ import annotations

import cmath
import enum
import functools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import CoverageError, DomainError, InvalidInputError, InvalidParameterError

SF_VALUES = (7, 8, 9, 10, 11, 12)
DEFAULT_BANDWIDTH_HZ = 125_000.0

# Largest sub-chip subdivision for which the integer phase numerator stays
# below 2**53 at SF12.
MAX_SR = 10_000

_LO_BITS = 12
_LO_MASK = (1 << _LO_BITS) - 1


class ChirpFamily(str, enum.Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        return 1 if self is ChirpFamily.UP else -1


@dataclass(frozen=True)
class PhyParams:
    sf: int
    bandwidth_hz: float
    m: int
    chip_period_s: float
    symbol_period_s: float


def make_params(sf: int, bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ) -> PhyParams:
    """Build the numerology of one spreading factor."""
    if isinstance(sf, bool) or int(sf) != sf or sf not in SF_VALUES:
        raise InvalidParameterError(f"sf must be one of {SF_VALUES}, got {sf!r}")
    if not bandwidth_hz > 0 or not math.isfinite(bandwidth_hz):
        raise InvalidParameterError(f"bandwidth_hz must be positive, got {bandwidth_hz!r}")
    sf = int(sf)
    m = 1 << sf
    chip = 1.0 / bandwidth_hz
    return PhyParams(sf, float(bandwidth_hz), m, chip, m * chip)


@dataclass(frozen=True)
class Channel:
    """One logical channel: a spreading factor and a chirp direction."""

    sf: int
    family: ChirpFamily

    def __post_init__(self):
        if self.sf not in SF_VALUES:
            raise InvalidParameterError(f"sf must be one of {SF_VALUES}, got {self.sf!r}")
        object.__setattr__(self, "family", ChirpFamily(self.family))

    @property
    def label(self) -> str:
        return f"{self.sf}_D" if self.family is ChirpFamily.DOWN else str(self.sf)

    @property
    def index(self) -> int:
        return ALL_CHANNELS.index(self)

    @classmethod
    def parse(cls, label: str) -> "Channel":
        text = label.strip()
        family = ChirpFamily.UP
        if text.upper().endswith("_D"):
            family = ChirpFamily.DOWN
            text = text[:-2]
        try:
            sf = int(text)
        except ValueError:
            raise InvalidParameterError(f"bad channel label {label!r}; expected e.g. '7' or '7_D'") from None
        return cls(sf, family)

    def params(self, bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ) -> PhyParams:
        return make_params(self.sf, bandwidth_hz)

    def __str__(self):
        return self.label


# Row/column order of the isolation matrix.
ALL_CHANNELS = tuple(Channel(sf, ChirpFamily.UP) for sf in SF_VALUES) + tuple(
    Channel(sf, ChirpFamily.DOWN) for sf in SF_VALUES
)


def _check_symbol(params: PhyParams, a: int) -> int:
    if isinstance(a, bool) or int(a) != a or not 0 <= a < params.m:
        raise InvalidParameterError(f"symbol must be in [0, {params.m - 1}] for SF{params.sf}, got {a!r}")
    return int(a)


def _check_time(params: PhyParams, t: float) -> float:
    if not 0.0 <= t < params.symbol_period_s:
        raise DomainError(f"t={t!r} s is outside the symbol window [0, {params.symbol_period_s!r})")
    return float(t)


def instantaneous_frequency(params: PhyParams, family: ChirpFamily, a: int, t: float) -> float:
    """Instantaneous frequency in Hz, always inside ``[-B/2, B/2)``."""
    family = ChirpFamily(family)
    a = _check_symbol(params, a)
    t = _check_time(params, t)
    b, m = params.bandwidth_hz, params.m
    u = b * t
    if family is ChirpFamily.UP:
        f = b * (a / m - 0.5) + b * u / m
        if u >= m - a:
            f -= b
    else:
        f = b * (a / m - 0.5) - b * u / m
        # strict: at u == a the ramp sits exactly on -B/2
        if u > a:
            f += b
    return f


def chirp_value(params: PhyParams, family: ChirpFamily, a: int, t: float, *, fold: bool = True) -> complex:
    """Complex envelope of symbol ``a`` at local time ``t`` seconds.

    ``fold=False`` drops the band-edge fold term; the result then differs
    from the folded waveform except at integer chip instants.
    """
    family = ChirpFamily(family)
    a = _check_symbol(params, a)
    t = _check_time(params, t)
    m = params.m
    u = params.bandwidth_hz * t  # chips
    sign = family.sign
    cycles = u * (a / m - 0.5 + sign * u / (2 * m))
    if fold:
        if family is ChirpFamily.UP and u >= m - a:
            cycles -= u - (m - a)
        elif family is ChirpFamily.DOWN and u > a:
            cycles += u - a
    cycles -= math.floor(cycles)
    return cmath.exp(2j * math.pi * cycles)


def chirp_samples(params: PhyParams, family: ChirpFamily, a: int, *, fold: bool = True) -> np.ndarray:
    """The ``M`` chip-rate samples of one symbol, ``x[n] = x(nT; a)``."""
    family = ChirpFamily(family)
    a = _check_symbol(params, a)
    m = params.m
    n = np.arange(m, dtype=np.int64)
    # phase in units of 1/(2M) cycles
    num = 2 * n * a - n * m + family.sign * n * n
    if fold:
        if family is ChirpFamily.UP:
            num -= np.where(n >= m - a, (n - (m - a)) * 2 * m, 0)
        else:
            num += np.where(n > a, (n - a) * 2 * m, 0)
    num %= 2 * m
    return np.exp((2j * np.pi / (2 * m)) * num)


def base_chirp(params: PhyParams, family: ChirpFamily) -> np.ndarray:
    """Symbol-zero reference chirp used for dechirping."""
    return _base_chirp(params.sf, ChirpFamily(family))


@functools.lru_cache(maxsize=None)
def _base_chirp(sf: int, family: ChirpFamily) -> np.ndarray:
    out = chirp_samples(make_params(sf), family, 0)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=32)
def _phase_tables(m: int, sr: int) -> tuple[np.ndarray, np.ndarray]:
    # exp(2j*pi*r/D) == hi[r >> 12] * lo[r & 4095]
    d = 2 * m * sr * sr
    hi = np.exp((2j * np.pi / d) * (np.arange((d >> _LO_BITS) + 1, dtype=np.float64) * (1 << _LO_BITS)))
    lo = np.exp((2j * np.pi / d) * np.arange(1 << _LO_BITS, dtype=np.float64))
    return hi, lo


@numba.njit(cache=True, nogil=True)
def _render(symbols, offsets, m, sr, sign, amplitudes, hi, lo, out):
    """Accumulate ``amplitude * x(t)`` into ``out`` for a batch of streams.

    Row ``b`` of ``out`` receives samples at times ``(k*sr + offsets[b])``
    in units of ``T/sr`` measured from the start of ``symbols[b, 0]``.
    """
    span = m * sr
    d = 2 * m * sr * sr
    inv_d = 1.0 / d
    two_m_sr = 2 * m * sr
    for b in range(out.shape[0]):
        amp = amplitudes[b]
        if amp == 0.0:
            continue
        j = offsets[b] // span
        q = offsets[b] - j * span
        a = symbols[b, j]
        up_fold = (m - a) * sr
        down_fold = a * sr
        for k in range(out.shape[1]):
            num = 2 * q * a * sr - q * m * sr + sign * q * q
            if sign > 0:
                if q >= up_fold:
                    num -= (q - up_fold) * two_m_sr
            elif q > down_fold:
                num += (q - down_fold) * two_m_sr
            r = num - np.int64(math.floor(num * inv_d)) * d
            if r < 0:
                r += d
            elif r >= d:
                r -= d
            out[b, k] += amp * hi[r >> 12] * lo[r & 4095]
            q += sr
            if q >= span:
                q -= span
                j += 1
                if j < symbols.shape[1]:
                    a = symbols[b, j]
                    up_fold = (m - a) * sr
                    down_fold = a * sr


def render_batch(
    params: PhyParams,
    family: ChirpFamily,
    symbols: np.ndarray,
    offsets: np.ndarray,
    sr: int,
    amplitudes: np.ndarray,
    out: np.ndarray,
) -> np.ndarray:
    """Add ``len(out)`` sampled symbol streams into ``out`` in place.

    ``symbols`` has shape ``(batch, n_symbols)``; ``offsets`` gives, per
    row, the sampling start in ticks of ``T/sr`` from the first symbol.
    Raises :class:`CoverageError` if a sample would fall past the end of
    a stream.
    """
    family = ChirpFamily(family)
    if not 1 <= sr <= MAX_SR:
        raise InvalidParameterError(f"sr must be in [1, {MAX_SR}], got {sr!r}")
    symbols = np.ascontiguousarray(symbols, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    amplitudes = np.ascontiguousarray(amplitudes, dtype=np.float64)
    if symbols.ndim != 2 or out.ndim != 2 or not (len(symbols) == len(offsets) == len(amplitudes) == len(out)):
        raise InvalidInputError("symbols, offsets, amplitudes and out must agree on the batch axis")
    if out.dtype != np.complex128:
        raise InvalidInputError("out must be complex128")
    if symbols.size and (symbols.min() < 0 or symbols.max() >= params.m):
        raise InvalidParameterError(f"symbols must be in [0, {params.m - 1}]")
    n_samples = out.shape[1]
    if len(out) and n_samples:
        if offsets.min() < 0:
            raise CoverageError("negative sampling offset starts before the stream")
        last_tick = (n_samples - 1) * sr + int(offsets.max())
        if last_tick // (params.m * sr) >= symbols.shape[1]:
            raise CoverageError(
                f"stream of {symbols.shape[1]} symbols does not cover {n_samples} samples at offset {int(offsets.max())}"
            )
    hi, lo = _phase_tables(params.m, int(sr))
    _render(symbols, offsets, params.m, int(sr), family.sign, amplitudes, hi, lo, out)
    return out


def sample_stream(
    params: PhyParams,
    family: ChirpFamily,
    symbols,
    n_samples: int,
    *,
    offset_ticks: int = 0,
    sr: int = 1,
    amplitude: float = 1.0,
) -> np.ndarray:
    """Sample a back-to-back symbol stream at the receiver chip instants.

    Sample ``k`` is taken at ``k*T + offset_ticks*T/sr`` after the start
    of the first symbol.
    """
    symbols = np.asarray(symbols, dtype=np.int64).reshape(1, -1)
    out = np.zeros((1, n_samples), dtype=np.complex128)
    render_batch(params, family, symbols, np.array([offset_ticks]), sr, np.array([amplitude]), out)
    return out[0]
