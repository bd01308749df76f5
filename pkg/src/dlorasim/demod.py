"""Noncoherent dechirp + DFT demodulation.

Multiplying a symbol window by the conjugate symbol-zero chirp of the same
family turns symbol ``a`` into a tone at ``a/M`` cycles per chip, so the
symbol is the index of the largest DFT magnitude.  The same receiver
serves both families; only the reference chirp changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .phy import ChirpFamily, PhyParams, base_chirp


@dataclass(frozen=True)
class DemodResult:
    symbol: int
    magnitudes: np.ndarray


def _as_window(window, params: PhyParams) -> np.ndarray:
    window = np.asarray(window, dtype=np.complex128)
    if window.shape[-1:] != (params.m,):
        raise InvalidInputError(f"window length {window.shape[-1] if window.ndim else 0} != M={params.m}")
    return window


def dechirp(window, params: PhyParams, family: ChirpFamily) -> np.ndarray:
    """Multiply by the conjugate base chirp; works on ``(..., M)`` arrays."""
    window = _as_window(window, params)
    return window * np.conj(base_chirp(params, family))


def dft_magnitudes(samples) -> np.ndarray:
    """``|DFT|`` along the last axis, whose length must be a power of two."""
    samples = np.asarray(samples, dtype=np.complex128)
    n = samples.shape[-1] if samples.ndim else 0
    if n < 1 or n & (n - 1):
        raise InvalidInputError(f"DFT length must be a power of two, got {n}")
    return np.abs(np.fft.fft(samples, axis=-1))


def demodulate_symbol(window, params: PhyParams, family: ChirpFamily) -> DemodResult:
    mags = dft_magnitudes(dechirp(window, params, family))
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return DemodResult(int(np.argmax(mags)), mags)


def demodulate_windows(windows: np.ndarray, params: PhyParams, family: ChirpFamily) -> np.ndarray:
    """Hard decisions for an ``(..., M)`` stack of symbol windows."""
    bins = np.fft.fft(dechirp(windows, params, family), axis=-1)
    power = bins.real**2 + bins.imag**2
    return np.argmax(power, axis=-1)


def demodulate_packet(samples, params: PhyParams, family: ChirpFamily, n_chirps: int) -> np.ndarray:
    """Symbol ``i`` is decided from samples ``[i*M, (i+1)*M)``."""
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if n_chirps < 0:
        raise InvalidInputError(f"n_chirps must be nonnegative, got {n_chirps}")
    need = n_chirps * params.m
    if len(samples) < need:
        raise InvalidInputError(f"{len(samples)} samples cannot hold {n_chirps} symbols of {params.m} chips")
    if n_chirps == 0:
        return np.zeros(0, dtype=np.int64)
    return demodulate_windows(samples[:need].reshape(n_chirps, params.m), params, family)
