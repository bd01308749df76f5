"""Two-packet collisions with a randomly shifted, fully overlapping interferer.

The receiver is locked to the reference packet and samples at the chip
instants ``kT``.  The interfering packet starts ``t_shift`` earlier, with
``t_shift = n_int*T + n_float*T/sr``, so receiver sample ``k`` sees the
interferer at ``kT + t_shift`` on its own timeline.  Both packets have
unit power; the interferer is scaled to set the SIR.

Every trial draws from its own generator seeded by ``(*seed, trial)``,
so an estimate does not depend on how trials are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .demod import demodulate_windows
from .errors import InvalidParameterError
from .framing import (
    BIT_MAPPINGS,
    FrameConfig,
    Packet,
    count_bit_errors,
    interferer_chirp_count,
    random_packet,
    time_on_air_chips,
)
from .phy import DEFAULT_BANDWIDTH_HZ, MAX_SR, Channel, PhyParams, make_params, render_batch, sample_stream

# complex samples rendered per batch
_BATCH_SAMPLES = 1 << 20


@dataclass(frozen=True)
class Shift:
    n_int: int
    n_float: int
    sr: int

    def __post_init__(self):
        if self.sr < 1:
            raise InvalidParameterError(f"sr must be >= 1, got {self.sr}")
        if self.n_int < 0 or not 0 <= self.n_float < self.sr:
            raise InvalidParameterError(f"shift indices out of range: {self}")

    @property
    def offset_ticks(self) -> int:
        """The shift in units of ``T/sr``."""
        return self.n_int * self.sr + self.n_float

    def t_shift(self, params: PhyParams) -> float:
        return self.offset_ticks * params.chip_period_s / self.sr


@dataclass(frozen=True)
class CollisionConfig:
    ref_channel: Channel
    int_channel: Channel
    sir_db: float
    n_bytes: int = 20
    cr: int = 1
    sr: int = 100
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    mapping: str = "natural"
    # overrides the SIR-derived amplitude when set
    interferer_amplitude: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.sir_db):
            raise InvalidParameterError(f"sir_db must be finite, got {self.sir_db}")
        if not 1 <= self.sr <= MAX_SR:
            raise InvalidParameterError(f"sr must be in [1, {MAX_SR}], got {self.sr}")
        if self.mapping not in BIT_MAPPINGS:
            raise InvalidParameterError(f"mapping must be one of {BIT_MAPPINGS}, got {self.mapping!r}")
        if self.interferer_amplitude is not None and not self.interferer_amplitude >= 0:
            raise InvalidParameterError("interferer_amplitude must be >= 0")
        FrameConfig(self.n_bytes, self.cr, self.ref_channel)

    @property
    def ref_params(self) -> PhyParams:
        return make_params(self.ref_channel.sf, self.bandwidth_hz)

    @property
    def int_params(self) -> PhyParams:
        return make_params(self.int_channel.sf, self.bandwidth_hz)

    @property
    def n_ref_chirps(self) -> int:
        return FrameConfig(self.n_bytes, self.cr, self.ref_channel).n_chirps

    @property
    def n_int_chirps(self) -> int:
        toa = time_on_air_chips(self.n_ref_chirps, 1 << self.ref_channel.sf)
        return interferer_chirp_count(toa, 1 << self.int_channel.sf)

    @property
    def bits_per_packet(self) -> int:
        return self.n_ref_chirps * self.ref_channel.sf

    @property
    def amplitude(self) -> float:
        if self.interferer_amplitude is not None:
            return float(self.interferer_amplitude)
        return amplitude_for_sir(self.sir_db)


@dataclass(frozen=True)
class TrialResult:
    bit_errors: int
    bits: int
    packet_error: bool


@dataclass(frozen=True)
class BerEstimate:
    bit_errors: int
    bits_observed: int
    packet_errors: int
    packets_observed: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_observed if self.bits_observed else 0.0

    @property
    def per(self) -> float:
        return self.packet_errors / self.packets_observed if self.packets_observed else 0.0


def amplitude_for_sir(sir_db: float) -> float:
    """Interferer amplitude against a unit-amplitude reference."""
    return 10.0 ** (-sir_db / 20.0)


def draw_shift(rng: np.random.Generator, m_i: int, sr: int) -> Shift:
    if m_i < 2 or sr < 1:
        raise InvalidParameterError(f"need m_i >= 2 and sr >= 1, got m_i={m_i}, sr={sr}")
    n_int = int(rng.integers(0, m_i))
    n_float = int(rng.integers(0, sr))
    return Shift(n_int, n_float, sr)


def interferer_at_receiver(packet: Packet, shift: Shift, params_i: PhyParams, n_samples: int) -> np.ndarray:
    """Interferer samples seen at the receiver instants ``kT``, ``k < n_samples``.

    Evaluates the continuous waveform at ``kT + t_shift`` of the
    interferer timeline.  Raises ``CoverageError`` if the packet ends
    before the last sample.
    """
    return sample_stream(
        params_i,
        packet.channel.family,
        packet.symbols,
        n_samples,
        offset_ticks=shift.offset_ticks,
        sr=shift.sr,
        amplitude=packet.amplitude,
    )


def _draw(cfg: CollisionConfig, rng: np.random.Generator):
    ref = random_packet(rng, cfg.ref_channel, cfg.n_ref_chirps)
    intf = random_packet(rng, cfg.int_channel, cfg.n_int_chirps, cfg.amplitude)
    shift = draw_shift(rng, 1 << cfg.int_channel.sf, cfg.sr)
    return ref, intf, shift


def _simulate(cfg: CollisionConfig, rngs: Sequence[np.random.Generator]) -> np.ndarray:
    """Per-trial bit-error counts for a batch of trials."""
    draws = [_draw(cfg, rng) for rng in rngs]
    batch = len(draws)
    ref_p, int_p = cfg.ref_params, cfg.int_params
    n_ref = cfg.n_ref_chirps
    ref_syms = np.stack([d[0].symbols for d in draws])
    int_syms = np.stack([d[1].symbols for d in draws])
    offsets = np.array([d[2].offset_ticks for d in draws], dtype=np.int64)

    rx = np.zeros((batch, n_ref * ref_p.m), dtype=np.complex128)
    render_batch(ref_p, cfg.ref_channel.family, ref_syms, np.zeros(batch, np.int64), 1, np.ones(batch), rx)
    render_batch(int_p, cfg.int_channel.family, int_syms, offsets, cfg.sr, np.full(batch, cfg.amplitude), rx)
    decided = demodulate_windows(rx.reshape(batch, n_ref, ref_p.m), ref_p, cfg.ref_channel.family)
    return count_bit_errors(ref_syms, decided, cfg.mapping).sum(axis=1)


def trial_rng(seed: int | Sequence[int], trial: int) -> np.random.Generator:
    key = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    return np.random.default_rng([*map(int, key), int(trial)])


def run_collision_trial(cfg: CollisionConfig, rng: np.random.Generator) -> TrialResult:
    errors = _simulate(cfg, [rng])
    e = int(errors[0])
    return TrialResult(e, cfg.bits_per_packet, e > 0)


def estimate_ber(
    cfg: CollisionConfig,
    min_errors: int,
    max_bits: int,
    seed: int | Sequence[int],
) -> BerEstimate:
    """Run whole-packet trials until ``min_errors`` bit errors or ``max_bits`` bits.

    Trial ``i`` uses ``trial_rng(seed, i)``; the result is the same for any
    batching, and bits observed can exceed ``max_bits`` by less than one
    packet.
    """
    if min_errors < 1 or max_bits < 1:
        raise InvalidParameterError("min_errors and max_bits must be >= 1")
    bits_per = cfg.bits_per_packet
    n_samples = cfg.n_ref_chirps * (1 << cfg.ref_channel.sf)
    cap = max(1, _BATCH_SAMPLES // n_samples)
    max_trials = -(-max_bits // bits_per)

    errors = bits = packets = packet_errors = 0
    batch = 1
    while packets < max_trials:
        batch = min(batch, cap, max_trials - packets)
        trial_errors = _simulate(cfg, [trial_rng(seed, packets + i) for i in range(batch)])
        cum = errors + np.cumsum(trial_errors)
        done = np.flatnonzero(cum >= min_errors)
        used = int(done[0]) + 1 if done.size else batch
        errors = int(cum[used - 1])
        packet_errors += int(np.count_nonzero(trial_errors[:used]))
        packets += used
        bits = packets * bits_per
        if done.size:
            break
        batch *= 2
    return BerEstimate(errors, bits, packet_errors, packets)
