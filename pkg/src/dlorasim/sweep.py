"""SIR sweeps, threshold extraction and the 12x12 isolation matrix."""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .collision import BerEstimate, CollisionConfig, estimate_ber
from .errors import InvalidParameterError
from .framing import BIT_MAPPINGS, CR_VALUES
from .phy import ALL_CHANNELS, MAX_SR, Channel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    """Sweep settings; the defaults are the published simulation parameters."""

    sir_min_db: float = -30.0
    sir_max_db: float = 10.0
    sir_step_db: float = 1.0
    target_ber: float = 0.01
    min_errors: int = 100
    max_bits: int = 10_000_000
    sr: int = 100
    n_bytes: int = 20
    cr: int = 1
    bandwidth_hz: float = 125_000.0
    seed: int = 1
    # grid points that must stay below target after a crossing before the
    # scan stops; None evaluates the whole grid
    confirm_points: int | None = 2
    mapping: str = "natural"

    def __post_init__(self):
        def bad(key, why):
            raise InvalidParameterError(f"{key}: {why} (got {getattr(self, key)!r})")

        for key in ("sir_min_db", "sir_max_db", "sir_step_db", "target_ber", "bandwidth_hz"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                bad(key, "must be a finite number")
        for key in ("min_errors", "max_bits", "sr", "n_bytes", "cr", "seed"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                bad(key, "must be an integer")
        if self.sir_step_db <= 0:
            bad("sir_step_db", "must be positive")
        if self.sir_min_db > self.sir_max_db:
            bad("sir_min_db", f"must not exceed sir_max_db={self.sir_max_db}")
        if not 0 < self.target_ber < 1:
            bad("target_ber", "must lie in (0, 1)")
        if self.min_errors < 1:
            bad("min_errors", "must be >= 1")
        if self.max_bits < 1:
            bad("max_bits", "must be >= 1")
        if not 1 <= self.sr <= MAX_SR:
            bad("sr", f"must be in [1, {MAX_SR}]")
        if self.n_bytes < 1:
            bad("n_bytes", "must be >= 1")
        if self.cr not in CR_VALUES:
            bad("cr", f"must be one of {CR_VALUES}")
        if self.bandwidth_hz <= 0:
            bad("bandwidth_hz", "must be positive")
        if self.seed < 0:
            bad("seed", "must be nonnegative")
        if self.confirm_points is not None and (
            isinstance(self.confirm_points, bool) or not isinstance(self.confirm_points, int) or self.confirm_points < 0
        ):
            bad("confirm_points", "must be a nonnegative integer or null")
        if self.mapping not in BIT_MAPPINGS:
            bad("mapping", f"must be one of {BIT_MAPPINGS}")
        n = (self.sir_max_db - self.sir_min_db) / self.sir_step_db
        if abs(n - round(n)) > 1e-9:
            bad("sir_step_db", "must divide the SIR range into whole steps")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def sir_grid(cfg: SweepConfig) -> np.ndarray:
    """Inclusive arithmetic progression from ``sir_min_db`` to ``sir_max_db``."""
    n = int(round((cfg.sir_max_db - cfg.sir_min_db) / cfg.sir_step_db))
    # rounding keeps e.g. -30 + 7*0.1 from printing as -29.299999999999997
    return np.round(cfg.sir_min_db + cfg.sir_step_db * np.arange(n + 1), 9)


@dataclass(frozen=True)
class BerCurve:
    ref: Channel
    interferer: Channel
    points: tuple[tuple[float, BerEstimate], ...]
    # True when the scan stopped before the top of the grid
    partial: bool = False

    @property
    def sir_db(self) -> list[float]:
        return [s for s, _ in self.points]

    @property
    def ber(self) -> list[float]:
        return [e.ber for _, e in self.points]


def threshold_from_curve(curve: BerCurve, target_ber: float) -> float | None:
    """Lowest SIR from which every evaluated point meets the target, else None."""
    if not curve.points:
        raise InvalidParameterError("empty BER curve")
    threshold = None
    for sir, est in reversed(curve.points):
        if est.ber > target_ber:
            break
        threshold = sir
    return threshold


def pair_seed(cfg: SweepConfig, ref: Channel, interferer: Channel) -> tuple[int, int, int]:
    return (cfg.seed, ref.index, interferer.index)


def collision_config(cfg: SweepConfig, ref: Channel, interferer: Channel, sir_db: float) -> CollisionConfig:
    return CollisionConfig(
        ref, interferer, float(sir_db), cfg.n_bytes, cfg.cr, cfg.sr, cfg.bandwidth_hz, cfg.mapping
    )


def sweep_pair(ref: Channel, interferer: Channel, cfg: SweepConfig) -> BerCurve:
    """Scan the SIR grid upward for one (reference, interferer) pair.

    All grid points reuse the same trial streams, so the packets and shifts
    differ only in interferer power from one point to the next.
    """
    seed = pair_seed(cfg, ref, interferer)
    grid = sir_grid(cfg)
    points = []
    run = 0  # consecutive points at or below target
    for sir in grid:
        est = estimate_ber(collision_config(cfg, ref, interferer, sir), cfg.min_errors, cfg.max_bits, seed)
        points.append((float(sir), est))
        log.debug("%s vs %s  SIR %+.1f dB  BER %.3g (%d bits)", ref, interferer, sir, est.ber, est.bits_observed)
        run = run + 1 if est.ber <= cfg.target_ber else 0
        if cfg.confirm_points is not None and run > cfg.confirm_points:
            break
    return BerCurve(ref, interferer, tuple(points), partial=len(points) < len(grid))


@dataclass(frozen=True)
class PairResult:
    ref: Channel
    interferer: Channel
    curve: BerCurve | None
    threshold_db: float | None
    error: str | None = None

    @property
    def reached(self) -> bool:
        return self.threshold_db is not None


@dataclass
class ThresholdMatrix:
    """Thresholds for any subset of the 144 channel pairs.

    Rows are reference channels and columns interferers, both in
    ``ALL_CHANNELS`` order.  Pairs that were not requested are absent;
    ``threshold_db`` of None on a present pair means the target BER was
    never reached on the grid.
    """

    config: SweepConfig
    results: dict[tuple[Channel, Channel], PairResult] = field(default_factory=dict)

    def __getitem__(self, pair: tuple[Channel, Channel]) -> PairResult:
        return self.results[pair]

    def threshold(self, ref: Channel | str, interferer: Channel | str) -> float | None:
        ref = Channel.parse(ref) if isinstance(ref, str) else ref
        interferer = Channel.parse(interferer) if isinstance(interferer, str) else interferer
        return self.results[(ref, interferer)].threshold_db

    @property
    def failed(self) -> list[PairResult]:
        return [r for r in self.results.values() if r.error is not None]

    @property
    def complete(self) -> bool:
        return not self.failed

    def grid(self) -> list[list[float | None]]:
        return [
            [self.results[(r, i)].threshold_db if (r, i) in self.results else None for i in ALL_CHANNELS]
            for r in ALL_CHANNELS
        ]


def all_pairs() -> list[tuple[Channel, Channel]]:
    return [(r, i) for r in ALL_CHANNELS for i in ALL_CHANNELS]


def parse_pairs(text: str) -> list[tuple[Channel, Channel]]:
    """Parse ``"7:7,7:8,7:7_D"`` into channel pairs."""
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        ref, sep, interferer = item.partition(":")
        if not sep:
            raise InvalidParameterError(f"bad pair {item!r}; expected REF:INT such as 7:8_D")
        pair = (Channel.parse(ref), Channel.parse(interferer))
        if pair not in pairs:
            pairs.append(pair)
    if not pairs:
        raise InvalidParameterError("empty pair list")
    return pairs


def run_pair(ref: Channel, interferer: Channel, cfg: SweepConfig) -> PairResult:
    """Sweep one pair, capturing any failure instead of raising."""
    try:
        curve = sweep_pair(ref, interferer, cfg)
    except Exception as exc:  # isolate one bad pair from the rest of the matrix
        log.exception("pair %s vs %s failed", ref, interferer)
        return PairResult(ref, interferer, None, None, f"{type(exc).__name__}: {exc}")
    return PairResult(ref, interferer, curve, threshold_from_curve(curve, cfg.target_ber))


def _run_pair_job(job):
    return run_pair(*job)


def build_matrix(
    cfg: SweepConfig,
    pairs: Iterable[tuple[Channel, Channel]] | None = None,
    workers: int = 1,
) -> ThresholdMatrix:
    """Sweep every requested pair (all 144 by default).

    Each pair is seeded from ``(seed, ref index, interferer index)``, so the
    result does not depend on ``workers``.
    """
    pairs = list(all_pairs() if pairs is None else pairs)
    jobs = [(r, i, cfg) for r, i in pairs]
    if workers <= 1 or len(jobs) <= 1:
        results: Sequence[PairResult] = [_run_pair_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_pair_job, jobs))
    matrix = ThresholdMatrix(cfg)
    for res in results:
        matrix.results[(res.ref, res.interferer)] = res
    return matrix
