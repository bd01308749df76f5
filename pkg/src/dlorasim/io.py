"""Config loading and the on-disk formats: CSV, JSON and raw IQ files.

IQ files hold interleaved little-endian float32 ``(re, im)`` pairs with a
JSON sidecar at ``<path>.json`` describing rate and channel.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io as _io
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .collision import BerEstimate
from .errors import InvalidParameterError
from .phy import ALL_CHANNELS, Channel
from .sweep import BerCurve, PairResult, SweepConfig, ThresholdMatrix

MATRIX_FORMAT = "dlorasim.matrix/1"
IQ_FORMAT = "cf32_le"
CURVE_COLUMNS = ("sir_db", "bits", "bit_errors", "ber", "packets", "packet_errors", "per")


def _num(x) -> str:
    # repr is locale independent and round-trips exactly
    return repr(float(x)) if isinstance(x, float) else str(x)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

_CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(SweepConfig))


def config_from_dict(data: dict, base: SweepConfig | None = None) -> SweepConfig:
    if not isinstance(data, dict):
        raise InvalidParameterError("config must be a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise InvalidParameterError(f"unknown config key {unknown[0]!r}; valid keys: {', '.join(_CONFIG_KEYS)}")
    return dataclasses.replace(base or SweepConfig(), **data)


def load_config(path: str | Path) -> SweepConfig:
    """Read a JSON config; missing keys keep their defaults."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return SweepConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# BER curves
# ---------------------------------------------------------------------------


def _estimate_dict(sir: float, est: BerEstimate) -> dict:
    return {
        "sir_db": sir,
        "bits": est.bits_observed,
        "bit_errors": est.bit_errors,
        "ber": est.ber,
        "packets": est.packets_observed,
        "packet_errors": est.packet_errors,
        "per": est.per,
    }


def curve_to_csv(curve: BerCurve) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for sir, est in curve.points:
        row = _estimate_dict(sir, est)
        writer.writerow([_num(row[c]) for c in CURVE_COLUMNS])
    return buf.getvalue()


def curve_to_dict(curve: BerCurve) -> dict:
    return {
        "ref": curve.ref.label,
        "int": curve.interferer.label,
        "partial": curve.partial,
        "points": [_estimate_dict(s, e) for s, e in curve.points],
    }


def curve_from_dict(data: dict) -> BerCurve:
    points = tuple(
        (float(p["sir_db"]), BerEstimate(p["bit_errors"], p["bits"], p["packet_errors"], p["packets"]))
        for p in data["points"]
    )
    return BerCurve(Channel.parse(data["ref"]), Channel.parse(data["int"]), points, bool(data["partial"]))


# ---------------------------------------------------------------------------
# threshold matrix
# ---------------------------------------------------------------------------


def matrix_to_dict(matrix: ThresholdMatrix) -> dict:
    pairs = []
    for (ref, intf), res in sorted(matrix.results.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index)):
        entry = {
            "ref": ref.label,
            "int": intf.label,
            "threshold_db": res.threshold_db,
            "reached": res.reached,
            "error": res.error,
        }
        if res.curve is not None:
            curve = curve_to_dict(res.curve)
            entry["partial"] = curve["partial"]
            entry["points"] = curve["points"]
        pairs.append(entry)
    return {
        "format": MATRIX_FORMAT,
        "labels": [c.label for c in ALL_CHANNELS],
        "config": matrix.config.to_dict(),
        "complete": matrix.complete,
        "thresholds_db": matrix.grid(),
        "pairs": pairs,
    }


def matrix_to_json(matrix: ThresholdMatrix) -> str:
    return json.dumps(matrix_to_dict(matrix), indent=1) + "\n"


def matrix_from_dict(data: dict) -> ThresholdMatrix:
    if data.get("format") != MATRIX_FORMAT:
        raise InvalidParameterError(f"not a {MATRIX_FORMAT} document")
    matrix = ThresholdMatrix(config_from_dict(data["config"]))
    for entry in data["pairs"]:
        ref, intf = Channel.parse(entry["ref"]), Channel.parse(entry["int"])
        curve = None
        if "points" in entry:
            curve = curve_from_dict(entry)
        threshold = entry["threshold_db"]
        matrix.results[(ref, intf)] = PairResult(
            ref, intf, curve, None if threshold is None else float(threshold), entry["error"]
        )
    return matrix


def matrix_from_json(text: str) -> ThresholdMatrix:
    return matrix_from_dict(json.loads(text))


NOT_REACHED = "NR"
FAILED = "ERR"


def matrix_to_csv(matrix: ThresholdMatrix) -> str:
    """12x12 table; blank cells were not requested."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["ref\\int", *(c.label for c in ALL_CHANNELS)])
    for ref in ALL_CHANNELS:
        row = [ref.label]
        for intf in ALL_CHANNELS:
            res = matrix.results.get((ref, intf))
            if res is None:
                row.append("")
            elif res.error is not None:
                row.append(FAILED)
            elif res.threshold_db is None:
                row.append(NOT_REACHED)
            else:
                row.append(f"{res.threshold_db:g}")
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def make_manifest(command: str, argv: Iterable[str], cfg: SweepConfig | None, pairs=(), extra=None) -> dict:
    """Everything needed to rerun a command and get the same numbers."""
    manifest = {
        "tool": "dlorasim",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if cfg is not None:
        manifest["config"] = cfg.to_dict()
        manifest["seed"] = cfg.seed
    counts = []
    for item in pairs:
        curve = item.curve if isinstance(item, PairResult) else item
        points = curve.points if curve is not None else ()
        counts.append(
            {
                "ref": item.ref.label,
                "int": item.interferer.label,
                "trials": sum(e.packets_observed for _, e in points),
                "bits": sum(e.bits_observed for _, e in points),
            }
        )
    manifest["pairs"] = counts
    if extra:
        manifest.update(extra)
    return manifest


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: str | Path, manifest: dict) -> Path:
    path = manifest_path(out)
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# IQ traces
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class IqTrace:
    sample_rate_hz: float
    channel: Channel
    samples: np.ndarray
    symbols: tuple[int, ...] = ()


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_iq(path: str | Path, trace: IqTrace) -> None:
    samples = np.asarray(trace.samples, dtype=np.complex128)
    inter = np.empty(2 * len(samples), dtype="<f4")
    inter[0::2] = samples.real
    inter[1::2] = samples.imag
    Path(path).write_bytes(inter.tobytes())
    meta = {
        "format": IQ_FORMAT,
        "sample_rate_hz": trace.sample_rate_hz,
        "channel": trace.channel.label,
        "sf": trace.channel.sf,
        "family": trace.channel.family.value,
        "n_samples": len(samples),
        "symbols": list(trace.symbols),
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


def read_iq(path: str | Path) -> tuple[np.ndarray, dict]:
    """Samples as complex128 plus the sidecar metadata (empty if absent)."""
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if len(raw) % 2:
        raise InvalidParameterError(f"{path}: odd number of float32 values, not interleaved IQ")
    samples = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    side = sidecar_path(path)
    meta = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    return samples, meta
