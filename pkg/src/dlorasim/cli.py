"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (including a matrix with failed
pairs), 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io as _io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as dio
from .demod import demodulate_packet
from .errors import DomainError, InvalidInputError, InvalidParameterError
from .phy import Channel, ChirpFamily, instantaneous_frequency, make_params, sample_stream
from .sweep import SweepConfig, build_matrix, parse_pairs, run_pair

log = logging.getLogger("dlorasim")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

# flag dest -> SweepConfig field
_SWEEP_FLAGS = {
    "sir_min": "sir_min_db",
    "sir_max": "sir_max_db",
    "sir_step": "sir_step_db",
    "target_ber": "target_ber",
    "min_errors": "min_errors",
    "max_bits": "max_bits",
    "sr": "sr",
    "n_bytes": "n_bytes",
    "cr": "cr",
    "bandwidth": "bandwidth_hz",
    "seed": "seed",
    "confirm_points": "confirm_points",
    "mapping": "mapping",
}


def _add_sweep_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("sweep configuration (overrides --config)")
    g.add_argument("--config", metavar="PATH", help="JSON config file")
    g.add_argument("--sir-min", type=float, metavar="DB")
    g.add_argument("--sir-max", type=float, metavar="DB")
    g.add_argument("--sir-step", type=float, metavar="DB")
    g.add_argument("--target-ber", type=float)
    g.add_argument("--min-errors", type=int)
    g.add_argument("--max-bits", type=int)
    g.add_argument("--sr", type=int, help="sub-chip shift subdivisions")
    g.add_argument("--n-bytes", type=int, help="payload size in bytes")
    g.add_argument("--cr", type=int, choices=(0, 1, 2, 3), help="code rate index, rate 4/(cr+4)")
    g.add_argument("--bandwidth", type=float, metavar="HZ")
    g.add_argument("--seed", type=int)
    g.add_argument("--confirm-points", type=int, metavar="N", help="stop N points after the BER crossing")
    g.add_argument("--full-sweep", action="store_true", help="evaluate every grid point")
    g.add_argument("--mapping", choices=("natural", "gray"), help="symbol-to-bit labelling")


def _sweep_config(args) -> SweepConfig:
    cfg = dio.load_config(args.config) if args.config else SweepConfig()
    overrides = {field: getattr(args, flag) for flag, field in _SWEEP_FLAGS.items() if getattr(args, flag) is not None}
    if args.full_sweep:
        overrides["confirm_points"] = None
    return dataclasses.replace(cfg, **overrides)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_wave(args) -> int:
    channel = Channel(args.sf, ChirpFamily(args.family))
    params = make_params(args.sf, args.bandwidth)
    if not 0 <= args.symbol < params.m:
        raise InvalidParameterError(f"--symbol must be in [0, {params.m - 1}] for SF{args.sf}, got {args.symbol}")
    if args.oversample < 1:
        raise InvalidParameterError("--oversample must be >= 1")
    n = params.m * args.oversample
    times = [k * params.chip_period_s / args.oversample for k in range(n)]
    freqs = [instantaneous_frequency(params, channel.family, args.symbol, t) for t in times]
    if args.format == "json":
        doc = {
            "channel": channel.label,
            "symbol": args.symbol,
            "bandwidth_hz": params.bandwidth_hz,
            "t_s": times,
            "freq_hz": freqs,
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t_s", "freq_hz"))
        w.writerows((repr(t), repr(f)) for t, f in zip(times, freqs))
        text = buf.getvalue()
    _emit(text, args.out)
    if args.iq:
        samples = sample_stream(params, channel.family, [args.symbol], params.m)
        dio.write_iq(args.iq, dio.IqTrace(params.bandwidth_hz, channel, samples, (args.symbol,)))
    return EXIT_OK


def cmd_collide(args) -> int:
    cfg = _sweep_config(args)
    ref, intf = Channel.parse(args.ref), Channel.parse(args.int)
    result = run_pair(ref, intf, cfg)
    if result.error is not None:
        log.error("%s vs %s failed: %s", ref, intf, result.error)
        return EXIT_FAILURE
    curve = result.curve
    if args.format == "json":
        doc = dio.curve_to_dict(curve)
        doc["threshold_db"] = result.threshold_db
        text = json.dumps(doc, indent=1) + "\n"
    else:
        text = dio.curve_to_csv(curve)
    _emit(text, args.out)
    if args.out:
        dio.write_manifest(args.out, dio.make_manifest("collide", args.argv, cfg, [result]))
    shown = "not reached" if result.threshold_db is None else f"{result.threshold_db:g} dB"
    print(f"{ref} vs {intf}: threshold {shown}", file=sys.stderr)
    return EXIT_OK


def cmd_matrix(args) -> int:
    cfg = _sweep_config(args)
    pairs = parse_pairs(args.pairs) if args.pairs else None
    if args.workers < 1:
        raise InvalidParameterError("--workers must be >= 1")
    matrix = build_matrix(cfg, pairs, workers=args.workers)
    json_text = dio.matrix_to_json(matrix)
    csv_text = dio.matrix_to_csv(matrix)
    if args.out is None:
        sys.stdout.write(csv_text if args.format == "csv" else json_text)
    else:
        out = Path(args.out)
        if args.format == "csv":
            out.write_text(csv_text, encoding="utf-8")
            # the JSON mirror carries the per-point counts
            out.with_suffix(".json").write_text(json_text, encoding="utf-8")
        else:
            out.write_text(json_text, encoding="utf-8")
        manifest = dio.make_manifest(
            "matrix", args.argv, cfg, list(matrix.results.values()), {"pairs_requested": args.pairs}
        )
        dio.write_manifest(out, manifest)
    for res in matrix.failed:
        log.error("%s vs %s failed: %s", res.ref, res.interferer, res.error)
    return EXIT_OK if matrix.complete else EXIT_FAILURE


def cmd_demod_iq(args) -> int:
    samples, meta = dio.read_iq(args.iq)
    sf = args.sf if args.sf is not None else meta.get("sf")
    family = args.family or meta.get("family")
    if sf is None or family is None:
        raise InvalidParameterError("--sf and --family are required when the IQ file has no sidecar")
    rate = meta.get("sample_rate_hz", args.bandwidth)
    params = make_params(sf, rate)
    n_chirps = args.n_chirps if args.n_chirps is not None else len(samples) // params.m
    symbols = [int(s) for s in demodulate_packet(samples, params, ChirpFamily(family), n_chirps)]
    if args.format == "json":
        text = json.dumps({"sf": params.sf, "family": family, "symbols": symbols}) + "\n"
    else:
        text = "index,symbol\n" + "".join(f"{i},{s}\n" for i, s in enumerate(symbols))
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlorasim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wave", help="instantaneous-frequency trace of one symbol")
    p.add_argument("--sf", type=int, required=True)
    p.add_argument("--family", choices=[f.value for f in ChirpFamily], default="up")
    p.add_argument("--symbol", type=int, required=True)
    p.add_argument("--bandwidth", type=float, default=125_000.0, metavar="HZ")
    p.add_argument("--oversample", type=int, default=8, help="trace points per chip")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--iq", metavar="PATH", help="also write chip-rate IQ samples (cf32 + JSON sidecar)")
    p.set_defaults(func=cmd_wave)

    p = sub.add_parser("collide", help="BER-vs-SIR curve for one channel pair")
    p.add_argument("--ref", required=True, metavar="CH", help="reference channel, e.g. 7 or 7_D")
    p.add_argument("--int", required=True, metavar="CH", help="interfering channel")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_sweep_options(p)
    p.set_defaults(func=cmd_collide)

    p = sub.add_parser("matrix", help="SIR threshold matrix over channel pairs")
    p.add_argument("--pairs", metavar="LIST", help="comma-separated REF:INT pairs, e.g. 7:7,7:8,7:7_D")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    _add_sweep_options(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("demod-iq", help="demodulate a cf32 IQ file")
    p.add_argument("iq", metavar="PATH")
    p.add_argument("--sf", type=int)
    p.add_argument("--family", choices=[f.value for f in ChirpFamily])
    p.add_argument("--bandwidth", type=float, default=125_000.0, metavar="HZ")
    p.add_argument("--n-chirps", type=int)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_demod_iq)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(
        level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    try:
        return args.func(args)
    except (InvalidParameterError, InvalidInputError, DomainError) as exc:
        print(f"dlorasim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dlorasim {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
