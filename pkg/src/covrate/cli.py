"""Command-line interface.

Subcommands compute rate-distortion quantities, synthesize test channels,
solve the scalar-distortion and relay specializations, evaluate fusion SNR,
allocate distortions across a sensor network, and run the named experiments.

Exit codes: 0 on success, 2 when the request is infeasible (e.g. a distortion
below the conditional-covariance floor or a rate budget below its threshold),
and 1 for any other error, including bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any

from .errors import CovrateError, InfeasibilityError
from .fusion import highrate_allocate, output_snr, scalar_allocate, weighted_sum_rate
from .jsonio import (
    allocation_from_json,
    allocation_to_json,
    dump_json,
    load_json,
    matrix_from_json,
    matrix_to_json,
    model_from_json,
    network_from_json,
    rect_to_json,
)
from .model import analyze
from .rdf import channel_rate, rate_distortion, test_channel
from .simkit import EXPERIMENTS, ExperimentSpec, run_experiment
from .special import mse_rdf, relay_solve

LN2 = math.log(2.0)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1, not 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _clean(value: float) -> float | None:
    """Map non-finite floats to null so the JSON output stays strict."""
    value = float(value)
    return value if math.isfinite(value) else None


def _rate(value: float, bits: bool) -> float | None:
    return _clean(value / LN2 if bits else value)


def _cmd_rdf(args: argparse.Namespace) -> dict[str, Any]:
    stats = analyze(model_from_json(load_json(args.model)))
    rr = rate_distortion(stats, matrix_from_json(load_json(args.distortion)))
    return {
        "rate": _rate(rr.rate, args.bits),
        "units": "bits" if args.bits else "nats",
        "min_matrix": matrix_to_json(rr.min_matrix),
        "error_cov": matrix_to_json(rr.error_cov),
    }


def _cmd_channel(args: argparse.Namespace) -> dict[str, Any]:
    stats = analyze(model_from_json(load_json(args.model)))
    chan = test_channel(stats, matrix_from_json(load_json(args.distortion)))
    return {
        "rate": _rate(channel_rate(stats, chan), args.bits),
        "units": "bits" if args.bits else "nats",
        "n_active": chan.n_active,
        "active": [int(i) for i in chan.active],
        "encoder_map": rect_to_json(chan.encoder_map),
        "noise_cov": matrix_to_json(chan.noise_cov),
    }


def _cmd_mse(args: argparse.Namespace) -> dict[str, Any]:
    stats = analyze(model_from_json(load_json(args.model)))
    res = mse_rdf(stats, args.D)
    return {
        "rate": _rate(res.rate, args.bits),
        "units": "bits" if args.bits else "nats",
        "water_level": res.water_level,
        "d_star": matrix_to_json(res.d_star),
        "residual": res.residual,
    }


def _cmd_relay(args: argparse.Namespace) -> dict[str, Any]:
    stats = analyze(model_from_json(load_json(args.model)))
    res = relay_solve(stats, args.RI)
    return {
        "rate": _rate(res.rate, args.bits),
        "units": "bits" if args.bits else "nats",
        "gamma": res.gamma,
        "mu": [float(m) for m in res.mu],
        "d_star": matrix_to_json(res.d_star),
        "residual": res.residual,
    }


def _cmd_fusion_snr(args: argparse.Namespace) -> dict[str, Any]:
    network = network_from_json(load_json(args.network))
    alloc = allocation_from_json(load_json(args.allocation))
    snr = output_snr(network, alloc)
    return {
        "snr_linear": snr.linear,
        "snr_db": snr.db,
        "weighted_sum_rate": _rate(weighted_sum_rate(network, alloc), args.bits),
        "units": "bits" if args.bits else "nats",
    }


def _cmd_allocate_highrate(args: argparse.Namespace) -> dict[str, Any]:
    network = network_from_json(load_json(args.network))
    res = highrate_allocate(network)
    doc = {
        "allocation": allocation_to_json(res.allocation),
        "achieved_rate": _rate(res.achieved_rate, args.bits),
        "budget": _rate(res.budget, args.bits),
        "units": "bits" if args.bits else "nats",
        "r_min": _rate(res.r_min, args.bits),
        "lambda": res.lambda_mult,
        "snr_db": output_snr(network, res.allocation, validate=False).db,
        "node_valid": list(res.node_valid),
        "valid": res.valid,
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        dump_json(allocation_to_json(res.allocation), out_dir / "allocation.json")
    return doc


def _cmd_allocate_scalar(args: argparse.Namespace) -> dict[str, Any]:
    network = network_from_json(load_json(args.network))
    res = scalar_allocate(network)
    doc = {
        "D1": _clean(res.D1),
        "D2": _clean(res.D2),
        "regime": res.regime,
        "r_max": _rate(res.r_max, args.bits),
        "r_min": _rate(res.r_min, args.bits),
        "units": "bits" if args.bits else "nats",
        "beta": res.beta,
        "stationary_feasible": res.stationary_feasible,
        "stationary_snr_db": _clean(res.stationary_snr_db),
        "best_d1": res.best_d1,
        "best_d2": res.best_d2,
        "best_snr_db": res.best_snr_db,
        "sweep_points": len(res.sweep_d1),
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "scalar_sweep.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d1", "d2", "snr_db"])
            for d1, d2, v in zip(res.sweep_d1, res.sweep_d2, res.sweep_snr_db):
                writer.writerow([repr(float(d1)), repr(float(d2)), repr(float(v))])
        doc["sweep_csv"] = str(path)
    return doc


def _cmd_experiment(args: argparse.Namespace) -> dict[str, Any]:
    spec = ExperimentSpec(name=args.name, seed=args.seed)
    return run_experiment(spec, args.out or ".")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (64-bit)")
    common.add_argument("--out", default=None, help="directory for output files")
    common.add_argument(
        "--bits", action="store_true", help="report rates in bits instead of nats"
    )

    parser = _Parser(prog="covrate", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("rdf", parents=[common], help="rate and optimal error covariance")
    p.add_argument("--model", required=True, help="joint Gaussian model JSON")
    p.add_argument("--distortion", required=True, help="distortion matrix JSON")
    p.set_defaults(func=_cmd_rdf)

    p = sub.add_parser("channel", parents=[common], help="optimal test channel")
    p.add_argument("--model", required=True)
    p.add_argument("--distortion", required=True)
    p.set_defaults(func=_cmd_channel)

    p = sub.add_parser("mse", parents=[common], help="scalar-distortion rate curve point")
    p.add_argument("--model", required=True)
    p.add_argument("--D", type=float, required=True, help="per-coordinate MSE target")
    p.set_defaults(func=_cmd_mse)

    p = sub.add_parser("relay", parents=[common], help="two-hop relay rate point")
    p.add_argument("--model", required=True)
    p.add_argument("--RI", type=float, required=True, help="second-stage rate (nats)")
    p.set_defaults(func=_cmd_relay)

    p = sub.add_parser("fusion-snr", parents=[common], help="fused SNR of an allocation")
    p.add_argument("--network", required=True, help="sensor network JSON")
    p.add_argument("--allocation", required=True, help="distortion allocation JSON")
    p.set_defaults(func=_cmd_fusion_snr)

    p = sub.add_parser(
        "allocate-highrate", parents=[common], help="high-rate optimal allocation"
    )
    p.add_argument("--network", required=True)
    p.set_defaults(func=_cmd_allocate_highrate)

    p = sub.add_parser(
        "allocate-scalar", parents=[common], help="two-node scalar allocation"
    )
    p.add_argument("--network", required=True)
    p.set_defaults(func=_cmd_allocate_scalar)

    p = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    p.add_argument("name", choices=EXPERIMENTS)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        doc = args.func(args)
    except InfeasibilityError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    except (CovrateError, OSError, ValueError, KeyError, TypeError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    print(json.dumps(doc, indent=2, sort_keys=True))
    if getattr(args, "out", None) and args.command not in (
        "experiment",
        "allocate-highrate",
        "allocate-scalar",
    ):
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        dump_json(doc, out_dir / f"{args.command}.json")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
