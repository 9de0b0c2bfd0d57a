"""Command-line entry point: ``l1fde {solve,convergence,table,ml-eval,diagnostics}``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings

import numpy as np

from l1fde import kernelcheck
from l1fde.experiments import (
    TABLE_TITLES,
    ExperimentConfig,
    ExperimentError,
    _initial,
    _operator,
    config_with_overrides,
    emit,
    load_config,
    reproduce_table,
    run_experiment,
)
from l1fde.fem1d import discretize
from l1fde.l1stepper import TimeGrid, l1_weights, march
from l1fde.specfun import MLParams, mittag_leffler


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _angle(text: str) -> float:
    """Radians, or a multiple of pi written like ``0.51pi``."""
    text = text.strip().lower()
    if text.endswith("pi"):
        return float(text[:-2] or 1.0) * math.pi
    return float(text)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with experiment settings; flags override it")
    p.add_argument("--problem", choices=["subdiffusion", "space_time_fractional"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--ic", help="sin2pix, xnegquarter, indicator_half or xoneminusx")
    p.add_argument("--t", type=_floats, help="target time(s), comma or space separated")
    p.add_argument("--M", type=int, help="number of subintervals")
    p.add_argument("--N", type=_ints, help="number(s) of time steps")
    p.add_argument("--projection", choices=["auto", "l2", "ritz"])
    p.add_argument("--normalization", choices=["raw", "normalized"])
    p.add_argument("--reference", choices=["auto", "eigen_expansion", "self_reference"])
    p.add_argument("--N-ref", dest="N_ref", type=int)
    p.add_argument("--K", type=int, help="modes kept in the eigenfunction expansion")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--output", "-o", help="output file (default: standard output)")


def _config(args) -> ExperimentConfig:
    base = load_config(args.config) if args.config else {}
    keys = ("problem", "alpha", "beta", "ic", "t", "M", "N", "projection",
            "normalization", "reference", "N_ref", "K")
    return config_with_overrides(base, **{k: getattr(args, k) for k in keys})


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> None:
    config = _config(args)
    if len(config.t) != 1 or len(config.N) != 1:
        raise ValueError("solve takes a single t and a single N")
    disc = discretize(config.M, _operator(config))
    v_h = _initial(disc, config)
    t, N = config.t[0], config.N[0]
    hist = march(disc, l1_weights(config.alpha, N), v_h, TimeGrid(t, N))
    x = disc.mesh.nodes
    u = np.concatenate([[0.0], hist.final, [0.0]])
    lines = ["x,u"] + [f"{xi:.9g},{ui:.9g}" for xi, ui in zip(x, u)]
    _write("\n".join(lines) + "\n", args.output)


def cmd_convergence(args) -> None:
    config = _config(args)
    report = run_experiment(config)
    text = emit([report], args.format, normalization=config.normalization)
    _write(text, args.output)


def cmd_table(args) -> None:
    reports = reproduce_table(args.id, args.scale)
    kwargs = {"title": f"Table {args.id}: {TABLE_TITLES[args.id]}"} if args.format == "markdown" else {}
    _write(emit(reports, args.format, **kwargs), args.output)


def cmd_ml_eval(args) -> None:
    params = MLParams(args.alpha, args.beta)
    args.z = [z for chunk in args.z for z in chunk]
    values = np.atleast_1d(mittag_leffler(params, np.asarray(args.z), method=args.method))
    lines = ["z,value"] + [f"{z:.17g},{v:.17g}" for z, v in zip(args.z, values)]
    _write("\n".join(lines) + "\n", args.output)


def cmd_diagnostics(args) -> None:
    taus = args.tau_list
    sweep = kernelcheck.tau_sweep(
        args.alpha, args.theta, taus, delta=args.delta, samples=args.samples
    )
    buf = []
    w = csv.writer(_Lines(buf), lineterminator="")
    w.writerow([
        "tau", "chi1_ratio_max", "psi_re_min", "psi_abs_min", "chi_ratio_min",
        "chi_ray_ratio_min", "chi1_arg_max", "kernel_ratio_max",
    ])
    for tau, (lem, ker) in zip(taus, sweep):
        w.writerow(["%.9g" % x for x in (
            tau, lem.chi1_ratio_max, lem.psi_re_min, lem.psi_abs_min, lem.chi_ratio_min,
            lem.chi_ray_ratio_min, lem.chi1_arg_max, ker.ratio_max,
        )])
    text = "\n".join(buf) + "\n"
    summary = {
        "alpha": args.alpha,
        "theta": args.theta,
        "chi1_ratio_drift": kernelcheck.drift([lem.chi1_ratio_max for lem, _ in sweep]),
        "kernel_ratio_drift": kernelcheck.drift([ker.ratio_max for _, ker in sweep]),
    }
    text += "# " + json.dumps(summary) + "\n"
    _write(text, args.output)


class _Lines:
    def __init__(self, buf: list[str]) -> None:
        self.buf = buf

    def write(self, s: str) -> None:
        self.buf.append(s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1fde",
        description="L1 time stepping with P1 finite elements for fractional diffusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single run; prints nodal values at the target time")
    _add_config_flags(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="error sweep for one configuration")
    _add_config_flags(p)
    _output_flags(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("table", help="reproduce one of the preset tables 1-6")
    p.add_argument("--id", type=int, required=True, choices=range(1, 7))
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    _output_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--z", type=_floats, nargs="+", required=True,
                   help="arguments, e.g. --z -1 0 or --z=-1,0")
    p.add_argument("--method", choices=["series", "integral", "asymptotic"])
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_ml_eval)

    p = sub.add_parser("diagnostics", help="scan the discrete symbols over the contour")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta", type=_angle, default=0.51 * math.pi, help="radians or e.g. 0.51pi")
    p.add_argument("--tau-list", dest="tau_list", type=_floats, required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_diagnostics)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        try:
            args.func(args)
        except ExperimentError as exc:
            print(json.dumps(exc.summary()), file=sys.stderr)
            return 1
        except (ValueError, ArithmeticError, OSError) as exc:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
            return 1
    for w in {str(w.message) for w in caught}:
        print(f"warning: {w}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
