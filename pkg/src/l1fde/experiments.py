"""Convergence experiments, the preset tables and report output.

An :class:`ExperimentConfig` describes one row of a convergence table: a
problem, its orders, the initial data, and a sweep over either the number
of time steps ``N`` (fixed ``t``) or the target time ``t`` (fixed ``N``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import IO

import numpy as np

from l1fde.fem1d import (
    Laplacian,
    RiemannLiouville,
    SpatialDiscretization,
    discretize,
    l2_norm,
    l2_project,
    ritz_project,
)
from l1fde.initial_data import InitialDataSpec
from l1fde.l1stepper import TimeGrid, l1_weights, march
from l1fde.reference import (
    ConvergenceReport,
    EigenExpansion,
    default_truncation,
    error_at,
    exact_nodal,
    self_reference,
)

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "ExperimentError",
    "emit",
    "format_csv",
    "format_markdown",
    "parse_csv",
    "reproduce_table",
    "run_experiment",
    "run_experiments",
    "table_configs",
    "worker_count",
]

PROBLEMS = ("subdiffusion", "space_time_fractional")
CSV_COLUMNS = (
    "problem", "alpha", "beta", "ic", "t", "M", "N", "error_raw", "error_normalized", "rate",
)
WORKERS_ENV = "L1FDE_WORKERS"
SELF_REFERENCE_FACTOR = 32


class ExperimentError(RuntimeError):
    """A run failed; carries the offending configuration and step count."""

    def __init__(self, message: str, config: ExperimentConfig, N: int | None = None) -> None:
        super().__init__(message)
        self.config = config
        self.N = N

    def summary(self) -> dict:
        return {
            "error": type(self.__cause__ or self).__name__,
            "message": str(self),
            "N": self.N,
            "config": self.config.to_dict(),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "subdiffusion"
    alpha: float = 0.5
    beta: float | None = None
    ic: str = "sin2pix"
    t: tuple[float, ...] = (0.1,)
    M: int = 2048
    N: tuple[int, ...] = (10, 20, 40, 80, 160, 320)
    projection: str = "auto"
    normalization: str = "normalized"
    reference: str = "auto"
    N_ref: int | None = None
    K: int | None = None

    def __post_init__(self) -> None:
        set_ = object.__setattr__
        set_(self, "t", _as_tuple(self.t, float))
        set_(self, "N", _as_tuple(self.N, int))
        set_(self, "ic", InitialDataSpec.parse(self.ic).value)
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}: got {self.problem!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1]: got {self.alpha}")
        if self.problem == "space_time_fractional":
            if self.beta is None:
                raise ValueError("space_time_fractional requires beta")
            RiemannLiouville(self.beta)  # range check and warning
        elif self.beta is not None:
            raise ValueError("beta applies only to space_time_fractional")
        if len(self.t) > 1 and len(self.N) > 1:
            raise ValueError("sweep either t or N, not both")
        if any(n2 <= n1 for n1, n2 in zip(self.N, self.N[1:])):
            raise ValueError(f"N must be strictly increasing: got {self.N}")
        if any(t2 >= t1 for t1, t2 in zip(self.t, self.t[1:])):
            raise ValueError(f"t must be strictly decreasing: got {self.t}")
        if any(not t > 0 for t in self.t) or any(n < 1 for n in self.N):
            raise ValueError("t and N must be positive")
        if self.projection not in ("auto", "l2", "ritz"):
            raise ValueError(f"projection must be auto, l2 or ritz: got {self.projection!r}")
        if self.normalization not in ("raw", "normalized"):
            raise ValueError(f"normalization must be raw or normalized: got {self.normalization!r}")
        if self.reference not in ("auto", "eigen_expansion", "self_reference"):
            raise ValueError(f"unknown reference {self.reference!r}")
        if self.reference == "eigen_expansion" and self.problem != "subdiffusion":
            raise ValueError("the eigen-expansion reference exists only for subdiffusion")

    @property
    def spec(self) -> InitialDataSpec:
        return InitialDataSpec(self.ic)

    @property
    def resolved_projection(self) -> str:
        if self.projection != "auto":
            return self.projection
        # Ritz for data in the operator's domain, L2 otherwise
        if self.problem == "subdiffusion":
            return "ritz" if self.spec.is_smooth else "l2"
        return "ritz" if self.spec is InitialDataSpec.SIN2PIX else "l2"

    @property
    def resolved_reference(self) -> str:
        if self.reference != "auto":
            return self.reference
        return "eigen_expansion" if self.problem == "subdiffusion" else "self_reference"

    @property
    def resolved_N_ref(self) -> int:
        return self.N_ref or SELF_REFERENCE_FACTOR * max(self.N)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t"] = list(self.t)
        d["N"] = list(self.N)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _as_tuple(x, kind) -> tuple:
    if isinstance(x, (str, bytes)) or not isinstance(x, Iterable):
        return (kind(x),)
    return tuple(kind(v) for v in x)


# {{{ running


def _operator(config: ExperimentConfig):
    if config.problem == "subdiffusion":
        return Laplacian()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return RiemannLiouville(config.beta)


def _initial(disc: SpatialDiscretization, config: ExperimentConfig) -> np.ndarray:
    if config.resolved_projection == "ritz":
        return ritz_project(disc, config.spec)
    return l2_project(disc, config.spec)


def _growth(disc: SpatialDiscretization, levels: np.ndarray) -> float:
    mass_levels = (disc.mass @ levels.T).T
    norms = np.sqrt(np.maximum(np.sum(levels * mass_levels, axis=1), 0.0))
    return float(norms.max() / norms[0]) if norms[0] > 0 else 1.0


def run_experiment(config: ExperimentConfig) -> ConvergenceReport:
    """Run every ``(t, N)`` of the sweep and collect errors against the reference."""
    disc = discretize(config.M, _operator(config))
    v = config.spec
    norm_v = v.l2_norm
    notes: list[str] = []
    if config.beta is not None and config.beta < 1.5:
        notes.append(f"beta = {config.beta} lies outside the range covered by the error theory")

    try:
        v_h = _initial(disc, config)
    except Exception as exc:
        raise ExperimentError(f"initial projection failed: {exc}", config) from exc

    reference = config.resolved_reference
    if reference == "eigen_expansion":
        K = config.K or default_truncation(v, config.M)
        expansion = EigenExpansion.build(v, config.alpha, K)
        notes.append(f"reference: eigenfunction expansion with K = {K} modes")
    else:
        notes.append(
            f"reference: L1 solution with N_ref = {config.resolved_N_ref} steps on the same mesh"
        )

    rows_t, rows_N, raw, growth = [], [], [], 1.0
    for t in config.t:
        if reference == "eigen_expansion":
            exact = exact_nodal(expansion, t, config.M)
        else:
            try:
                exact = self_reference(disc, config.alpha, v_h, t, config.resolved_N_ref)
            except Exception as exc:
                raise ExperimentError(
                    f"self-reference failed: {exc}", config, config.resolved_N_ref
                ) from exc
        for N in config.N:
            try:
                hist = march(disc, l1_weights(config.alpha, N), v_h, TimeGrid(t, N))
            except Exception as exc:
                raise ExperimentError(f"march failed: {exc}", config, N) from exc
            rows_t.append(t)
            rows_N.append(N)
            raw.append(error_at(disc, hist.final, exact))
            growth = max(growth, _growth(disc, hist.levels))

    return ConvergenceReport(
        problem=config.problem,
        alpha=config.alpha,
        beta=config.beta,
        ic=config.ic,
        t=rows_t,
        M=[config.M] * len(raw),
        N=rows_N,
        errors_raw=raw,
        errors_normalized=[e / norm_v for e in raw],
        notes=notes,
        max_growth=growth,
    )


def worker_count() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return 1
    try:
        n = int(value)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer: got {value!r}") from exc
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer: got {value!r}")
    return n


def run_experiments(
    configs: Sequence[ExperimentConfig], workers: int | None = None
) -> list[ConvergenceReport]:
    """Run several configs; results come back in the order of ``configs``."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(configs) <= 1:
        return [run_experiment(c) for c in configs]
    with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
        return list(pool.map(run_experiment, configs))


# }}}


# {{{ preset tables

ALPHAS = (0.1, 0.5, 0.9)
N_SUBDIFFUSION = (10, 20, 40, 80, 160, 320)
N_FRACTIONAL = (5, 10, 20, 40, 80)
T_SMALL = (1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10)

SCALES = {
    # (subdiffusion M, space-fractional M, N_ref rule)
    "paper": (8192, 8192, 1000),
    "desk": (2048, 1024, None),
}

TABLE_TITLES = {
    1: "Errors at t = 0.1 for (a) the indicator of (0, 1/2) and (b) x(1 - x)",
    2: "Subdiffusion errors at t = 0.1 for (a) sin(2 pi x) and (b) x^(-1/4)",
    3: "Subdiffusion errors with alpha = 0.5 and N = 10 as t -> 0",
    4: "Space-time fractional errors for sin(2 pi x) at t = 0.1",
    5: "Space-time fractional errors for x^(-1/4) with beta = 1.5",
    6: "Space-time fractional errors with alpha = 0.5, beta = 1.5 and N = 5 as t -> 0",
}


def table_configs(table_id: int, scale: str = "desk") -> list[ExperimentConfig]:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}: got {scale!r}")
    M_sub, M_frac, n_ref = SCALES[scale]
    sub = dict(problem="subdiffusion")

    def frac(beta, N):
        return dict(
            problem="space_time_fractional",
            beta=beta,
            M=M_frac,
            N_ref=n_ref or SELF_REFERENCE_FACTOR * max(N),
        )

    a, b = InitialDataSpec.SIN2PIX.value, InitialDataSpec.XNEGQUARTER.value
    if table_id == 1:
        M1 = 4096 if scale == "paper" else M_sub
        return [
            ExperimentConfig(**sub, alpha=al, ic=ic, t=0.1, M=M1, N=N_SUBDIFFUSION)
            for al in ALPHAS
            for ic in (InitialDataSpec.INDICATOR_HALF.value, InitialDataSpec.XONEMINUSX.value)
        ]
    if table_id == 2:
        return [
            ExperimentConfig(**sub, alpha=al, ic=ic, t=0.1, M=M_sub, N=N_SUBDIFFUSION)
            for al in ALPHAS
            for ic in (a, b)
        ]
    if table_id == 3:
        return [
            ExperimentConfig(**sub, alpha=0.5, ic=ic, t=T_SMALL, M=M_sub, N=10) for ic in (a, b)
        ]
    if table_id == 4:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return [
                ExperimentConfig(**frac(beta, N_FRACTIONAL), alpha=al, ic=a, t=0.1, N=N_FRACTIONAL)
                for al in ALPHAS
                for beta in (1.25, 1.5, 1.75)
            ]
    if table_id == 5:
        return [
            ExperimentConfig(**frac(1.5, N_FRACTIONAL), alpha=al, ic=b, t=t, N=N_FRACTIONAL)
            for al in ALPHAS
            for t in (0.1, 0.01, 0.001)
        ]
    if table_id == 6:
        return [
            ExperimentConfig(**frac(1.5, (5,)), alpha=0.5, ic=ic, t=T_SMALL, N=5) for ic in (a, b)
        ]
    raise ValueError(f"table id must be 1..6: got {table_id}")


def reproduce_table(
    table_id: int, scale: str = "desk", workers: int | None = None
) -> list[ConvergenceReport]:
    reports = run_experiments(table_configs(table_id, scale), workers)
    for r in reports:
        r.notes.append(f"table {table_id}, {scale} scale, M = {r.M[0]}")
    return reports


# }}}


# {{{ output

FLOAT_FMT = "%.9g"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % x


def format_csv(reports: Sequence[ConvergenceReport]) -> str:
    """One row per run; ``rate`` is the pairwise rate against the previous row
    of the same report (empty on each report's first row)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        rates = r.rates
        for i in range(len(r.errors_raw)):
            # an empty rate marks the first row of a report
            rate = "" if i == 0 else ("nan" if math.isnan(rates[i - 1]) else _fmt(rates[i - 1]))
            w.writerow([
                r.problem, _fmt(r.alpha), _fmt(r.beta), r.ic, _fmt(r.t[i]), _fmt(r.M[i]),
                _fmt(r.N[i]), _fmt(r.errors_raw[i]), _fmt(r.errors_normalized[i]), rate,
            ])
    return buf.getvalue()


def parse_csv(text: str) -> list[ConvergenceReport]:
    """Inverse of :func:`format_csv` (notes and growth are not stored)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
        raise ValueError("unexpected CSV header")
    reports: list[ConvergenceReport] = []
    for row in rows:
        if row["rate"] == "" or not reports:
            reports.append(ConvergenceReport(
                problem=row["problem"],
                alpha=float(row["alpha"]),
                beta=float(row["beta"]) if row["beta"] else None,
                ic=row["ic"],
                t=[], M=[], N=[], errors_raw=[], errors_normalized=[],
            ))
        r = reports[-1]
        r.t.append(float(row["t"]))
        r.M.append(int(row["M"]))
        r.N.append(int(row["N"]))
        r.errors_raw.append(float(row["error_raw"]))
        r.errors_normalized.append(float(row["error_normalized"]))
    return reports


_CASE = {
    InitialDataSpec.SIN2PIX.value: "(a)",
    InitialDataSpec.XNEGQUARTER.value: "(b)",
    InitialDataSpec.INDICATOR_HALF.value: "(a)",
    InitialDataSpec.XONEMINUSX.value: "(b)",
}


def format_markdown(
    reports: Sequence[ConvergenceReport], normalization: str = "normalized", title: str | None = None
) -> str:
    """Tables in the layout: label columns, one column per sweep value, rate last."""
    if not reports:
        return ""
    out = []
    if title:
        out += [f"**{title}**", ""]
    groups: list[list[ConvergenceReport]] = []
    for r in reports:
        key = (r.sweep, tuple(getattr(r, r.sweep)))
        if groups and (groups[-1][0].sweep, tuple(getattr(groups[-1][0], groups[-1][0].sweep))) == key:
            groups[-1].append(r)
        else:
            groups.append([r])

    for group in groups:
        first = group[0]
        sweep = first.sweep
        labels = ["alpha"]
        if any(r.beta is not None for r in group):
            labels.append("beta")
        if sweep != "t" and len({r.t[0] for r in group}) > 1:
            labels.append("t")
        labels.append("case")
        values = getattr(first, sweep)
        head = labels + [f"{sweep}={_fmt(x)}" for x in values] + ["rate"]
        out.append("| " + " | ".join(head) + " |")
        out.append("|" + "---|" * len(head))
        prev_alpha = None
        for r in group:
            errs = r.errors_normalized if normalization == "normalized" else r.errors_raw
            cells = []
            for lab in labels:
                if lab == "alpha":
                    cells.append(_fmt(r.alpha) if r.alpha != prev_alpha else "")
                elif lab == "beta":
                    cells.append(_fmt(r.beta))
                elif lab == "t":
                    cells.append(_fmt(r.t[0]))
                else:
                    cells.append(_CASE.get(r.ic, r.ic))
            prev_alpha = r.alpha
            cells += ["%.2e" % e for e in errs]
            cells.append("≈ %.2f" % r.rate if math.isfinite(r.rate) else "")
            out.append("| " + " | ".join(cells) + " |")
        out.append("")
    notes = sorted({n for r in reports for n in r.notes})
    out += [f"- {n}" for n in notes]
    return "\n".join(out).rstrip() + "\n"


def emit(
    reports: Sequence[ConvergenceReport],
    fmt: str = "csv",
    destination: str | IO[str] | None = None,
    **kwargs,
) -> str:
    """Write reports as ``csv`` or ``markdown`` to a path or stream; returns the text."""
    if fmt == "csv":
        text = format_csv(reports)
    elif fmt == "markdown":
        text = format_markdown(reports, **kwargs)
    else:
        raise ValueError(f"format must be csv or markdown: got {fmt!r}")
    if destination is None:
        return text
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        destination.write(text)
    return text


def config_with_overrides(base: ExperimentConfig | dict | None, **overrides) -> ExperimentConfig:
    data = base.to_dict() if isinstance(base, ExperimentConfig) else dict(base or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


# }}}
