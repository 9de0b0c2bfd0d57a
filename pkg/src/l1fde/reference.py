r"""Reference solutions, error measurement and empirical rates.

For the subdiffusion problem with the Dirichlet Laplacian on (0, 1),

.. math::

    u(x, t) = \sum_{k \ge 1} E_{\alpha,1}(-k^2\pi^2 t^\alpha)\, c_k \sqrt2 \sin k\pi x,
    \qquad c_k = (v, \sqrt2 \sin k\pi x).

At the nodes of a uniform mesh, mode ``k`` coincides with mode
``k mod 2M`` (up to sign), so the truncated series is folded onto
``M - 1`` modes and summed with a type-I discrete sine transform.
The Riemann-Liouville problem has no such expansion; a run with many more
time steps on the same mesh serves as its reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from l1fde.fem1d import SpatialDiscretization, l2_norm
from l1fde.initial_data import InitialDataSpec
from l1fde.l1stepper import L1Weights, TimeGrid, l1_weights, march, solve_scalar_ode
from l1fde.specfun import mittag_leffler

__all__ = [
    "ConvergenceReport",
    "EigenExpansion",
    "default_truncation",
    "empirical_rates",
    "error_at",
    "exact_nodal",
    "exact_subdiffusion",
    "self_reference",
    "sine_coefficients",
    "table_rate",
    "time_discrete_nodal",
]


def sine_coefficients(v: InitialDataSpec | str, K: int) -> np.ndarray:
    r"""``c_k = (v, \sqrt2 \sin k\pi x)`` for ``k = 1 .. K``."""
    if K < 1:
        raise ValueError(f"K must be positive: got {K}")
    return InitialDataSpec.parse(v).sine_coefficients(K)


def default_truncation(v: InitialDataSpec | str, M: int | None = None) -> int:
    """Number of retained modes: exact for ``SIN2PIX``, otherwise enough
    that the folded nodal sum is insensitive to the cut-off on the tested
    time range."""
    v = InitialDataSpec.parse(v)
    if v is InitialDataSpec.SIN2PIX:
        return 2
    return max(2000, 4 * (M or 0))


@dataclass(frozen=True)
class EigenExpansion:
    alpha: float
    ic: InitialDataSpec
    K: int
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, v: InitialDataSpec | str, alpha: float, K: int | None = None) -> EigenExpansion:
        v = InitialDataSpec.parse(v)
        K = K or default_truncation(v)
        return cls(alpha, v, K, sine_coefficients(v, K))

    @property
    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.K + 1, dtype=np.float64)
        return (k * math.pi) ** 2

    @property
    def tail_sq(self) -> float:
        """``sum_{k > K} c_k^2`` from Parseval (clamped at roundoff)."""
        return max(self.ic.l2_norm**2 - float(np.sum(self.coeffs**2)), 0.0)

    def tail_bound(self, t: float) -> float:
        """Bound on the L2 norm of the discarded modes at time ``t``.

        Uses ``E_{alpha,1}(-x) <= 1 / (1 + x / Gamma(1 + alpha))``.
        """
        lam = ((self.K + 1) * math.pi) ** 2
        damping = 1.0 / (1.0 + lam * t**self.alpha / math.gamma(1.0 + self.alpha))
        return math.sqrt(self.tail_sq) * damping

    def decay(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError(f"t must be nonnegative: got {t}")
        if t == 0:
            return np.ones(self.K)
        return np.asarray(mittag_leffler(self.alpha, -self.eigenvalues * t**self.alpha))


def exact_subdiffusion(
    exp: EigenExpansion, t: float, x_points: np.ndarray, *, chunk: int = 512
) -> np.ndarray:
    """Truncated series solution at arbitrary points."""
    x = np.asarray(x_points, dtype=np.float64)
    a = exp.decay(t) * exp.coeffs * math.sqrt(2.0)
    k = np.arange(1, exp.K + 1, dtype=np.float64) * math.pi
    out = np.zeros(x.shape)
    flat = out.reshape(-1)
    xf = x.reshape(-1)
    for s in range(0, exp.K, chunk):
        flat += np.sin(np.outer(xf, k[s : s + chunk])) @ a[s : s + chunk]
    return out


def _fold_to_nodes(a: np.ndarray, M: int) -> np.ndarray:
    """Nodal values ``sum_k a_k sin(k pi i / M)`` at ``i = 1 .. M - 1``."""
    k = np.arange(1, a.shape[0] + 1)
    r = k % (2 * M)
    sign = np.where(r > M, -1.0, 1.0)
    r = np.where(r > M, 2 * M - r, r)
    keep = (r > 0) & (r < M)
    folded = np.zeros(M - 1)
    np.add.at(folded, r[keep] - 1, sign[keep] * a[keep])
    # scipy's DST-I carries a factor 2
    return fft.dst(folded, type=1) / 2.0


def exact_nodal(exp: EigenExpansion, t: float, M: int) -> np.ndarray:
    """Truncated series solution at the interior nodes of the uniform mesh."""
    return _fold_to_nodes(exp.decay(t) * exp.coeffs * math.sqrt(2.0), M)


def time_discrete_nodal(exp: EigenExpansion, grid: TimeGrid, M: int) -> np.ndarray:
    """L1-in-time, exact-in-space solution at ``grid.t_target``.

    Each sine mode is advanced by the scalar L1 recursion, so comparing a
    fully discrete run with this isolates its spatial error.
    """
    lam = exp.eigenvalues
    nz = exp.coeffs != 0
    a = np.zeros(exp.K)
    a[nz] = solve_scalar_ode(exp.alpha, lam[nz], grid, 1.0)[-1] * exp.coeffs[nz] * math.sqrt(2.0)
    return _fold_to_nodes(a, M)


def self_reference(
    disc: SpatialDiscretization,
    alpha: float,
    v_h: np.ndarray,
    t: float,
    N_ref: int,
    *,
    weights: L1Weights | None = None,
) -> np.ndarray:
    """Final level of a run with ``N_ref`` steps on the same mesh."""
    grid = TimeGrid(t, N_ref)
    return march(disc, weights or l1_weights(alpha, N_ref), v_h, grid).final


def error_at(
    disc: SpatialDiscretization,
    numeric: np.ndarray,
    exact: np.ndarray,
    normalize_by: float | None = None,
) -> float:
    numeric = np.asarray(numeric, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {exact.shape}")
    e = l2_norm(disc, numeric - exact)
    return e / normalize_by if normalize_by else e


def empirical_rates(errors, grid_factor: float = 2.0) -> np.ndarray:
    """Pairwise rates ``log(e_i / e_{i+1}) / log(grid_factor)``."""
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] < 2:
        raise ValueError("need at least two errors")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive")
    if grid_factor <= 0 or grid_factor == 1:
        raise ValueError(f"grid factor must be positive and != 1: got {grid_factor}")
    return np.log(e[:-1] / e[1:]) / math.log(grid_factor)


def table_rate(rates: np.ndarray) -> float:
    """Single rate for a table row: mean of the last two pairwise rates."""
    rates = np.asarray(rates)
    if rates.size == 0:
        return math.nan
    return float(np.mean(rates[-2:]))


SWEEPS = ("N", "t", "M")


@dataclass
class ConvergenceReport:
    """Errors of one experiment over a sweep of ``N``, ``t`` or ``M``.

    Row ``i`` holds the run with ``t[i]``, ``M[i]``, ``N[i]``; exactly one
    of the three varies along the sweep.
    """

    problem: str
    alpha: float
    beta: float | None
    ic: str
    t: list[float]
    M: list[int]
    N: list[int]
    errors_raw: list[float]
    errors_normalized: list[float]
    notes: list[str] = field(default_factory=list)
    max_growth: float = math.nan

    def __post_init__(self) -> None:
        n = len(self.errors_raw)
        if not (len(self.t) == len(self.M) == len(self.N) == len(self.errors_normalized) == n):
            raise ValueError("report columns must have equal lengths")

    @property
    def sweep(self) -> str:
        for name in SWEEPS:
            if len(set(getattr(self, name))) > 1:
                return name
        return "N"

    @property
    def grid_factor(self) -> float:
        """Refinement factor between rows (``N`` and ``M`` grow, ``t`` shrinks)."""
        col = getattr(self, self.sweep)
        if len(col) < 2:
            return 2.0
        return col[0] / col[1] if self.sweep == "t" else col[1] / col[0]

    @property
    def rates(self) -> np.ndarray:
        """Pairwise rates; NaN where an error is zero (e.g. a self-comparison)."""
        e = np.asarray(self.errors_raw, dtype=np.float64)
        if e.shape[0] < 2:
            return np.empty(0)
        ok = (e[:-1] > 0) & (e[1:] > 0)
        if ok.all():
            return empirical_rates(e, self.grid_factor)
        out = np.full(e.shape[0] - 1, np.nan)
        out[ok] = np.log(e[:-1][ok] / e[1:][ok]) / math.log(self.grid_factor)
        return out

    @property
    def rate(self) -> float:
        return table_rate(self.rates)
