r"""The L1 scheme for the Caputo derivative and the fully discrete marcher.

On the uniform grid :math:`t_n = n\tau` the Caputo derivative is replaced by

.. math::

    \tau^{-\alpha}\Big(b_0 U^n - b_{n-1}U^0 - \sum_{j=1}^{n-1}(b_{j-1} - b_j) U^{n-j}\Big),
    \qquad b_j = \frac{(j+1)^{1-\alpha} - j^{1-\alpha}}{\Gamma(2-\alpha)},

so each step solves
:math:`(b_0 \mathcal M + \tau^\alpha S) U^n = \mathcal M(b_{n-1}U^0 + \dots) + \tau^\alpha F^n`.
For :math:`\alpha = 1` the weights collapse to ``[1, 0, 0, ...]`` and the
scheme is backward Euler.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from l1fde.exceptions import NumericalError
from l1fde.fem1d import SpatialDiscretization
from l1fde.linalg import Tridiagonal, factorize

__all__ = [
    "L1Weights",
    "SolutionHistory",
    "TimeGrid",
    "l1_weights",
    "march",
    "solve_scalar_ode",
]


@dataclass(frozen=True)
class L1Weights:
    alpha: float
    b: np.ndarray

    @property
    def N(self) -> int:
        return self.b.shape[0]

    @property
    def differences(self) -> np.ndarray:
        """``d[j] = b[j-1] - b[j]`` for ``j = 1 .. N-1``; ``d[0]`` is unused and zero."""
        d = np.zeros_like(self.b)
        d[1:] = self.b[:-1] - self.b[1:]
        return d


def l1_weights(alpha: float, N: int) -> L1Weights:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1]: got {alpha}")
    if N < 1:
        raise ValueError(f"N must be positive: got {N}")

    j = np.arange(N, dtype=np.float64)
    q = 1.0 - alpha
    b = np.empty(N)
    b[0] = 1.0
    # (j+1)^q - j^q = j^q expm1(q log1p(1/j)) avoids cancellation for large j
    b[1:] = j[1:] ** q * np.expm1(q * np.log1p(1.0 / j[1:]))
    return L1Weights(alpha, b / math.gamma(2.0 - alpha))


@dataclass(frozen=True)
class TimeGrid:
    t_target: float
    N: int

    def __post_init__(self) -> None:
        if not self.t_target > 0:
            raise ValueError(f"target time must be positive: got {self.t_target}")
        if self.N < 1:
            raise ValueError(f"N must be positive: got {self.N}")

    @property
    def tau(self) -> float:
        return self.t_target / self.N

    @property
    def times(self) -> np.ndarray:
        t = np.arange(self.N + 1) * self.tau
        t[-1] = self.t_target
        return t


@dataclass
class SolutionHistory:
    """Coefficient vectors ``U^0 .. U^N`` stored row-wise."""

    levels: np.ndarray
    grid: TimeGrid

    @property
    def final(self) -> np.ndarray:
        return self.levels[-1]

    def __len__(self) -> int:
        return self.levels.shape[0]

    def __getitem__(self, n: int) -> np.ndarray:
        return self.levels[n]


def march(
    disc: SpatialDiscretization,
    w: L1Weights,
    v_h: np.ndarray,
    grid: TimeGrid,
    forcing: Callable[[float], np.ndarray] | None = None,
    *,
    reverse_history: bool = False,
) -> SolutionHistory:
    """Run the fully discrete L1 scheme for ``grid.N`` steps.

    Args:
        disc: mesh, mass and stiffness matrices.
        w: L1 weights with at least ``grid.N`` entries.
        v_h: initial coefficients ``U^0``.
        grid: the uniform time grid.
        forcing: optional map ``t -> (f(t), phi_i)``; zero when omitted.
        reverse_history: accumulate the history sum from the oldest level
            instead of the newest (for roundoff checks).

    Raises:
        NumericalError: if the factorization fails or a level is non-finite.
    """
    N = grid.N
    if w.N < N:
        raise ValueError(f"need {N} weights, got {w.N}")
    v_h = np.asarray(v_h, dtype=np.float64)
    if v_h.shape != (disc.mesh.ndofs,):
        raise ValueError(f"initial vector must have length {disc.mesh.ndofs}")

    b = w.b
    d = w.differences
    ta = grid.tau**w.alpha
    mass = disc.mass

    if isinstance(disc.stiffness, Tridiagonal):
        system = mass.scale(b[0]) + disc.stiffness.scale(ta)
    else:
        system = b[0] * mass.to_dense() + ta * disc.stiffness
    solver = factorize(system)

    U = np.empty((N + 1, v_h.shape[0]))
    U[0] = v_h
    times = grid.times
    for n in range(1, N + 1):
        # b_{n-1} U^0 + sum_{j=1}^{n-1} d_j U^{n-j}
        if reverse_history:
            hist = d[n - 1 : 0 : -1] @ U[1:n] if n > 1 else np.zeros_like(v_h)
        else:
            hist = d[1:n] @ U[n - 1 : 0 : -1] if n > 1 else np.zeros_like(v_h)
        rhs = mass @ (b[n - 1] * U[0] + hist)
        if forcing is not None:
            rhs = rhs + ta * np.asarray(forcing(times[n]), dtype=np.float64)
        U[n] = solver.solve(rhs)
        if not np.all(np.isfinite(U[n])):
            raise NumericalError("non-finite solution level", step=n)
    return SolutionHistory(U, grid)


def solve_scalar_ode(
    alpha: float, lam: float | np.ndarray, grid: TimeGrid, u0: float | np.ndarray = 1.0
) -> np.ndarray:
    """L1 scheme for ``D^alpha u + lam u = 0``, ``u(0) = u0``.

    ``lam`` (and ``u0``) may be arrays, in which case every mode is advanced
    independently and the result has shape ``(N + 1, len(lam))``.
    """
    w = l1_weights(alpha, grid.N)
    b, d = w.b, w.differences
    lam = np.asarray(lam, dtype=np.float64)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")

    U = np.empty((grid.N + 1, lam.shape[0]))
    U[0] = u0
    denom = b[0] + grid.tau**alpha * lam
    for n in range(1, grid.N + 1):
        hist = d[1:n] @ U[n - 1 : 0 : -1] if n > 1 else 0.0
        U[n] = (b[n - 1] * U[0] + hist) / denom
    return U[:, 0] if scalar else U
