r"""Piecewise-linear finite elements on a uniform mesh of (0, 1).

The unknowns are the coefficients of the interior hat functions
:math:`\varphi_1, \dots, \varphi_{M-1}`. Two operators are supported: the
negative Laplacian and the Riemann-Liouville operator of order
:math:`\beta \in (3/2, 2)` with bilinear form

.. math::

    A(\varphi, \psi) = -\left({}_0D_x^{\beta/2}\varphi,\ {}_xD_1^{\beta/2}\psi\right).

For the hat basis both the Riemann-Liouville stiffness matrix and the
load of :math:`\sin 2\pi x` reduce to finite differences of truncated
powers, which are evaluated in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from l1fde.initial_data import InitialDataSpec, central_power_difference
from l1fde.linalg import Matrix, Tridiagonal, factorize, linear_solve

__all__ = [
    "Laplacian",
    "Mesh",
    "RiemannLiouville",
    "SpatialDiscretization",
    "assemble_mass",
    "assemble_stiff_laplace",
    "assemble_stiff_rl",
    "discretize",
    "interpolate",
    "l2_norm",
    "l2_project",
    "load_vector",
    "make_mesh",
    "rl_derivative_hat",
    "rl_sine_load",
    "ritz_project",
]


@dataclass(frozen=True)
class Mesh:
    M: int
    h: float = field(init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.M, (int, np.integer)) or self.M < 2:
            raise ValueError(f"mesh needs M >= 2 subintervals: got {self.M!r}")
        object.__setattr__(self, "h", 1.0 / self.M)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.h

    @property
    def interior(self) -> np.ndarray:
        return np.arange(1, self.M) * self.h

    @property
    def ndofs(self) -> int:
        return self.M - 1


def make_mesh(M: int) -> Mesh:
    return Mesh(int(M) if isinstance(M, np.integer) else M)


@dataclass(frozen=True)
class Laplacian:
    name = "laplacian"


@dataclass(frozen=True)
class RiemannLiouville:
    beta: float
    name = "riemann_liouville"

    def __post_init__(self) -> None:
        _check_beta(self.beta)


def _check_beta(beta: float) -> None:
    if not 1.0 < beta < 2.0:
        raise ValueError(f"beta must lie in (1, 2): got {beta}")
    if beta < 1.5:
        warnings.warn(
            f"beta = {beta} lies below 3/2, outside the range covered by the error theory",
            RuntimeWarning,
            stacklevel=3,
        )


Operator = Laplacian | RiemannLiouville


@dataclass(frozen=True)
class SpatialDiscretization:
    mesh: Mesh
    mass: Tridiagonal
    stiffness: Matrix
    operator: Operator

    @property
    def is_symmetric(self) -> bool:
        return isinstance(self.stiffness, Tridiagonal)


# {{{ assembly


def assemble_mass(mesh: Mesh) -> Tridiagonal:
    h = mesh.h
    return Tridiagonal.constant(mesh.ndofs, h / 6.0, 2.0 * h / 3.0, h / 6.0)


def assemble_stiff_laplace(mesh: Mesh) -> Tridiagonal:
    h = mesh.h
    return Tridiagonal.constant(mesh.ndofs, -1.0 / h, 2.0 / h, -1.0 / h)


def rl_derivative_hat(
    mesh: Mesh, s: float, i: int, side: str, x: float | np.ndarray
) -> float | np.ndarray:
    """Riemann-Liouville derivative of order ``s`` of the hat function ``phi_i``.

    ``side="left"`` is the derivative based at 0 and ``side="right"`` the one
    based at 1.
    """
    if not 0.5 < s < 1.0:
        raise ValueError(f"order s must lie in (1/2, 1): got {s}")
    if not 1 <= i <= mesh.M - 1:
        raise ValueError(f"node index must lie in 1..{mesh.M - 1}: got {i}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right': got {side!r}")

    h = mesh.h
    q = 1.0 - s
    x = np.asarray(x, dtype=np.float64)
    xm, xi, xp = (i - 1) * h, i * h, (i + 1) * h
    if side == "left":
        d = np.maximum(x - xm, 0) ** q - 2 * np.maximum(x - xi, 0) ** q + np.maximum(x - xp, 0) ** q
    else:
        d = np.maximum(xp - x, 0) ** q - 2 * np.maximum(xi - x, 0) ** q + np.maximum(xm - x, 0) ** q
    out = d / (h * math.gamma(2.0 - s))
    return float(out) if out.ndim == 0 else out


def _rl_symbol(mesh: Mesh, beta: float) -> np.ndarray:
    """Entries ``a_k = A(phi_i, phi_{i+k})`` for ``k = -1 .. M - 2``."""
    # A(phi_i, phi_j) = -(1/h) times the second difference in j of the
    # fractional integral of order 2 - beta of phi_i, itself a second
    # difference of (x - x_m)_+^(3 - beta)
    q = 3.0 - beta
    k = np.arange(-1, mesh.ndofs, dtype=np.float64)
    return -(mesh.h ** (1.0 - beta)) / math.gamma(4.0 - beta) * central_power_difference(
        k, q, order=4
    )


def assemble_stiff_rl(mesh: Mesh, beta: float) -> np.ndarray:
    """Dense stiffness matrix ``S[j, i] = A(phi_i, phi_j)``.

    The matrix is Toeplitz and vanishes above the first superdiagonal.
    """
    _check_beta(beta)
    a = _rl_symbol(mesh, beta)
    n = mesh.ndofs
    first_row = np.zeros(n)
    first_row[0] = a[1]
    if n > 1:
        first_row[1] = a[0]
    return sla.toeplitz(a[1:], first_row)


def discretize(mesh: Mesh | int, operator: Operator | None = None) -> SpatialDiscretization:
    if not isinstance(mesh, Mesh):
        mesh = make_mesh(mesh)
    operator = operator or Laplacian()
    if isinstance(operator, Laplacian):
        stiff: Matrix = assemble_stiff_laplace(mesh)
    else:
        with warnings.catch_warnings():
            # already reported when the operator was built
            warnings.simplefilter("ignore", RuntimeWarning)
            stiff = assemble_stiff_rl(mesh, operator.beta)
    return SpatialDiscretization(mesh, assemble_mass(mesh), stiff, operator)


# }}}


# {{{ loads and projections


def load_vector(mesh: Mesh, v: InitialDataSpec | str) -> np.ndarray:
    """Loads ``(v, phi_i)`` for ``i = 1 .. M - 1`` (exact up to roundoff)."""
    return InitialDataSpec.parse(v).element_loads(mesh.M)


def rl_sine_load(mesh: Mesh, beta: float, omega: float = 2.0 * math.pi) -> np.ndarray:
    r""":math:`A(\sin\omega x, \varphi_i)` for the Riemann-Liouville form.

    Equal to minus the second difference over the nodes, divided by ``h``, of
    the fractional integral of order :math:`2-\beta` of :math:`\sin\omega x`,
    which is summed as a power series.
    """
    p = 3.0 - beta
    b = mesh.nodes
    g = np.zeros_like(b)
    logb = np.log(np.where(b > 0, b, 1.0))
    for n in range(200):
        e = 2 * n + p
        term = (-1) ** n * np.exp(
            (2 * n + 1) * math.log(omega) + e * logb - math.lgamma(e + 1.0)
        )
        term[b == 0] = 0.0
        g += term
        if n > omega and np.max(np.abs(term)) < 1e-18:
            break
    return -(g[:-2] - 2.0 * g[1:-1] + g[2:]) / mesh.h


def interpolate(mesh: Mesh, f) -> np.ndarray:
    return np.asarray(f(mesh.interior), dtype=np.float64)


def l2_project(disc: SpatialDiscretization, v: InitialDataSpec | str | np.ndarray) -> np.ndarray:
    """Coefficients of the L2 projection; ``v`` is a spec or a load vector."""
    b = load_vector(disc.mesh, v) if not isinstance(v, np.ndarray) else v
    return linear_solve(disc.mass, b)


def ritz_project(disc: SpatialDiscretization, v: InitialDataSpec | str) -> np.ndarray:
    """Coefficients of the Ritz projection with respect to the operator's form.

    Supported pairs: Laplacian with ``SIN2PIX`` or ``XONEMINUSX``, and the
    Riemann-Liouville operator with ``SIN2PIX``.
    """
    v = InitialDataSpec.parse(v)
    mesh = disc.mesh
    if isinstance(disc.operator, Laplacian):
        if v is InitialDataSpec.SIN2PIX:
            b = 4.0 * math.pi**2 * load_vector(mesh, v)
        elif v is InitialDataSpec.XONEMINUSX:
            b = np.full(mesh.ndofs, 2.0 * mesh.h)
        else:
            raise ValueError(f"Ritz projection of {v.name} is not available; use l2_project")
    elif v is InitialDataSpec.SIN2PIX:
        b = rl_sine_load(mesh, disc.operator.beta)
    else:
        raise ValueError(
            f"Ritz projection of {v.name} for the Riemann-Liouville form is not available;"
            " use l2_project"
        )
    if isinstance(disc.stiffness, Tridiagonal):
        return linear_solve(disc.stiffness, b)
    return factorize(disc.stiffness).solve(b)


def l2_norm(disc: SpatialDiscretization, c: np.ndarray) -> float:
    c = np.asarray(c, dtype=np.float64)
    if c.shape[0] != disc.mesh.ndofs:
        raise ValueError(f"expected {disc.mesh.ndofs} coefficients, got {c.shape[0]}")
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    # scaling keeps c^T M c out of the subnormal and overflow ranges
    c = c / scale
    return scale * math.sqrt(max(float(c @ (disc.mass @ c)), 0.0))


# }}}
