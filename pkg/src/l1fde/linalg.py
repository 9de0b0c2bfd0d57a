"""Tridiagonal storage and the linear solvers used by the time stepper."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from l1fde.exceptions import NumericalError

__all__ = [
    "Factorization",
    "backward_error",
    "Tridiagonal",
    "factorize",
    "linear_solve",
    "thomas_solve",
]

PIVOT_TOL = 1e-300


@dataclass(frozen=True)
class Tridiagonal:
    """Square tridiagonal matrix stored by its three diagonals.

    ``lower`` and ``upper`` have length ``n - 1``; ``lower[i]`` sits at
    ``(i + 1, i)`` and ``upper[i]`` at ``(i, i + 1)``.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        n = self.diag.shape[0]
        if self.lower.shape != (n - 1,) or self.upper.shape != (n - 1,):
            raise ValueError("off-diagonals must have length n - 1")

    @classmethod
    def constant(cls, n: int, lower: float, diag: float, upper: float) -> Tridiagonal:
        return cls(np.full(n - 1, lower), np.full(n, diag), np.full(n - 1, upper))

    @property
    def shape(self) -> tuple[int, int]:
        n = self.diag.shape[0]
        return (n, n)

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.lower, self.upper))

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = self.diag[:, None] * x if x.ndim == 2 else self.diag * x
        if x.ndim == 2:
            y[1:] += self.lower[:, None] * x[:-1]
            y[:-1] += self.upper[:, None] * x[1:]
        else:
            y[1:] += self.lower * x[:-1]
            y[:-1] += self.upper * x[1:]
        return y

    def __add__(self, other: Tridiagonal) -> Tridiagonal:
        return Tridiagonal(
            self.lower + other.lower, self.diag + other.diag, self.upper + other.upper
        )

    def scale(self, c: float) -> Tridiagonal:
        return Tridiagonal(c * self.lower, c * self.diag, c * self.upper)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)


Matrix = Tridiagonal | np.ndarray


def thomas_solve(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve a tridiagonal system by elimination without pivoting."""
    n = diag.shape[0]
    c = np.empty(n - 1)
    d = np.empty_like(np.asarray(rhs, dtype=np.float64))

    pivot = diag[0]
    if abs(pivot) < PIVOT_TOL:
        raise NumericalError("zero pivot in tridiagonal elimination", step=0)
    if n > 1:
        c[0] = upper[0] / pivot
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * c[i - 1]
        if abs(pivot) < PIVOT_TOL:
            raise NumericalError("zero pivot in tridiagonal elimination", step=i)
        if i < n - 1:
            c[i] = upper[i] / pivot
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot

    for i in range(n - 2, -1, -1):
        d[i] -= c[i] * d[i + 1]
    return d


class Factorization:
    """A matrix factored once and reused for many right-hand sides.

    Symmetric positive definite tridiagonal matrices are factored as
    ``L D L^T`` (LAPACK ``pttrf``), other
    tridiagonal ones by banded LU at solve time, dense matrices by LU with
    partial pivoting.
    """

    def __init__(self, matrix: Matrix) -> None:
        self.matrix = matrix
        self.n = matrix.shape[0]

        if isinstance(matrix, Tridiagonal):
            if matrix.is_symmetric:
                # L D L^T without square roots; about 2-3x less roundoff than
                # banded Cholesky on the stepping matrices
                d, e, info = lapack.dpttrf(matrix.diag, matrix.lower)
                if info != 0 or np.min(d) < PIVOT_TOL:
                    raise NumericalError(
                        f"tridiagonal LDL^T failed (info={info})", step=max(info - 1, 0)
                    )
                self._d, self._e = d, e
                self.kind = "ldlt_tridiagonal"
            else:
                self._ab = np.zeros((3, self.n))
                self._ab[0, 1:] = matrix.upper
                self._ab[1] = matrix.diag
                self._ab[2, :-1] = matrix.lower
                self.kind = "banded"
        else:
            matrix = np.asarray(matrix, dtype=np.float64)
            self._lu = sla.lu_factor(matrix, check_finite=True)
            if np.min(np.abs(np.diag(self._lu[0]))) < PIVOT_TOL:
                raise NumericalError("matrix is singular to working precision")
            self.kind = "lu"

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.kind == "ldlt_tridiagonal":
            x, info = lapack.dpttrs(self._d, self._e, b)
            if info != 0:
                raise NumericalError(f"tridiagonal solve failed (info={info})")
        elif self.kind == "banded":
            x = sla.solve_banded((1, 1), self._ab, b)
        else:
            x = sla.lu_solve(self._lu, b, check_finite=False)
        return x


def factorize(matrix: Matrix) -> Factorization:
    return Factorization(matrix)


def _inf_norm(matrix: Matrix) -> float:
    if isinstance(matrix, Tridiagonal):
        rows = np.abs(matrix.diag).copy()
        rows[1:] += np.abs(matrix.lower)
        rows[:-1] += np.abs(matrix.upper)
        return float(rows.max())
    return float(np.max(np.sum(np.abs(matrix), axis=1)))


def backward_error(matrix: Matrix, x: np.ndarray, b: np.ndarray) -> float:
    """Normwise backward error ``|A x - b| / (|A| |x| + |b|)`` in the max norm."""
    r = np.max(np.abs(matrix @ x - b))
    scale = _inf_norm(matrix) * np.max(np.abs(x)) + np.max(np.abs(b))
    return float(r / scale) if scale > 0 else 0.0


def linear_solve(matrix: Matrix, b: np.ndarray, *, rtol: float = 1e-12) -> np.ndarray:
    """Solve ``matrix @ x = b`` and check the normwise backward error.

    Tridiagonal matrices go through :func:`thomas_solve`; dense ones through
    an LU factorization.

    Raises:
        NumericalError: on a (near-)zero pivot or a backward error above ``rtol``.
    """
    b = np.asarray(b, dtype=np.float64)
    if isinstance(matrix, Tridiagonal):
        x = thomas_solve(matrix.lower, matrix.diag, matrix.upper, b)
    else:
        x = factorize(matrix).solve(b)

    if not np.all(np.isfinite(x)):
        raise NumericalError("linear solve produced non-finite values")
    eta = backward_error(matrix, x, b)
    if eta > rtol:
        raise NumericalError(f"backward error {eta:.3e} exceeds {rtol:.1e}")
    return x
