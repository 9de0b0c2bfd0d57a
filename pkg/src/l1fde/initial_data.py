"""Initial conditions used in the numerical experiments.

Each :class:`InitialDataSpec` carries a pointwise evaluator, its exact
:math:`L^2(0, 1)` norm, and (where available) closed-form rules for its
Fourier-sine coefficients and for its loads against the hat functions of a
uniform mesh.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = ["InitialDataSpec", "central_power_difference", "sine_coefficients_x_power"]


class InitialDataSpec(enum.Enum):
    SIN2PIX = "sin2pix"
    XNEGQUARTER = "xnegquarter"
    INDICATOR_HALF = "indicator_half"
    XONEMINUSX = "xoneminusx"

    @classmethod
    def parse(cls, name: str | InitialDataSpec) -> InitialDataSpec:
        if isinstance(name, cls):
            return name
        aliases = {"a": cls.SIN2PIX, "b": cls.XNEGQUARTER}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            return cls[name.strip().upper()]

    @property
    def description(self) -> str:
        return {
            InitialDataSpec.SIN2PIX: "sin(2 pi x)",
            InitialDataSpec.XNEGQUARTER: "x^(-1/4)",
            InitialDataSpec.INDICATOR_HALF: "indicator of (0, 1/2)",
            InitialDataSpec.XONEMINUSX: "x (1 - x)",
        }[self]

    @property
    def is_smooth(self) -> bool:
        """Whether ``-v''`` is in L^2 with ``v(0) = v(1) = 0``."""
        return self in (InitialDataSpec.SIN2PIX, InitialDataSpec.XONEMINUSX)

    @property
    def l2_norm(self) -> float:
        return {
            InitialDataSpec.SIN2PIX: math.sqrt(0.5),
            InitialDataSpec.XNEGQUARTER: math.sqrt(2.0),
            InitialDataSpec.INDICATOR_HALF: math.sqrt(0.5),
            InitialDataSpec.XONEMINUSX: math.sqrt(1.0 / 30.0),
        }[self]

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self is InitialDataSpec.SIN2PIX:
            return np.sin(2.0 * np.pi * x)
        if self is InitialDataSpec.XNEGQUARTER:
            with np.errstate(divide="ignore"):
                return x**-0.25
        if self is InitialDataSpec.INDICATOR_HALF:
            return np.where((x > 0) & (x < 0.5), 1.0, 0.0)
        return x * (1.0 - x)

    def sine_coefficients(self, K: int) -> np.ndarray | None:
        r"""Coefficients :math:`c_k = (v, \sqrt2 \sin k\pi x)` for ``k = 1..K``."""
        k = np.arange(1, K + 1, dtype=np.float64)
        kpi = k * np.pi
        if self is InitialDataSpec.SIN2PIX:
            c = np.zeros(K)
            if K >= 2:
                c[1] = math.sqrt(0.5)
            return c
        if self is InitialDataSpec.XONEMINUSX:
            return np.where(k % 2 == 1, 4.0 * math.sqrt(2.0) / kpi**3, 0.0)
        if self is InitialDataSpec.INDICATOR_HALF:
            return math.sqrt(2.0) * (1.0 - np.cos(kpi / 2.0)) / kpi
        return math.sqrt(2.0) * sine_coefficients_x_power(-0.25, kpi)

    def element_loads(self, M: int) -> np.ndarray:
        """Exact loads ``(v, phi_i)`` for the interior hats of a uniform mesh."""
        h = 1.0 / M
        i = np.arange(1, M, dtype=np.float64)
        x = i * h
        if self is InitialDataSpec.SIN2PIX:
            w = 2.0 * np.pi
            return h * np.sin(w * x) * (np.sin(w * h / 2) / (w * h / 2)) ** 2
        if self is InitialDataSpec.XONEMINUSX:
            # (1, phi) = h, (x, phi) = h x_i, (x^2, phi) = h (x_i^2 + h^2 / 6)
            return h * (x - x * x - h * h / 6.0)
        if self is InitialDataSpec.INDICATOR_HALF:
            u = np.clip((0.5 - (x - h)) / h, 0.0, 2.0)
            cumulative = np.where(u <= 1.0, 0.5 * u * u, 1.0 - 0.5 * (2.0 - u) ** 2)
            return h * cumulative
        # int_0^b x^(-1/4) (b - x) dx = (16/21) b^(7/4); second difference over the hat
        return (16.0 / 21.0) * h**0.75 * central_power_difference(i, 1.75, order=2)


_DIFF_WEIGHTS = {
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
}


def central_power_difference(k: np.ndarray, q: float, *, order: int) -> np.ndarray:
    r"""Central difference :math:`\sum_l w_l (k - l)_+^q` of the truncated power.

    ``order`` is 2 (weights ``1, -2, 1``) or 4 (weights ``1, -4, 6, -4, 1``).
    For large ``k`` the binomial expansion is summed instead, which avoids
    the cancellation of the direct formula.
    """
    offsets, weights = _DIFF_WEIGHTS[order]
    k = np.asarray(k, dtype=np.float64)
    direct = np.zeros_like(k)
    for l, wl in zip(offsets, weights):
        direct += wl * np.maximum(k - l, 0.0) ** q

    large = k >= 4.0
    if not np.any(large):
        return direct
    kl = k[large]
    series = np.zeros_like(kl)
    binom = 1.0
    for n in range(1, 200):
        binom *= (q - n + 1) / n
        if n % 2 == 1 or n < order:
            continue
        moment = float(np.sum(weights * offsets.astype(np.float64) ** n))
        term = binom * moment * kl ** (q - n)
        series += term
        if np.all(np.abs(term) <= 1e-18 * np.abs(series)):
            break
    out = direct.copy()
    out[large] = series
    return out


def sine_coefficients_x_power(s: float, omega: np.ndarray, nodes: int = 96) -> np.ndarray:
    r""":math:`\int_0^1 x^s \sin(\omega x)\,dx` for ``-1 < s < 0`` and ``omega >= pi``.

    Uses :math:`\int_0^\infty x^s\sin\omega x\,dx = \Gamma(1+s)\sin(\pi(1+s)/2)\,\omega^{-1-s}`
    minus the tail over :math:`(1, \infty)`; the tail is rotated onto
    :math:`x = 1 + i t/\omega`, where it becomes a smooth Laplace integral
    evaluated by Gauss-Laguerre quadrature.
    """
    omega = np.asarray(omega, dtype=np.float64)
    full = math.gamma(1.0 + s) * math.sin(math.pi * (1.0 + s) / 2.0) * omega ** (-1.0 - s)

    t, wts = np.polynomial.laguerre.laggauss(nodes)
    rotated = (1.0 + 1j * t[None, :] / omega[:, None]) ** s
    laplace = rotated @ wts
    tail = np.imag(np.exp(1j * omega) * 1j / omega * laplace)
    return full - tail
