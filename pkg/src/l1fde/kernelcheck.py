r"""Scalar scans of the symbols behind the L1 error analysis.

The generating function of the L1 weights gives the discrete symbol

.. math::

    \chi_1(z) = \frac{1 - e^{-z\tau}}{\tau^\alpha}\,\psi(z\tau), \qquad
    \psi(w) = \frac{e^{w} - 1}{\Gamma(2-\alpha)}\,\mathrm{Li}_{\alpha-1}(e^{-w}),

which approximates :math:`z^\alpha`. The functions here sample ``psi``,
``chi`` and ``chi_1`` on the truncated contour
:math:`\Gamma_\tau = \{\rho e^{\pm i\theta}: \delta \le \rho \le \pi/(\tau\sin\theta)\}
\cup \{\delta e^{i\varphi}: |\varphi| \le \theta\}` and report the quantities
whose boundedness the analysis relies on. On the rays :math:`|e^{-z\tau}| > 1`,
so the polylogarithm is evaluated by analytic continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from l1fde.specfun import polylog_exp

__all__ = [
    "ContourSpec",
    "KernelScan",
    "LemmaScan",
    "chi1_eval",
    "chi_eval",
    "drift",
    "kernel_diff",
    "kernel_scan",
    "lemma_scan",
    "psi_eval",
    "tau_sweep",
]

DEFAULT_LAMBDAS = np.logspace(-2, 6, 33)


@dataclass(frozen=True)
class ContourSpec:
    theta: float
    delta: float
    tau: float
    samples: int = 200

    def __post_init__(self) -> None:
        if not math.pi / 2 < self.theta < 5 * math.pi / 6:
            raise ValueError(f"theta must lie in (pi/2, 5pi/6): got {self.theta}")
        if not self.tau > 0 or not self.delta > 0:
            raise ValueError("tau and delta must be positive")
        if not self.delta < math.pi / (2 * self.tau):
            raise ValueError(f"delta must be below pi / (2 tau) = {math.pi / (2 * self.tau)}")
        if self.samples < 2:
            raise ValueError("need at least two samples per branch")

    @property
    def rho_max(self) -> float:
        return math.pi / (self.tau * math.sin(self.theta))

    def rays(self) -> np.ndarray:
        """Upper ray first, then its mirror image."""
        rho = np.geomspace(self.delta, self.rho_max, self.samples)
        upper = rho * np.exp(1j * self.theta)
        return np.concatenate([upper, np.conj(upper)])

    def arc(self) -> np.ndarray:
        phi = np.linspace(-self.theta, self.theta, self.samples)
        return self.delta * np.exp(1j * phi)

    def points(self) -> np.ndarray:
        return np.concatenate([self.rays(), self.arc()])


def psi_eval(zt: complex, alpha: float) -> complex:
    zt = complex(zt)
    return _expm1(zt) * polylog_exp(alpha - 1.0, zt) / math.gamma(2.0 - alpha)


def _expm1(w: complex) -> complex:
    # e^(x+iy) - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y, free of cancellation
    x, y = w.real, w.imag
    em1 = math.expm1(x)
    s = math.sin(0.5 * y)
    return complex(em1 * math.cos(y) - 2.0 * s * s, (em1 + 1.0) * math.sin(y))


def chi_eval(z: complex, tau: float) -> complex:
    return -_expm1(-complex(z) * tau) / tau


def chi1_eval(z: complex, tau: float, alpha: float) -> complex:
    zt = complex(z) * tau
    return -_expm1(-zt) / tau**alpha * psi_eval(zt, alpha)


def kernel_diff(z: complex, lam: float, tau: float, alpha: float) -> float:
    r"""``|k_1 - k_2|`` for the continuous and discrete solution kernels.

    ``k_1 = -z^{-1} lam / (z^alpha + lam)`` and
    ``k_2 = -(tau / (1 - e^{-z tau})) lam / (chi_1(z) + lam)``.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative: got {lam}")
    z = complex(z)
    k1 = -lam / (z * (z**alpha + lam))
    k2 = -(tau / -_expm1(-z * tau)) * lam / (chi1_eval(z, tau, alpha) + lam)
    return abs(k1 - k2)


@dataclass(frozen=True)
class LemmaScan:
    alpha: float
    spec: ContourSpec
    chi1_ratio_max: float
    psi_re_min: float
    psi_abs_min: float
    chi_ratio_min: float
    chi_ratio_max: float
    chi_ray_ratio_min: float
    chi1_arg_max: float
    conj_error: float


def lemma_scan(spec: ContourSpec, alpha: float) -> LemmaScan:
    """Sample ``psi``, ``chi`` and ``chi_1`` over the contour.

    ``chi1_ratio_max`` is the largest ``|chi_1(z) - z^alpha| / (|z|^2 tau^(2-alpha))``.
    """
    tau = spec.tau
    rays, arc = spec.rays(), spec.arc()
    z = np.concatenate([rays, arc])

    psi = np.array([psi_eval(zi * tau, alpha) for zi in z])
    chi = -np.array([_expm1(-zi * tau) for zi in z]) / tau
    chi1 = chi * tau ** (1.0 - alpha) * psi
    absz = np.abs(z)
    ratio = np.abs(chi1 - z**alpha) / (absz**2 * tau ** (2.0 - alpha))
    chi_ratio = np.abs(chi) / absz

    # mirror images sit in the second half of the ray block
    n = spec.samples
    conj = np.max(np.abs(psi[n : 2 * n] - np.conj(psi[:n])) / np.abs(psi[:n]))
    return LemmaScan(
        alpha=alpha,
        spec=spec,
        chi1_ratio_max=float(ratio.max()),
        psi_re_min=float(psi.real.min()),
        psi_abs_min=float(np.abs(psi).min()),
        chi_ratio_min=float(chi_ratio.min()),
        chi_ratio_max=float(chi_ratio.max()),
        chi_ray_ratio_min=float(chi_ratio[: rays.shape[0]].min()),
        chi1_arg_max=float(np.abs(np.angle(chi1)).max()),
        conj_error=float(conj),
    )


@dataclass(frozen=True)
class KernelScan:
    alpha: float
    spec: ContourSpec
    ratio_max: float
    argmax_z: complex
    argmax_lambda: float


def kernel_scan(spec: ContourSpec, alpha: float, lambdas=DEFAULT_LAMBDAS) -> KernelScan:
    """Largest ``|k_1 - k_2| / tau`` over contour samples and ``lambdas``."""
    tau = spec.tau
    z = spec.points()
    chi1 = np.array([chi1_eval(zi, tau, alpha) for zi in z])
    lam = np.asarray(lambdas, dtype=np.float64)[None, :]
    zc = z[:, None]
    k1 = -lam / (zc * (zc**alpha + lam))
    k2 = -(tau / -np.array([_expm1(-zi * tau) for zi in z]))[:, None] * lam / (chi1[:, None] + lam)
    r = np.abs(k1 - k2) / tau
    i, j = np.unravel_index(np.argmax(r), r.shape)
    return KernelScan(alpha, spec, float(r[i, j]), complex(z[i]), float(lam[0, j]))


def tau_sweep(
    alpha: float,
    theta: float,
    taus,
    *,
    delta: float = 1.0,
    samples: int = 200,
    lambdas=DEFAULT_LAMBDAS,
) -> list[tuple[LemmaScan, KernelScan]]:
    out = []
    for tau in taus:
        spec = ContourSpec(theta, delta, float(tau), samples)
        out.append((lemma_scan(spec, alpha), kernel_scan(spec, alpha, lambdas)))
    return out


def drift(values) -> float:
    """Largest relative change between successive entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(v)) / np.abs(v[:-1])))
