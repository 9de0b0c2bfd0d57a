r"""Special functions: Gamma, Mittag-Leffler and the polylogarithm.

The two-parameter Mittag-Leffler function

.. math::

    E_{\alpha,\beta}(z) = \sum_{k=0}^\infty \frac{z^k}{\Gamma(\alpha k + \beta)}

is evaluated on the real axis. For :math:`\beta = 1` and :math:`0 < \alpha < 1`
three branches are used on the negative axis ``z = -x``:

* ``"series"``: the power series, for ``x <= SERIES_LIMIT``;
* ``"integral"``: the Laplace-type representation

  .. math::

      E_{\alpha,1}(-x) = \frac{\sin \alpha\pi}{\alpha\pi} \int_0^\infty
          \frac{\exp(-x^{1/\alpha} u^{1/\alpha})}{u^2 + 2u\cos\alpha\pi + 1}\,du,

  for intermediate ``x``;
* ``"asymptotic"``: :math:`\sum_{k\ge1} (-1)^{k+1} x^{-k}/\Gamma(1-\alpha k)`,
  truncated at the smallest envelope term, for ``x >= asymptotic_threshold(alpha)``.

The polylogarithm :math:`\mathrm{Li}_p` is summed directly inside the unit disk
and, near :math:`|z| = 1`, from its singular expansion in :math:`w = -\log z`.
The same expansion supplies the analytic continuation used by
:func:`polylog_exp` along contours where :math:`|e^{-w}| > 1`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from l1fde.exceptions import DomainError

__all__ = [
    "MLParams",
    "SERIES_LIMIT",
    "asymptotic_threshold",
    "gamma_fn",
    "mittag_leffler",
    "polylog",
    "polylog_exp",
]

SERIES_LIMIT = 1.0
_EPS = 1e-17


def gamma_fn(x: float) -> float:
    """Euler's Gamma function; raises :class:`DomainError` at the poles."""
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


# {{{ Mittag-Leffler


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 2:
            raise DomainError(f"alpha must lie in (0, 2]: got {self.alpha}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive: got {self.beta}")


def asymptotic_threshold(alpha: float) -> float:
    """Smallest ``x`` at which the asymptotic branch is used for ``E_{alpha,1}(-x)``.

    The truncation error of the divergent expansion behaves like
    ``exp(-x**(1/alpha))``; requiring ``x**(1/alpha) >= 50`` keeps it far below
    double precision.
    """
    return max(10.0, 50.0**alpha)


def _ml_series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    result = np.zeros_like(z)
    if zmax == 0.0:
        return result + 1.0 / math.gamma(beta)

    logz = np.log(np.abs(np.where(z == 0, 1.0, z)))
    sign = np.sign(z)
    k = 0
    while True:
        lg = special.gammaln(alpha * k + beta)
        result += sign**k * np.exp(k * logz - lg)
        # log-convexity of Gamma: once the term ratio drops below one it stays there
        decreasing = special.gammaln(alpha * (k + 1) + beta) - lg > math.log(zmax)
        tail = math.exp(k * math.log(zmax) - lg)
        if decreasing and tail < _EPS * max(float(np.min(np.abs(result))), 1e-30):
            break
        k += 1
        if k > 100_000:
            raise DomainError("Mittag-Leffler series failed to converge")
    return result


def _ml_asymptotic(alpha: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    xmin = float(np.min(x))
    logx = np.log(x)

    result = np.zeros_like(x)
    prev = math.inf
    for k in range(1, 10_000):
        envelope = math.lgamma(alpha * k) - k * math.log(xmin)
        if envelope > prev:
            break
        prev = envelope

        g = 1.0 - alpha * k
        if g <= 0 and g == math.floor(g):
            continue
        result += (-1) ** (k + 1) * np.exp(-k * logx) / math.gamma(g)
        if math.exp(envelope) < _EPS * float(np.min(np.abs(result))):
            break
    return result


def _ml_integral_scalar(alpha: float, x: float) -> float:
    t = x ** (1.0 / alpha)
    ca = math.cos(alpha * math.pi)
    scale = math.sin(alpha * math.pi) / (alpha * math.pi)

    def f(u: float) -> float:
        return math.exp(-t * u ** (1.0 / alpha)) / (u * u + 2.0 * u * ca + 1.0)

    # beyond umax the exponential factor underflows
    umax = (750.0 / t) ** alpha
    points = sorted(p for p in {1.0 / x, 1.0} if p < umax)
    with warnings.catch_warnings():
        # quad flags roundoff once it reaches machine precision
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(
            f, 0.0, umax, points=points or None, epsabs=0.0, epsrel=1.2e-14, limit=500
        )
    return scale * value


def _ml_integral(alpha: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.array([_ml_integral_scalar(alpha, float(xi)) for xi in x.ravel()]).reshape(x.shape)


def mittag_leffler(
    params: MLParams | float,
    z: float | np.ndarray,
    *,
    method: str | None = None,
) -> float | np.ndarray:
    """Evaluate :math:`E_{\\alpha,\\beta}(z)` for real ``z``.

    Args:
        params: an :class:`MLParams` or a bare ``alpha`` (then ``beta = 1``).
        z: real scalar or array. The accurate range for ``beta = 1`` and
            ``alpha <= 1`` is ``[-1e6, 10]``; for ``beta != 1`` or ``alpha > 1``
            only the series is implemented and ``z`` must lie in ``[-1, 10]``.
        method: force one branch (``"series"``, ``"integral"`` or
            ``"asymptotic"``) instead of choosing by ``|z|``. Forced branches
            other than the series require ``beta = 1``, ``alpha < 1`` and ``z < 0``.

    Raises:
        DomainError: for unsupported parameters or arguments, or if the
            result overflows.
    """
    if not isinstance(params, MLParams):
        params = MLParams(float(params))
    alpha, beta = params.alpha, params.beta

    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if not np.all(np.isfinite(z)):
        raise DomainError("z must be finite")

    if method is not None:
        if method not in ("series", "integral", "asymptotic"):
            raise ValueError(f"unknown method: {method!r}")
        if method != "series" and (beta != 1.0 or alpha >= 1.0 or np.any(z >= 0)):
            raise DomainError(f"method {method!r} requires beta = 1, alpha < 1 and z < 0")
        if method == "series":
            result = _ml_series(alpha, beta, z)
        elif method == "integral":
            result = _ml_integral(alpha, -z)
        else:
            result = _ml_asymptotic(alpha, -z)
    elif alpha == 1.0 and beta == 1.0:
        result = np.exp(z)
    elif beta != 1.0 or alpha > 1.0:
        if np.any(z < -SERIES_LIMIT) or np.any(z > 10.0):
            raise DomainError(
                f"E_({alpha},{beta}) is only implemented by its series on [-1, 10]"
            )
        result = _ml_series(alpha, beta, z)
    else:
        if np.any(z > 10.0):
            raise DomainError("E_alpha(z) is only implemented for z <= 10")
        result = np.empty_like(z)
        x = -z
        xa = asymptotic_threshold(alpha)
        m_series = x <= SERIES_LIMIT
        m_asym = x >= xa
        m_int = ~(m_series | m_asym)
        if np.any(m_series):
            result[m_series] = _ml_series(alpha, 1.0, z[m_series])
        if np.any(m_int):
            result[m_int] = _ml_integral(alpha, x[m_int])
        if np.any(m_asym):
            result[m_asym] = _ml_asymptotic(alpha, x[m_asym])

    if not np.all(np.isfinite(result)):
        raise DomainError("Mittag-Leffler value overflows double precision")
    return float(result[0]) if scalar else result


# }}}


# {{{ polylogarithm


@lru_cache(maxsize=64)
def _expansion_coefficients(p: float, kmax: int = 160) -> tuple[float, np.ndarray]:
    k = np.arange(kmax)
    coeffs = (-1.0) ** k * special.zeta(p - k) / special.factorial(k)
    return math.gamma(1.0 - p), coeffs


def _polylog_expansion(p: float, w: complex) -> complex:
    # Li_p(e^{-w}) = Gamma(1 - p) w^(p - 1) + sum_k (-1)^k zeta(p - k) w^k / k!,
    # convergent for |w| < 2 pi
    g, coeffs = _expansion_coefficients(p)
    acc = 0j
    wk = 1.0 + 0j
    for k, c in enumerate(coeffs):
        term = c * wk
        acc += term
        if k > 4 and abs(term) < _EPS * (abs(acc) + 1.0):
            break
        wk *= w
    else:
        raise DomainError(f"polylog expansion did not converge at w = {w}")
    return g * w ** (p - 1.0) + acc


def _polylog_series(p: float, z: complex) -> complex:
    total = 0j
    zj = z
    j = 1
    while True:
        term = zj / j**p
        total += term
        if abs(term) < 1e-16 * (abs(total) + 1.0):
            return total
        j += 1
        zj *= z


def polylog(p: float, z: complex, *, method: str | None = None) -> complex:
    """Polylogarithm :math:`\\mathrm{Li}_p(z) = \\sum_{j\\ge1} z^j / j^p` inside the unit disk.

    Args:
        p: order, ``p <= 1``.
        z: complex argument with ``|z| <= 1 - 1e-8``.
        method: ``"series"`` for plain summation, ``"expansion"`` for the
            singular expansion in ``-log z``; by default the series is used
            for ``|z| <= 0.75``.

    Raises:
        DomainError: if ``|z|`` is too close to (or beyond) the unit circle,
            or ``p > 1``.
    """
    z = complex(z)
    if p > 1:
        raise DomainError(f"polylog order must satisfy p <= 1: got {p}")
    if abs(z) > 1.0 - 1e-8:
        raise DomainError(f"|z| = {abs(z)} is outside the supported disk |z| <= 1 - 1e-8")
    if z == 0:
        return 0j
    if p == 1.0:
        return -cmath.log(1.0 - z)

    if method is None:
        method = "series" if abs(z) <= 0.75 else "expansion"
    if method == "series":
        return _polylog_series(p, z)
    if method == "expansion":
        return _polylog_expansion(p, -cmath.log(z))
    raise ValueError(f"unknown method: {method!r}")


def polylog_exp(p: float, w: complex) -> complex:
    """:math:`\\mathrm{Li}_p(e^{-w})` on the principal sheet, including ``|e^{-w}| > 1``.

    ``Im w`` is first reduced to ``[-pi, pi]``. Points with ``Re w >= 1`` are
    summed directly; the rest use the singular expansion, which converges for
    ``|w| < 2 pi``.

    Raises:
        DomainError: if ``e^{-w}`` lies on the branch cut ``[1, inf)``, or
            ``p >= 1``.
    """
    if p >= 1:
        raise DomainError(f"polylog_exp requires p < 1: got {p}")
    w = complex(w)
    shift = round(w.imag / (2.0 * math.pi))
    w = complex(w.real, w.imag - 2.0 * math.pi * shift)
    if w.real <= 0 and w.imag == 0:
        raise DomainError(f"e^(-w) lies on the branch cut [1, inf) for w = {w}")
    if w.real >= 1.0:
        return _polylog_series(p, cmath.exp(-w))
    return _polylog_expansion(p, w)


# }}}
