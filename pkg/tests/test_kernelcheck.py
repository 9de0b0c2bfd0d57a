from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1fde.kernelcheck import (
    ContourSpec,
    chi1_eval,
    chi_eval,
    drift,
    kernel_diff,
    kernel_scan,
    lemma_scan,
    psi_eval,
    tau_sweep,
)

THETA = 0.51 * math.pi
ALPHAS = [0.1, 0.5, 0.9]


def psi_mpmath(w, alpha):
    w = mpmath.mpc(w)
    return complex(
        mpmath.expm1(w) * mpmath.polylog(alpha - 1, mpmath.exp(-w)) / mpmath.gamma(2 - alpha)
    )


def test_contour_validation():
    for theta in (math.pi / 2, 5 * math.pi / 6, 0.3):
        with pytest.raises(ValueError):
            ContourSpec(theta, 1.0, 1e-3)
    with pytest.raises(ValueError):
        ContourSpec(THETA, 0.0, 1e-3)
    with pytest.raises(ValueError):
        ContourSpec(THETA, 2.0, 1.0)  # delta above pi / (2 tau)
    with pytest.raises(ValueError):
        ContourSpec(THETA, 1.0, 1e-3, samples=1)


def test_contour_geometry():
    spec = ContourSpec(THETA, 1.0, 1e-3, samples=50)
    rays = spec.rays()
    assert rays.shape == (100,)
    np.testing.assert_allclose(rays[50:], np.conj(rays[:50]))
    assert abs(rays[49]) == pytest.approx(spec.rho_max)
    # the ray end sits on Im(z tau) = pi
    assert (rays[49] * spec.tau).imag == pytest.approx(math.pi)
    np.testing.assert_allclose(np.abs(spec.arc()), 1.0)
    assert spec.points().shape == (150,)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_psi_large_real_argument(alpha):
    assert psi_eval(10.0, alpha).real == pytest.approx(
        (1 - math.exp(-10)) / math.gamma(2 - alpha), rel=1e-3
    )
    assert psi_eval(10.0, alpha) == pytest.approx(psi_mpmath(10.0, alpha), rel=1e-13)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_psi_against_mpmath_on_contour(alpha):
    spec = ContourSpec(THETA, 1.0, 1e-2, samples=12)
    for z in spec.points():
        w = z * spec.tau
        ref = psi_mpmath(w, alpha)
        assert abs(psi_eval(w, alpha) - ref) <= 1e-12 * abs(ref)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1e-4, 3.0), st.floats(-3.1, 3.1))
def test_psi_conjugate_symmetry(alpha, r, phi):
    w = r * cmath.exp(1j * phi)
    a, b = psi_eval(w, alpha), psi_eval(w.conjugate(), alpha)
    assert abs(a - b.conjugate()) <= 1e-13 * abs(a)


def test_chi_small_argument():
    z = 1.0 * cmath.exp(1j * THETA)
    assert abs(chi_eval(z, 1e-4) / z - 1) < 1e-4
    assert abs(chi_eval(z, 1e-8) / z - 1) < 1e-6


@pytest.mark.parametrize("alpha", ALPHAS)
def test_chi1_consistent_on_arc(alpha):
    arc = ContourSpec(THETA, 1.0, 1e-6, samples=20).arc()
    for z in arc:
        assert abs(chi1_eval(z, 1e-6, alpha) / z**alpha - 1) < 1e-4


@pytest.mark.parametrize("alpha", ALPHAS)
def test_lemma_scan_properties(alpha):
    scan = lemma_scan(ContourSpec(THETA, 1.0, 1e-3), alpha)
    assert scan.psi_re_min > 0
    assert scan.psi_abs_min > 0
    assert scan.chi_ray_ratio_min >= 0.2
    assert scan.chi_ratio_max < 2.0
    assert scan.chi1_arg_max < 3 * math.pi / 4 + 0.05
    assert scan.conj_error < 1e-14
    assert math.isfinite(scan.chi1_ratio_max)


def test_lemma_ratio_stable_under_halving():
    sweep = tau_sweep(0.5, THETA, [1e-3, 5e-4, 2.5e-4])
    assert drift([lem.chi1_ratio_max for lem, _ in sweep]) < 0.10
    assert drift([ker.ratio_max for _, ker in sweep]) < 0.10


def test_kernel_diff():
    z = 2.0 * cmath.exp(1j * THETA)
    assert kernel_diff(z, 0.0, 1e-3, 0.5) == 0.0
    assert kernel_diff(z, 1e-12, 1e-3, 0.5) < 1e-12
    with pytest.raises(ValueError):
        kernel_diff(z, -1.0, 1e-3, 0.5)
    # kernel_scan evaluates the same quantity
    spec = ContourSpec(THETA, 1.0, 1e-3, samples=20)
    scan = kernel_scan(spec, 0.5)
    direct = kernel_diff(scan.argmax_z, scan.argmax_lambda, 1e-3, 0.5) / 1e-3
    assert direct == pytest.approx(scan.ratio_max, rel=1e-12)


def test_near_one_alpha():
    sweep = tau_sweep(0.999, THETA, [1e-3, 5e-4], samples=100)
    lem = sweep[0][0]
    assert lem.psi_re_min > 0
    assert drift([ker.ratio_max for _, ker in sweep]) < 0.10
    z = 3.0 * cmath.exp(1j * THETA)
    assert abs(chi1_eval(z, 1e-3, 0.999) - chi_eval(z, 1e-3)) < 0.05 * abs(z)


def test_drift():
    assert drift([1.0]) == 0.0
    assert drift([1.0, 1.05, 1.0]) == pytest.approx(0.05)
    assert drift([2.0, 1.0]) == pytest.approx(0.5)
