"""Tests for the independent numeric cross-checks.

Covers the three oracle layers: high-precision radial quadrature of the
rational integrand families, the finite-matrix model of the operator
rearrangement identity, and the spectral-sum Gauss-Bonnet residual that
adjudicates the sign and normalization of the derived curvature functions.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from artifact import numeric_oracle as oracle
from artifact.modular_function_engine import DivergentIntegralError
from artifact.numeric_oracle import (
    QuadratureSpec,
    SupportOverflowError,
    gauss_bonnet_residual,
    matrix_rearrangement_check,
    quad_r_integral,
)
from artifact.theta_algebra import FourierElement, SelfAdjointnessError, SkewMatrix

THETA_IRRATIONAL = math.sqrt(2.0) - 1.0


def line_mode_exponent(amplitude: float) -> FourierElement:
    """Self-adjoint h supported on the (1,0) line; l1 norm = 2*amplitude."""
    return FourierElement(
        2,
        {(1, 0): amplitude + 0j, (-1, 0): amplitude + 0j},
        mode="float",
    )


def cross_mode_exponent(amplitude: float) -> FourierElement:
    """Self-adjoint h with genuinely two-dimensional support (4 modes)."""
    return FourierElement(
        2,
        {
            (1, 0): amplitude + 0j,
            (-1, 0): amplitude + 0j,
            (0, 1): amplitude + 0j,
            (0, -1): amplitude + 0j,
        },
        mode="float",
    )


# ---------------------------------------------------------------------------
# radial quadrature
# ---------------------------------------------------------------------------


def test_quadrature_two_family_log_value():
    # integral of 1/((r+1)(2r+1)) over [0, inf) is log 2
    value = quad_r_integral((1, 1), 2.0)
    assert abs(value - math.log(2.0)) < 1e-12


def test_quadrature_three_family_equal_scales_value():
    # integral of r/(r+1)^3 over [0, inf) is 1/2
    value = quad_r_integral((1, 1, 1), 1.0, 1.0)
    assert abs(value - 0.5) < 1e-12


def test_quadrature_two_family_weighted_value():
    value = quad_r_integral((2, 1), 1.0)
    assert abs(value - 0.5) < 1e-12


@pytest.mark.parametrize("exponents", [(1, 0), (0, 1, 0)])
def test_quadrature_rejects_divergent_families(exponents):
    with pytest.raises(DivergentIntegralError):
        quad_r_integral(exponents, 2.0)


def test_quadrature_rejects_radial_power_mismatch():
    with pytest.raises(DivergentIntegralError):
        quad_r_integral((2, 1), 2.0, r_power=2)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_depth=0)


def test_two_family_inversion_scaling_law():
    # substituting u = s*r gives F_(p,q)(s) = s^(1-N) F_(q,p)(1/s)
    rng = np.random.default_rng(7)
    for _ in range(10):
        p, q = (int(x) for x in rng.integers(1, 4, size=2))
        s = float(rng.uniform(0.3, 3.0))
        lhs = quad_r_integral((p, q), s)
        rhs = s ** (1 - (p + q)) * quad_r_integral((q, p), 1.0 / s)
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_three_family_inversion_scaling_law():
    # substituting u = s*t*r reverses the family and inverts both ratios
    rng = np.random.default_rng(11)
    for _ in range(10):
        p, q, l = (int(x) for x in rng.integers(1, 3, size=3))
        s, t = (float(x) for x in rng.uniform(0.3, 3.0, size=2))
        n_total = p + q + l
        lhs = quad_r_integral((p, q, l), s, t)
        rhs = (s * t) ** (1 - n_total) * quad_r_integral(
            (l, q, p), 1.0 / t, 1.0 / s
        )
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# finite-matrix rearrangement oracle
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "exponents,s_shift",
    [
        ((2, 1), False),
        ((3, 1), False),
        ((3, 1, 1), False),
        ((2, 1, 1), False),
        ((2, 2, 1), True),
    ],
    ids=["K21", "K31", "H311", "H211", "H221-shift"],
)
def test_matrix_rearrangement_families(exponents, s_shift):
    err = matrix_rearrangement_check(6, 0, exponents, s_shift=s_shift)
    assert err < 1e-6


def test_matrix_rearrangement_trivial_spectrum():
    # with a single eigenvalue 1 both sides reduce to the same scalar integral
    err = matrix_rearrangement_check(1, 3, (2, 1), eigenvalues=[1.0])
    assert err < 1e-9


def test_matrix_rearrangement_monotone_refinement():
    loose = QuadratureSpec(abs_tol=1e-3, max_depth=2)
    tight = QuadratureSpec(abs_tol=1e-12, max_depth=8)
    err_loose = matrix_rearrangement_check(4, 0, (2, 1), spec=loose)
    err_tight = matrix_rearrangement_check(4, 0, (2, 1), spec=tight)
    assert err_tight <= err_loose


# ---------------------------------------------------------------------------
# exact Taylor data feeding the spectral-sum functional
# ---------------------------------------------------------------------------


def test_one_variable_taylor_coefficients():
    kcoeffs, _ = oracle._dim2_taylor(8)
    expected = [
        Fraction(1, 12),
        Fraction(-1, 12),
        Fraction(1, 30),
        Fraction(-1, 180),
        Fraction(-1, 5040),
        Fraction(1, 5040),
    ]
    assert list(kcoeffs[: len(expected)]) == expected


def test_two_variable_taylor_constant_term():
    _, gcoeffs = oracle._dim2_taylor(8)
    table = {(a, b): c for a, b, c in gcoeffs}
    assert table[(0, 0)] == Fraction(-1, 12)


# ---------------------------------------------------------------------------
# Gauss-Bonnet residual
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "theta",
    [0.0, 1.0 / 3.0, THETA_IRRATIONAL],
    ids=["zero", "rational", "irrational"],
)
def test_gauss_bonnet_residual_vanishes(theta):
    h = line_mode_exponent(0.05)
    residual = gauss_bonnet_residual(h, SkewMatrix.standard_2d(theta))
    assert residual < 1e-6


def test_gauss_bonnet_zero_exponent_is_exact_zero():
    z = FourierElement.zero(2, "float")
    assert gauss_bonnet_residual(z, SkewMatrix.standard_2d(0.3)) == 0.0


def test_gauss_bonnet_truncation_ratio():
    # residual comes from the series tail, so scaling h by eps must shrink it
    # by at least 2*eps^2 (the tail is higher than quadratic in h)
    theta = SkewMatrix.standard_2d(THETA_IRRATIONAL)
    base = line_mode_exponent(0.1)
    r_base = gauss_bonnet_residual(base, theta)
    for eps in (0.5, 0.25):
        r_scaled = gauss_bonnet_residual(base.scaled(eps), theta)
        assert r_scaled <= 2.0 * eps**2 * r_base


def test_gauss_bonnet_order_ladder():
    # truncation error is genuine: a short series leaves a visible residual,
    # a longer one drives it far down
    theta = SkewMatrix.standard_2d(THETA_IRRATIONAL)
    h = line_mode_exponent(0.1)
    r3 = gauss_bonnet_residual(h, theta, series_order=3)
    r6 = gauss_bonnet_residual(h, theta, series_order=6)
    assert 1e-8 < r3 < 1e-3
    assert r6 < r3 / 10.0


def test_gauss_bonnet_two_dimensional_support_nontrivial_phase():
    # four-mode h makes every deformation phase matter; needs a larger
    # support budget because products spread over the whole lattice diamond
    h = cross_mode_exponent(0.04)
    for theta in (1.0 / 3.0, THETA_IRRATIONAL):
        residual = gauss_bonnet_residual(
            h, SkewMatrix.standard_2d(theta), series_order=6, support_cap=400
        )
        assert residual < 1e-8


def test_gauss_bonnet_support_cap_overflow():
    h = cross_mode_exponent(0.04)
    with pytest.raises(SupportOverflowError):
        gauss_bonnet_residual(h, SkewMatrix.standard_2d(1.0 / 3.0))


def test_gauss_bonnet_rejects_negated_two_variable_channel(monkeypatch):
    # flipping the sign of the two-variable channel must break the identity:
    # this is the numeric adjudication of the curvature-gradient sign
    original = oracle._dim2_taylor

    def flipped(order):
        kcoeffs, gcoeffs = original(order)
        return kcoeffs, tuple((a, b, -c) for a, b, c in gcoeffs)

    monkeypatch.setattr(oracle, "_dim2_taylor", flipped)
    h = line_mode_exponent(0.05)
    residual = gauss_bonnet_residual(h, SkewMatrix.standard_2d(THETA_IRRATIONAL))
    assert residual > 1e-4


def test_gauss_bonnet_norm_precondition():
    h = line_mode_exponent(0.05).scaled(4.0)
    with pytest.raises(ValueError, match="norm precondition violated"):
        gauss_bonnet_residual(h, SkewMatrix.standard_2d(0.0))


def test_gauss_bonnet_requires_self_adjoint_exponent():
    h = FourierElement(2, {(1, 0): 0.05 + 0j}, mode="float")
    with pytest.raises(SelfAdjointnessError, match="star"):
        gauss_bonnet_residual(h, SkewMatrix.standard_2d(0.0))
