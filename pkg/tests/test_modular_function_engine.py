"""Signature extraction, exact radial integration, closed-form goldens,
report serialization, and numeric evaluation."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from artifact.symbol_engine import parse_expression
from artifact.modular_function_engine import (
    DivergentIntegralError,
    S,
    T,
    SignatureError,
    SymbolicFunction,
    derive_curvature,
    dim2_quadrature_decomposition,
    eval_function,
    extract_signature,
    family_integral_dim2,
    family_value_dim_m,
    integrate_dim2,
    integrate_dim_m,
    scalar_profile,
)
from artifact.numeric_oracle import quad_r_integral


def sig_of(text: str):
    e = parse_expression(text)
    assert len(e.terms) == 1
    return extract_signature(e.terms[0])


# --------------------------------------------------------------------------
# signature extraction


def test_signature_single_rho_block():
    sig = sig_of("1 * b0^2 * k * HessK[a,b] * b0 * Xi2 * Ginv[a,b]")
    assert sig.b0_exponents == (2, 1)
    assert sig.r_power == 1
    assert sig.modular_shifts == (0,)
    assert sig.k_total == 1
    assert sig.channel == "hess"


def test_signature_crossing_k_gives_monomial_shift():
    sig = sig_of("1 * b0^2 * k * GradK[a] * b0^2 * k * GradK[b] * b0 * Xi2^3 * Ginv[a,b]")
    assert sig.b0_exponents == (2, 2, 1)
    assert sig.r_power == 3
    assert sig.modular_shifts == (1, 0)
    assert sig.k_total == 2


def test_signature_front_loaded_k_has_no_shift():
    sig = sig_of("1 * b0^3 * k^2 * GradK[a] * b0 * GradK[b] * b0 * Xi2^3 * Ginv[a,b]")
    assert sig.b0_exponents == (3, 1, 1)
    assert sig.r_power == 3  # exponent law p+q+l-2, not the slot count
    assert sig.modular_shifts == (0, 0)


def test_signature_inverse_crossing_gives_negative_shift():
    sig = sig_of("-1 * b0 * GradK[a] * kinv * GradK[b] * b0 * Ginv[a,b]")
    assert sig.b0_exponents == (1, 0, 1)
    assert sig.r_power == 0
    assert sig.modular_shifts == (-1, 0)
    assert sig.k_total == -1
    assert sig.prefactor == Fraction(-1)


def test_signature_scalar_channel():
    sig = sig_of("1/3 * b0^3 * k^2 * Xi2 * SDelta")
    assert sig.b0_exponents == (3,)
    assert sig.channel == "scalar"
    assert sig.modular_shifts == ()


def test_signature_rejects_imaginary_coefficient():
    e = parse_expression("1*i * b0^3 * k^2 * Xi2 * SDelta")
    with pytest.raises(SignatureError):
        extract_signature(e.terms[0])


def test_signature_rejects_three_rho_factors():
    e = parse_expression(
        "1 * b0 * GradK[a] * b0 * GradK[b] * b0 * GradK[c] * b0 "
        "* DXi2[a] * DXi2[b] * DXi2[c]"
    )
    with pytest.raises(SignatureError):
        extract_signature(e.terms[0])


def test_signature_rejects_unaveraged_vertical_atoms():
    e = parse_expression("1 * b0^2 * k * HessK[a,b] * b0 * Xi2 * DXi2[a] * DXi2[b]")
    with pytest.raises(SignatureError):
        extract_signature(e.terms[0])


# --------------------------------------------------------------------------
# dim-2 radial integration


def test_log_family_value():
    f = family_integral_dim2((1, 1))
    assert sp.simplify(f.parts["log_s"] - 1 / (S - 1)) == 0
    assert sp.simplify(f.parts["one"]) == 0
    assert sp.simplify(f.parts["log_st"]) == 0
    # s -> 1 specialization integrates (r+1)^{-2} to 1
    assert abs(eval_function(f, 1.0) - 1.0) < 1e-10


def test_beta_family_value():
    f = family_integral_dim2((2, 1))
    assert abs(eval_function(f, 1.0) - 0.5) < 1e-10


def test_divergent_family_rejected():
    with pytest.raises(DivergentIntegralError):
        family_integral_dim2((1, 0))


def test_every_dim2_piece_matches_quadrature_at_random_points():
    rng = np.random.default_rng(11)
    pieces = dim2_quadrature_decomposition("K") + dim2_quadrature_decomposition("G")
    assert len(pieces) >= 5
    for exps, coeff, shifts in pieces:
        f = family_integral_dim2(exps)
        for _ in range(25):
            s = float(rng.uniform(0.05, 20.0))
            t = float(rng.uniform(0.05, 20.0)) if len(exps) == 3 else 1.0
            closed = eval_function(f, s, t)
            quad = quad_r_integral(exps, s, t)
            assert abs(closed - quad) <= 1e-9 * max(1.0, abs(quad)), (exps, s, t)


def test_integrate_folds_prefactor_shift_and_half_measure():
    sig = sig_of("1 * b0^2 * k * GradK[a] * b0^2 * k * GradK[b] * b0 * Xi2^3 * Ginv[a,b]")
    value = integrate_dim2(sig)
    raw = family_integral_dim2((2, 2, 1))
    s, t = 1.7, 0.6
    assert abs(eval_function(value, s, t)
               - 0.5 * s * eval_function(raw, s, t)) < 1e-12


# --------------------------------------------------------------------------
# dim >= 4 radial integration


def test_dim4_family_values():
    assert sp.simplify(family_value_dim_m((3, 1), 4) - 1 / S) == 0
    assert sp.simplify(family_value_dim_m((1, 1), 4) - 1 / S) == 0
    assert sp.simplify(family_value_dim_m((2, 2, 1), 4) - 1 / (S**3 * T)) == 0


def test_dim6_derivative_oracle():
    val = family_value_dim_m((2, 1), 6)
    assert sp.simplify(val.subs(S, 1)) == 3


def test_integrate_dim_m_requires_even_dimension_at_least_four():
    sig = sig_of("1 * b0^2 * k * HessK[a,b] * b0 * Xi2 * Ginv[a,b]")
    with pytest.raises(ValueError):
        integrate_dim_m(sig, 2)
    with pytest.raises(ValueError):
        integrate_dim_m(sig, 5)


def test_scalar_limit_ladder():
    # F(1) = (m/2)!/4: the derivative formula is positive at every even m
    expected = {2: 0.25, 4: 0.5, 6: 1.5, 8: 6.0}
    for m, want in expected.items():
        f = scalar_profile(m)
        assert abs(eval_function(f, 1.0) - want) < 1e-10


# --------------------------------------------------------------------------
# derived reports


def test_dim2_one_variable_closed_form():
    report = derive_curvature(2, "kdelta")
    assert report.K.render() == "(-2*s + (s + 1)*log(s) + 2) / (2*(s - 1)^3)"


def test_dim2_two_variable_closed_form_parts():
    # minus the commonly tabulated closed form, the sign for which the
    # Gauss-Bonnet residual vanishes (see the report note and the oracle test)
    report = derive_curvature(2, "kdelta")
    d = (S - 1) ** 2 * S * (T - 1) ** 2 * (S * T - 1) ** 3
    want = {
        "log_s": -((S * T - 1) ** 3) / d,
        "one": (S - 1) * (T - 1) * (S * (T - 2) + 1) * (S * T - 1) / d,
        "log_st": (S - 1) ** 2 * (S * T * (2 * T - 1) - 1) / d,
    }
    for tag, expr in want.items():
        assert sp.simplify(report.G.parts[tag] - expr) == 0


def test_dim2_functions_satisfy_limit_relation():
    # the two-variable channel at the diagonal corner must offset the
    # one-variable limit for the flat total-curvature identity to hold
    report = derive_curvature(2, "kdelta")
    k1 = eval_function(report.K, 1.0)
    g11 = eval_function(report.G, 1.0, 1.0)
    assert abs(k1 - 1.0 / 12.0) < 1e-8
    assert abs(g11 + 1.0 / 12.0) < 1e-8


def test_dim4_channels_vanish_exactly():
    report = derive_curvature(4, "kdelta")
    assert report.K.is_zero()
    assert report.G.is_zero()
    assert report.c_scalar == Fraction(1, 12)


def test_dim4_scalar_normalization_chain():
    report = derive_curvature(4, "kdelta")
    rec = dict(report.normalization)
    vol_coeff = Fraction(rec["sphere_volume_coeff"])
    pi_power = int(rec["sphere_volume_pi_power"])
    # c * Vol(S^3) * (2 pi)^-4 = (1/96) pi^-2 = (4 pi)^-2 / 6
    coeff = report.c_scalar * vol_coeff * Fraction(1, 2**4)
    assert (coeff, pi_power - 4) == (Fraction(1, 96), -2)
    assert Fraction(1, 96) == Fraction(1, 6) * Fraction(1, 16)


def test_dim6_closed_forms():
    report = derive_curvature(6, "kdelta")
    assert report.K.render() == "(-1) / (6*s^2)"
    assert report.G.render() == "(1) / (3*s^3*t^2)"
    assert report.c_scalar == Fraction(1, 6)


def test_nc4tori_closed_forms_and_notes():
    report = derive_curvature(4, "nc4tori")
    assert report.K.render() == "(-3) / (4*s)"
    assert report.G.render() == "(-3) / (8*s^2*t)"
    assert report.c_scalar == Fraction(1, 12)
    joined = " ".join(report.notes)
    assert "1/(4*s)" in joined  # discrepancy with tabulated magnitude recorded
    assert "-1/(8*s^2*t)" in joined
    assert "recorded" in joined


def test_k_prefactor_power_pattern():
    for m, operator in [(2, "kdelta"), (4, "kdelta"), (6, "kdelta"), (4, "nc4tori")]:
        report = derive_curvature(m, operator)
        powers = dict(report.k_powers)
        assert powers == {
            "hess": -m // 2,
            "gradgrad": -m // 2 - 1,
            "scalar": -m // 2 + 1,
        }


def test_operator_validation():
    with pytest.raises(ValueError):
        derive_curvature(3, "kdelta")
    with pytest.raises(ValueError):
        derive_curvature(2, "nc4tori")
    with pytest.raises(ValueError):
        derive_curvature(4, "unknown")


# --------------------------------------------------------------------------
# serialization


def test_json_report_is_deterministic_and_parseable():
    a = derive_curvature(2, "kdelta").to_json()
    b = derive_curvature(2, "kdelta").to_json()
    assert a == b
    doc = json.loads(a)
    assert list(doc) == ["dim", "operator", "normalization", "k_powers", "K", "G",
                         "c_scalar", "notes"]
    assert doc["dim"] == 2
    assert doc["K"]["render"].startswith("(-2*s")


def test_text_report_mentions_all_channels():
    text = derive_curvature(4, "nc4tori").to_text()
    assert "modular curvature report" in text
    assert "K(s)" in text and "G(s,t)" in text and "c_scalar" in text


# --------------------------------------------------------------------------
# numeric evaluation


def test_eval_away_from_singular_set():
    report = derive_curvature(2, "kdelta")
    want = (3 * math.log(2) - 2) / 2
    assert abs(eval_function(report.K, 2.0) - want) < 1e-12


def test_eval_limit_fills_the_diagonal():
    report = derive_curvature(2, "kdelta")
    for s, t in [(1.0, 1.0), (1.0, 2.0), (2.0, 0.5), (0.5, 2.0)]:
        direct = eval_function(report.G, s, t)
        nudged = eval_function(report.G, s * (1 + 3e-7), t * (1 + 3e-7))
        assert abs(direct - nudged) < 1e-6


def test_eval_rejects_nonpositive_arguments():
    report = derive_curvature(2, "kdelta")
    with pytest.raises(ValueError):
        eval_function(report.K, 0.0)
    with pytest.raises(ValueError):
        eval_function(report.G, 1.0, -2.0)


def test_symbolic_function_equality_and_zero():
    f = family_integral_dim2((1, 1))
    g = SymbolicFunction({"log_s": sp.Rational(1, 1) / (S - 1)})
    assert f == g
    assert (f - g).is_zero()
    assert not f.is_zero()
