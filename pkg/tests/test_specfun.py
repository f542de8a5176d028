import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sci_integrate

from effcap.errors import ConvergenceError
from effcap.specfun import (
    QuadratureSpec,
    e1_scaled,
    exp_integral_e1,
    exp_integral_ei,
    integrate,
    ln_gamma,
    log_lower_inc_gamma,
    log_tricomi_u,
    log_upper_inc_gamma,
    lower_inc_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
    tricomi_u,
    upper_inc_gamma,
)

mpmath.mp.dps = 30


# --- incomplete gamma -------------------------------------------------------

def test_upper_gamma_unit_shape_is_exponential_tail():
    for x in (0.0, 0.3, 1.0, 7.5, 40.0):
        assert upper_inc_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-14)


def test_upper_gamma_against_quadrature():
    # int_7^inf t^1.5 e^-t dt, 30-digit quadrature
    assert upper_inc_gamma(2.5, 7.0) == pytest.approx(0.020750227257978491628, rel=1e-12)


def test_lower_gamma_zero_argument():
    assert lower_inc_gamma(3.0, 0.0) == 0.0
    assert log_lower_inc_gamma(3.0, 0.0) == -math.inf


@pytest.mark.parametrize("a,x", [(0.5, 0.1), (0.5, 3.0), (3.0, 2.0), (3.0, 25.0), (12.5, 11.0), (20.0, 50.0), (0.05, 1e-3)])
def test_incomplete_gamma_matches_mpmath(a, x):
    up = float(mpmath.gammainc(a, x, mpmath.inf))
    lo = float(mpmath.gammainc(a, 0, x))
    assert upper_inc_gamma(a, x) == pytest.approx(up, rel=1e-12)
    assert lower_inc_gamma(a, x) == pytest.approx(lo, rel=1e-12)


def test_log_forms_reach_below_double_range():
    # x = exp(-2300): Gamma(a, x) -> Gamma(a), gamma(a, x) ~ x^a / a
    a, log_x = 2.7, -2300.0
    assert log_upper_inc_gamma(a, 0.0, log_x=log_x) == pytest.approx(math.lgamma(a), rel=1e-14)
    assert log_lower_inc_gamma(a, 0.0, log_x=log_x) == pytest.approx(a * log_x - math.log(a), rel=1e-14)
    # a < 1: Gamma(a, x) still tends to Gamma(a)
    assert log_upper_inc_gamma(0.4, 0.0, log_x=log_x) == pytest.approx(math.lgamma(0.4), rel=1e-12)


def test_gamma_zero_shape_is_e1():
    for x in (1e-6, 0.2, 1.0, 9.0):
        assert upper_inc_gamma(0.0, x) == pytest.approx(float(mpmath.e1(x)), rel=1e-13)
    with pytest.raises(ValueError):
        upper_inc_gamma(0.0, 0.0)


def test_incomplete_gamma_domain_errors():
    with pytest.raises(ValueError):
        lower_inc_gamma(-1.0, 1.0)
    with pytest.raises(ValueError):
        upper_inc_gamma(1.0, -0.5)
    with pytest.raises(ValueError):
        ln_gamma(0.0)


@given(st.floats(0.5, 20.0), st.floats(0.0, 50.0))
def test_incomplete_gamma_halves_sum_to_gamma(a, x):
    total = lower_inc_gamma(a, x) + upper_inc_gamma(a, x)
    assert total == pytest.approx(math.gamma(a), rel=1e-10)


@given(st.floats(0.5, 20.0), st.floats(0.0, 50.0))
def test_regularized_pair_sums_to_one(a, x):
    assert reg_lower_inc_gamma(a, x) + reg_upper_inc_gamma(a, x) == pytest.approx(1.0, abs=1e-13)


def test_random_points_against_mpmath():
    rng = np.random.default_rng(7)
    for a, x in zip(rng.uniform(0.05, 30, 200), rng.uniform(0, 80, 200)):
        ref = mpmath.gammainc(a, x, mpmath.inf)
        assert log_upper_inc_gamma(a, x) == pytest.approx(float(mpmath.log(ref)), rel=1e-12, abs=1e-12)


# --- Tricomi U ---------------------------------------------------------------

def test_tricomi_power_identity_examples():
    for a, z in ((0.5, 0.01), (1.0, 1.0), (3.0, 0.3), (7.0, 50.0)):
        assert tricomi_u(a, a + 1.0, z) * z ** a == pytest.approx(1.0, rel=1e-12)


@given(st.floats(0.5, 10.0), st.floats(0.01, 50.0))
def test_tricomi_power_identity(a, z):
    assert tricomi_u(a, a + 1.0, z) * z ** a == pytest.approx(1.0, rel=1e-8)


def test_tricomi_unit_case():
    # U(1, 1, 1) = e E1(1) = int_0^inf e^-t / (1 + t) dt
    assert tricomi_u(1.0, 1.0, 1.0) == pytest.approx(0.59634736232319407434, rel=1e-13)


def test_tricomi_representative_selection_term():
    theta_tilde = 0.01 * 100 / math.log(2)
    assert tricomi_u(3.0, 3.0 - theta_tilde + 1.0, 0.3) == pytest.approx(1.9638697856422172715, rel=1e-12)


@pytest.mark.parametrize("a,b,z", [(0.3, 2.0, 0.05), (2.0, -40.0, 0.01), (9.0, 9.0 - 1442.7 + 1.0, 3e-3), (0.7, 0.2, 12.0)])
def test_tricomi_against_mpmath(a, b, z):
    ref = float(mpmath.log(mpmath.hyperu(a, b, z)))
    assert log_tricomi_u(a, b, z) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_tricomi_decreasing_in_z():
    for a, b in ((0.6, 1.3), (3.0, 2.56), (5.0, -10.0)):
        values = [tricomi_u(a, b, z) for z in np.geomspace(0.01, 40, 25)]
        assert all(v1 < v0 for v0, v1 in zip(values, values[1:]))


def test_tricomi_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        tricomi_u(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        tricomi_u(1.0, 1.0, 0.0)


def test_tricomi_reports_exhausted_subdivisions():
    with pytest.raises(ConvergenceError):
        tricomi_u(2.0, -300.0, 1e-3, QuadratureSpec(rel_tol=1e-15, max_subdivisions=1))


# --- exponential integrals ---------------------------------------------------

def test_ei_reference_values():
    assert exp_integral_ei(-1.0) == pytest.approx(-0.21938393439552027368, rel=1e-13)
    assert exp_integral_ei(-0.1) == pytest.approx(-1.8229239584193906159, rel=1e-13)
    assert exp_integral_ei(-20.0) == pytest.approx(-9.8355252906498816904e-11, rel=1e-12)


def test_ei_tail_bound():
    v = exp_integral_ei(-20.0)
    assert v < 0 and abs(v) < math.exp(-20.0) / 19.0


@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_ei_against_scipy_quadrature(x):
    ref, _ = sci_integrate.quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=0, epsrel=1e-12)
    assert -exp_integral_ei(-x) == pytest.approx(ref, rel=1e-8)


def test_ei_domain():
    for x in (0.0, 2.0):
        with pytest.raises(ValueError):
            exp_integral_ei(x)


@given(st.floats(1e-8, 600.0))
def test_e1_scaled_consistent(x):
    ref = float(mpmath.e1(x) * mpmath.exp(x))
    assert e1_scaled(x) == pytest.approx(ref, rel=1e-12)
    if x < 600:
        assert exp_integral_e1(x) == pytest.approx(float(mpmath.e1(x)), rel=1e-12)


# --- quadrature ----------------------------------------------------------------

def test_integrate_polynomial_and_smooth():
    value, err = integrate(lambda t: t ** 3, [0.0, 2.0])
    assert value == pytest.approx(4.0, rel=1e-14)
    value, _ = integrate(np.exp, [0.0, 0.5, 1.0])
    assert value == pytest.approx(math.e - 1.0, rel=1e-14)


def test_integrate_endpoint_singularity():
    value, _ = integrate(lambda t: 1.0 / np.sqrt(t), [0.0, 1.0], QuadratureSpec(rel_tol=1e-10))
    assert value == pytest.approx(2.0, rel=1e-9)


def test_integrate_raises_when_budget_exhausted():
    with pytest.raises(ConvergenceError):
        integrate(lambda t: np.sin(1.0 / t), [1e-6, 1.0], QuadratureSpec(rel_tol=1e-14, max_subdivisions=3))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
