import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from sgff.asym import (
    AsymSeries,
    ZeroModeCounter,
    build_W_series,
    exponential_series,
    series_eval,
    series_integrate_neg_halfline,
    series_integrate_tail,
    series_product,
    series_shift,
    w_coeff_a,
    w_coeff_b,
    w_series_for_factor,
)
from sgff.errors import SeriesError
from sgff.kernels import KernelConfig, eval_W

XIS = (0.34, 1.17, 2.23)


def S(coeffs, exps, cutoff=math.inf, direction=1):
    return AsymSeries(np.array(coeffs, dtype=complex), np.array(exps, dtype=complex), cutoff, direction)


# -- coefficients -------------------------------------------------------------


def test_a_rational_override():
    assert abs(w_coeff_a(1, 2.0, 1) + 1j) < 1e-14


def test_a_generic():
    assert abs(w_coeff_a(2, 8.0, 1) + 1j * math.sqrt(2) / 4) < 1e-14


def test_a_conjugate_in_s():
    for xi in XIS:
        for k in (1, 2, 3):
            assert abs(w_coeff_a(k, xi, -1) - np.conj(w_coeff_a(k, xi, 1))) < 1e-13


def test_b_cases():
    for xi in XIS:
        assert abs(w_coeff_b(2, xi) - 0.5) < 1e-14
    assert w_coeff_b(1, 2.0) == 0
    xi = 1.17
    assert abs(w_coeff_b(1, xi) - (-(1j ** 2) / math.tan(math.pi * xi / 2))) < 1e-13


# -- series objects -----------------------------------------------------------------


def test_normalization_merges_and_sorts():
    A = S([1, 2, 3], [-2, -1, -1 + 1e-14], direction=1)
    assert len(A) == 2
    assert np.allclose(A.exps.real, [-1, -2])
    assert abs(A.coeffs[0] - 5) < 1e-14


def test_normalization_drops_beyond_cutoff():
    A = S([1, 1, 1], [-1, -2, -3], cutoff=2.0)
    assert np.allclose(A.exps.real, [-1, -2])


def test_direction_validation():
    with pytest.raises(SeriesError):
        S([1], [0], direction=0)
    with pytest.raises(SeriesError):
        series_product(S([1], [-1], direction=1), S([1], [1], direction=-1))


def test_product_single_terms():
    P = series_product(S([1], [-1]), S([2], [-2]))
    assert len(P) == 1 and abs(P.coeffs[0] - 2) < 1e-15 and abs(P.exps[0] + 3) < 1e-15


def test_product_cutoff_rule():
    A = S([1, 1], [-1, -2], cutoff=2.0)
    P = series_product(A, A)
    # cutoff = min(2 + 1, 2 + 1) = 3: exp(-4x) is not accurate and is dropped
    assert P.cutoff == pytest.approx(3.0)
    assert np.allclose(P.exps.real, [-2, -3])
    assert np.allclose(P.coeffs, [1, 2])


def test_product_identity():
    A = S([1, 0.5j], [-1, -2.5], cutoff=3.0)
    P = series_product(A, exponential_series(1.0, 0.0, 1))
    assert P.cutoff == A.cutoff
    assert np.allclose(P.coeffs, A.coeffs) and np.allclose(P.exps, A.exps)


def test_shift_examples():
    A = series_shift(S([1], [-1]), math.log(2))
    assert abs(A.coeffs[0] - 0.5) < 1e-15
    B = S([1, 2j], [-1, -2 + 1j], cutoff=4.0)
    C = series_shift(B, 0.0)
    assert np.allclose(C.coeffs, B.coeffs) and C.cutoff == B.cutoff


def test_eval_examples():
    assert abs(series_eval(S([1], [-1]), 0.0) - 1) < 1e-15
    assert abs(series_eval(S([1, -1], [-1, -2]), math.log(2)) - 0.25) < 1e-15
    x = np.array([0.0, 1.0])
    assert series_eval(S([1], [-1]), x).shape == (2,)
    assert series_eval(S([], []), 1.0) == 0


def test_neg_halfline_integral_examples():
    assert abs(series_integrate_neg_halfline(S([2], [-3], direction=-1)) + 2 / 3) < 1e-15
    assert series_integrate_neg_halfline(S([], [], direction=-1)) == 0
    counter = ZeroModeCounter()
    val = series_integrate_neg_halfline(S([1, 1], [0, -1], direction=-1), counter)
    assert abs(val + 1) < 1e-15
    assert counter.dropped == 1 and abs(counter.dropped_weight - 1) < 1e-15
    with pytest.raises(SeriesError):
        series_integrate_neg_halfline(S([1], [-1], direction=1))


def test_tail_integral_matches_quadrature():
    # convergent case: the continuation rule is the ordinary integral
    A = S([1.5 - 0.2j, 0.3j], [-1.2 + 0.4j, -2.7], direction=1)
    ref = integrate.quad(lambda t: series_eval(A, t).real, 0.5, np.inf)[0] + 1j * integrate.quad(
        lambda t: series_eval(A, t).imag, 0.5, np.inf)[0]
    assert abs(series_integrate_tail(A, 0.5) - ref) < 1e-10


def test_reflect():
    A = S([1, 2], [-1, -3 + 0.5j], cutoff=3.5, direction=1)
    R = A.reflect()
    assert R.direction == -1 and R.cutoff == A.cutoff
    for x in (-2.0, -5.0 + 0.3j):
        assert abs(series_eval(R, x) - series_eval(A, -x)) < 1e-14


# -- W expansion ------------------------------------------------------------------


def test_free_fermion_series():
    cfg = KernelConfig(1.0)
    for s in (1, -1):
        ser = build_W_series(1.0, s, 12)
        x = 8.0 * s
        assert abs(ser(x) / eval_W(x, cfg) - 1) < 1e-8
        assert abs(ser(10.0 * s) / (-2 / math.cosh(10.0)) - 1) < 1e-7
        # leading term -4 exp(-s x)
        assert abs(ser.coeffs[0] + 4) < 1e-12 and abs(ser.exps[0] + s) < 1e-14


@pytest.mark.parametrize("xi", XIS)
def test_series_tail_agreement(xi):
    cfg = KernelConfig(xi)
    for s in (1, -1):
        ser = build_W_series(xi, s, 12, cfg)
        x = 6.0 * s + 0.3j
        assert abs(ser(x) / eval_W(x, cfg) - 1) < 1e-6


@pytest.mark.parametrize("xi", XIS)
def test_depth_monotonicity(xi):
    cfg = KernelConfig(xi)
    w = eval_W(6.0, cfg)
    errs = [abs(build_W_series(xi, 1, d, cfg)(6.0) / w - 1) for d in (2, 4, 8)]
    # below roundoff the error no longer decreases
    assert all(b <= a or b < 1e-14 for a, b in zip(errs, errs[1:]))


def test_series_cutoff_declared():
    for xi in XIS:
        ser = build_W_series(xi, 1, 12)
        lead = (xi + 1) / (2 * xi)
        assert ser.cutoff == pytest.approx(lead + 12 * min(1.0, 2.0 / xi))
        assert np.all(ser.decay_rates <= ser.cutoff + 1e-9)


def test_conjugation_rule():
    for xi in XIS:
        p = build_W_series(xi, 1, 8)
        m = build_W_series(xi, -1, 8)
        assert np.allclose(m.coeffs, np.conj(p.coeffs), atol=1e-12)
        assert np.allclose(m.exps, -p.exps, atol=1e-14)


def test_rational_xi_series_continuity():
    xi0 = 2.0 / 3.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        vals = [build_W_series(xi0 * f, 1, 12)(6.0) for f in (1 - 1e-6, 1.0, 1 + 1e-6)]
    assert abs(vals[0] / vals[2] - 1) < 1e-4
    assert abs(vals[1] / vals[2] - 1) < 1e-4


def test_factor_series():
    xi = 1.17
    cfg = KernelConfig(xi)
    theta = 0.4 - 0.3j
    for sign in (1, -1):
        for direction in (1, -1):
            ser = w_series_for_factor(xi, sign, theta, direction, 12, cfg)
            x = 9.0 * direction
            assert abs(ser(x) / eval_W(sign * (x - theta), cfg) - 1) < 1e-8


def test_depth_validation():
    with pytest.raises(ValueError):
        build_W_series(1.17, 1, 0)
    with pytest.raises(ValueError):
        build_W_series(1.17, 2, 4)


# -- property tests ---------------------------------------------------------------

coef = st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def small_series(draw, direction=1):
    n = draw(st.integers(1, 4))
    rates = draw(st.lists(st.floats(0.2, 3.0), min_size=n, max_size=n, unique=True))
    freqs = draw(st.lists(st.floats(-1.0, 1.0), min_size=n, max_size=n))
    cs = draw(st.lists(coef, min_size=n, max_size=n))
    exps = [-direction * r + 1j * f for r, f in zip(rates, freqs)]
    return S(cs, exps, direction=direction)


points = st.floats(0.0, 2.0)


def _close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


@settings(max_examples=100, deadline=None)
@given(small_series(), small_series(), points)
def test_product_evaluates_to_product(A, B, x):
    assert _close(series_eval(series_product(A, B), x), series_eval(A, x) * series_eval(B, x))


@settings(max_examples=100, deadline=None)
@given(small_series(), small_series(), small_series(), points)
def test_product_commutative_associative(A, B, C, x):
    assert _close(series_eval(A * B, x), series_eval(B * A, x))
    assert _close(series_eval((A * B) * C, x), series_eval(A * (B * C), x))


@settings(max_examples=100, deadline=None)
@given(small_series(), st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False), points)
def test_shift_law(A, a, x):
    assert _close(series_eval(series_shift(A, a), x), series_eval(A, x + a))


@settings(max_examples=100, deadline=None)
@given(small_series(direction=-1), st.floats(-1.0, 1.0))
def test_halfline_rule_and_shift(A, a):
    # term-wise rule: int_{-inf}^{x0} c e^{alpha x} dx = c e^{alpha x0} / alpha
    direct = series_integrate_tail(A, a)
    expected = complex(np.sum(A.coeffs * np.exp(A.exps * a) / A.exps))
    assert _close(direct, expected)
    # integrating the shifted series from 0 is integrating the original up to a
    assert _close(series_integrate_neg_halfline(series_shift(A, a)), direct)


@settings(max_examples=100, deadline=None)
@given(small_series(direction=-1))
def test_halfline_rule_is_convergent_integral(A):
    # every term decays as x -> -inf here, so the rule is the ordinary integral
    f = lambda t: series_eval(A, t)
    ref = integrate.quad(lambda t: f(t).real, -np.inf, 0)[0] + 1j * integrate.quad(lambda t: f(t).imag, -np.inf, 0)[0]
    assert abs(series_integrate_neg_halfline(A) - ref) < 1e-8 * max(1.0, abs(ref))
