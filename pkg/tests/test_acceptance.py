"""Acceptance criteria 1-9, one test per criterion.

Every tolerance is pinned here.  Each test prints one ``PASS``/``FAIL`` line
(collected again in the terminal summary by ``conftest.py``) before it
asserts, so a failing criterion still reports its measured numbers.
"""

import math
import re
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from reference import gl_line, ref_C1, ref_C2

from sgff.asym import (
    AsymSeries,
    build_W_series,
    series_eval,
    series_integrate_neg_halfline,
    series_integrate_tail,
    series_product,
    series_shift,
)
from sgff.axioms import free_fermion_ff4, free_fermion_ff6, run_axiom_suite
from sgff.config import FFConfig
from sgff.contour import deformation_contributions
from sgff.formfactors import form_factor
from sgff.kernels import KernelConfig, const_C1, const_C2, eval_G, eval_Gbar, eval_S, eval_SR, eval_ST, eval_W

pytestmark = pytest.mark.acceptance

PI = math.pi
XIS = (0.34, 1.17, 2.23)

# -- pinned tolerances --------------------------------------------------------------
TOL_FREE_FERMION = 1e-10
RUNTIME_FREE_FERMION = 300.0
TOL_W4 = {"W4_0": 5e-4, "W4_1": 1e-5, ("W4_2", 2.23): 1e-11, ("W4_2", 0.34): 1e-9}
TOL_KIN4 = 1e-5
TOL_W6_1 = 1e-6
TOL_KIN6 = 1e-3
RUNTIME_SIX = 3600.0
TOL_GWW = 1e-9
TOL_C = 1e-9
TOL_W_DIRECT = 1e-9
TOL_S_ORDER = 1e-10
TOL_S_UNITARY = 1e-9
TOL_TAIL = 1e-6
RATE_SLACK = 0.1
TOL_SERIES = 1e-12
TOL_CONTOUR = 1e-7
TOL_RATIONAL = 1e-4
TOL_ZERO_MODE = 1e-3

# printed LHS and RHS entries; the W6_1 xi=1.17 LHS carries the corrected imaginary part
PRINTED_W4 = {
    ("W4_0", 2.23): ("0.45330-1.4092i", "0.45336-1.4093i"),
    ("W4_0", 0.34): ("0.00089-0.051i", "0.00091-0.049i"),
    ("W4_1", 2.23): ("0.453360-1.4093198i", "0.453358-1.4093196i"),
    ("W4_1", 0.34): ("0.0009063-0.04937438i", "0.0009065-0.04937441i"),
    ("W4_2", 2.23): ("-0.04255089122137+0.03246926430660i", "-0.04255089122139+0.03246926430663i"),
    ("W4_2", 0.34): ("-0.043292833089+0.00219194033i", "-0.043292833083+0.00219194037i"),
}
PRINTED_KIN4 = {
    2.23: ("0.8211182+0.7147548i", "0.8211175+0.7147545i"),
    1.17: ("-0.2812726+0.0213804i", "-0.2812724+0.0213801i"),
    0.34: ("-0.4726029-0.6620907i", "-0.4726070-0.6620917i"),
}
PRINTED_SIX = {
    ("W6_1", 1.17): ("-0.50782662-2.33030973i", "-0.50782660-2.33030977i"),
    ("W6_1", 0.34): ("-0.3945330-0.3095434i", "-0.3945333-0.3095431i"),
    ("kin6", 1.17): ("-2.84279-1.63925i", "-2.84263-1.63902i"),
    ("kin6", 0.34): ("-0.0151096-0.147483i", "-0.0151107-0.147442i"),
}

_NUM = re.compile(r"^([+-]?\d+\.(\d+))([+-]\d+\.(\d+))i$")


def printed(text):
    """Value of a printed entry and the unit of the last digit of each part."""
    m = _NUM.match(text)
    assert m, text
    return complex(float(m.group(1)), float(m.group(3))), 10.0 ** -len(m.group(2)), 10.0 ** -len(m.group(4))


def within_last_digit(value, text):
    ref, ure, uim = printed(text)
    # half an ulp of slack for the decimal-to-binary conversion of the entry
    return abs(value.real - ref.real) <= ure * (1 + 1e-9) and abs(value.imag - ref.imag) <= uim * (1 + 1e-9)


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


# -- 1 ------------------------------------------------------------------------------


def test_criterion_1_free_fermion(acceptance):
    rng = np.random.default_rng(1)
    ab = 1.25
    cfg = FFConfig(1.0, a_over_beta=ab)
    t0 = time.perf_counter()
    errs, cancel = [], []
    for _ in range(5):
        for n, ref, sig in ((4, free_fermion_ff4, "--++"), (6, free_fermion_ff6, "---+++")):
            th = tuple(rng.uniform(5.0, 10.0, n) + 1j * PI * rng.choice([-1, 0, 1], n))
            r = form_factor(sig, th, cfg)
            errs.append(rel(r.value, ref(th, ab)))
            cancel.append(r.diagnostics["cancellation"])
    elapsed = time.perf_counter() - t0
    worst = int(np.argmax(errs))
    ok = max(errs) < TOL_FREE_FERMION and elapsed < RUNTIME_FREE_FERMION
    acceptance(1, ok, f"max rel err {max(errs):.1e} (tol {TOL_FREE_FERMION:.0e}, cancellation factor "
                      f"{cancel[worst]:.1e} there), {elapsed:.1f}s")
    # the errors are roundoff amplified by the term cancellation, nothing larger
    assert all(e / c < 1e-15 for e, c in zip(errs, cancel))
    assert ok


# -- 2 ------------------------------------------------------------------------------


def test_criterion_2_four_particle_values(acceptance):
    lines = []
    ok = True
    for xi in (2.23, 0.34):
        reps = {r.label: r for r in run_axiom_suite(4, FFConfig(xi, a_over_beta=1.25))}
        for label in ("W4_0", "W4_1", "W4_2"):
            rep = reps[label]
            tol = TOL_W4.get((label, xi), TOL_W4.get(label))
            ident = rep.rel_err <= tol
            lhs_txt, rhs_txt = PRINTED_W4[(label, xi)]
            digits = within_last_digit(rep.lhs, lhs_txt) and within_last_digit(rep.rhs, rhs_txt)
            ok &= ident and digits
            lines.append(f"{label} xi={xi}: identity {rep.rel_err:.1e}/{tol:.0e} "
                         f"printed {'ok' if digits else 'off by ' + format(rel(rep.lhs, printed(lhs_txt)[0]), '.1e')}")
    acceptance(2, ok, "; ".join(lines))
    assert ok


# -- 3 ------------------------------------------------------------------------------


def test_criterion_3_kin4_residues(acceptance):
    worst = 0.0
    for xi, (lhs_txt, rhs_txt) in PRINTED_KIN4.items():
        rep = {r.label: r for r in run_axiom_suite(4, FFConfig(xi, a_over_beta=1.0))}["kin4"]
        worst = max(worst, rel(rep.lhs, printed(lhs_txt)[0]), rel(rep.rhs, printed(rhs_txt)[0]))
    ok = worst <= TOL_KIN4
    acceptance(3, ok, f"kin4 max rel err vs printed {worst:.1e} (tol {TOL_KIN4:.0e})")
    assert ok


# -- 4 ------------------------------------------------------------------------------


def test_criterion_4_six_particle_values(acceptance):
    t0 = time.perf_counter()
    errs = {}
    for xi in (1.17, 0.34):
        reps = {r.label: r for r in run_axiom_suite(6, FFConfig(xi, a_over_beta=1.25, Ni=2000))}
        for label in ("W6_1", "kin6"):
            lhs_txt, rhs_txt = PRINTED_SIX[(label, xi)]
            rep = reps[label]
            errs[(label, xi)] = max(rel(rep.lhs, printed(lhs_txt)[0]), rel(rep.rhs, printed(rhs_txt)[0]))
        assert reps["W6_0"].passed
    elapsed = time.perf_counter() - t0
    w6 = max(v for (lab, _), v in errs.items() if lab == "W6_1")
    k6 = max(v for (lab, _), v in errs.items() if lab == "kin6")
    ok = w6 <= TOL_W6_1 and k6 <= TOL_KIN6 and elapsed < RUNTIME_SIX
    detail = ", ".join(f"{lab} xi={xi} {v:.1e}" for (lab, xi), v in errs.items())
    acceptance(4, ok, f"{detail} (tol W6_1 {TOL_W6_1:.0e}, kin6 {TOL_KIN6:.0e}), {elapsed:.1f}s")
    assert ok


# -- 5 ------------------------------------------------------------------------------


def _grid(xs, ys):
    return (np.asarray(xs)[:, None] + 1j * np.asarray(ys)[None, :]).ravel()


def test_criterion_5_identities(acceptance):
    worst = {}

    def note(name, err):
        worst[name] = max(worst.get(name, 0.0), float(err))

    for xi in XIS:
        cfg = KernelConfig(xi)
        # Gbar(th) W(th + i pi/2) W(th - i pi/2) = 1 for |Im th| <= pi/4
        g = _grid([-2.0, -1.0, 0.5, 1.5, 2.5], [-PI / 4, -PI / 8, PI / 8, PI / 4])
        note("GWW", np.max(np.abs(eval_Gbar(g, cfg) * eval_W(g + 0.5j * PI, cfg) * eval_W(g - 0.5j * PI, cfg) - 1)))
        note("C1", max(rel(eval_G(-1j * PI, cfg), const_C1(cfg)), rel(eval_G(-1j * PI, cfg), ref_C1(xi))))
        c2 = const_C2(cfg)
        note("C2", max(rel(4 / (eval_W(0.5j * PI, cfg) * xi * np.sin(PI / xi)) ** 2, c2), rel(ref_C2(xi), c2)))
        # the bare integral converges for |1 + Im th/pi| < xi + 1/2 (xi < 1) or < 3/2 (xi >= 1)
        half = min(xi + 0.5, 1.5)
        ys = -PI * (1 + half * np.array([-0.6, -0.2, 0.2, 0.6]))
        g = _grid([-2.2, -1.1, 0.3, 1.4, 2.6], ys)
        direct = eval_W(g, KernelConfig(xi, reg_order=0))
        note("W direct", np.max(np.abs(direct / eval_W(g, KernelConfig(xi, reg_order=3)) - 1)))
        th = np.concatenate([np.linspace(-4.0, 4.0, 16), [0.5 + 0.3j, -1.0 + 1.2j, 2.0 + 2.0j, -0.3 + 0.5j]])
        a = eval_S(th, KernelConfig(xi, reg_order=1))
        b = eval_S(th, KernelConfig(xi, reg_order=4))
        note("S order", np.max(np.abs(a / b - 1)))
        note("S unitarity", np.max(np.abs(eval_S(th, cfg) * eval_S(-th, cfg) - 1)))
        real = np.linspace(-4.0, 4.0, 20) + 0.05
        st_, sr_ = eval_ST(real, cfg), eval_SR(real, cfg)
        note("S unitarity", np.max(np.abs(np.abs(st_) ** 2 + np.abs(sr_) ** 2 - 1)))
        note("S unitarity", np.max(np.abs(st_ * np.conj(sr_) + sr_ * np.conj(st_))))
    tols = {"GWW": TOL_GWW, "C1": TOL_C, "C2": TOL_C, "W direct": TOL_W_DIRECT,
            "S order": TOL_S_ORDER, "S unitarity": TOL_S_UNITARY}
    ok = all(worst[k] <= tols[k] for k in tols)
    acceptance(5, ok, ", ".join(f"{k} {worst[k]:.1e}/{tols[k]:.0e}" for k in tols))
    assert ok


# -- 6 ------------------------------------------------------------------------------


def test_criterion_6_tails(acceptance):
    worst_tail = 0.0
    worst_margin = math.inf
    fits = 0
    for xi in XIS:
        cfg = KernelConfig(xi)
        for s in (1, -1):
            x = 6.0 * s + 0.3j
            worst_tail = max(worst_tail, abs(build_W_series(xi, s, 12, cfg)(x) / eval_W(x, cfg) - 1))
            xs = s * np.array([6.0, 8.0, 10.0])
            w = eval_W(xs, cfg)
            for depth in (1, 2, 3):
                ser = build_W_series(xi, s, depth, cfg)
                err = np.abs(np.array([ser(v) for v in xs]) - w)
                # at Na=12 the error is at roundoff by x=6; a slope is only meaningful
                # while the error stays well above the accuracy of W itself
                if np.min(err / np.abs(w)) < 1e-12:
                    continue
                rate = -np.polyfit(np.abs(xs), np.log(err), 1)[0]
                worst_margin = min(worst_margin, rate - ser.cutoff)
                fits += 1
    ok = worst_tail < TOL_TAIL and worst_margin >= -RATE_SLACK and fits >= 6
    acceptance(6, ok, f"Na=12 rel err at |Re x|=6 {worst_tail:.1e} (tol {TOL_TAIL:.0e}); "
                      f"{fits} rate fits, min rate - cutoff {worst_margin:+.2f} (>= -{RATE_SLACK})")
    assert ok


# -- 7 ------------------------------------------------------------------------------

_coef = st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def _series(draw, direction=1):
    n = draw(st.integers(1, 4))
    rates = draw(st.lists(st.floats(0.2, 3.0), min_size=n, max_size=n, unique=True))
    freqs = draw(st.lists(st.floats(-1.0, 1.0), min_size=n, max_size=n))
    cs = draw(st.lists(_coef, min_size=n, max_size=n))
    exps = [-direction * r + 1j * f for r, f in zip(rates, freqs)]
    return AsymSeries(np.array(cs, dtype=complex), np.array(exps, dtype=complex), math.inf, direction)


_SERIES_ERRS = []


@settings(max_examples=100, deadline=None, derandomize=True)
@given(_series(), _series(), _series(), _series(direction=-1),
       st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
       st.floats(0.0, 2.0), st.floats(-1.0, 1.0))
def _series_laws(A, B, C, D, a, x, b):
    scale = max(1.0, abs(series_eval(A, x) * series_eval(B, x) * series_eval(C, x)))
    e = [
        abs(series_eval(series_product(A, B), x) - series_eval(A, x) * series_eval(B, x)),
        abs(series_eval(A * B, x) - series_eval(B * A, x)),
        abs(series_eval((A * B) * C, x) - series_eval(A * (B * C), x)),
        abs(series_eval(series_shift(A, a), x) - series_eval(A, x + a)),
    ]
    expected = complex(np.sum(D.coeffs * np.exp(D.exps * b) / D.exps))
    e.append(abs(series_integrate_tail(D, b) - expected) / max(1.0, abs(expected)))
    e.append(abs(series_integrate_neg_halfline(series_shift(D, b)) - expected) / max(1.0, abs(expected)))
    _SERIES_ERRS.append(max(max(e[:4]) / scale, max(e[4:])))


def test_criterion_7_series_algebra(acceptance):
    _SERIES_ERRS.clear()
    _series_laws()
    worst = max(_SERIES_ERRS)
    ok = worst <= TOL_SERIES and len(_SERIES_ERRS) >= 100
    acceptance(7, ok, f"{len(_SERIES_ERRS)} random series sets, max err {worst:.1e} (tol {TOL_SERIES:.0e})")
    assert ok


# -- 8 ------------------------------------------------------------------------------

CONTOUR_CASES = [
    # B, thetas, signs, xi, Im of the original contour (below every principal pole)
    (0.7 + 0.2j, (0.3, -0.5), (1, 1), 0.4, -PI / 2 - 0.4),
    (0.3 - 0.1j, (0.2 + 0.3j * PI, -0.4 - 0.9j * PI), (1, -1), 0.34, -0.3 * PI),
    (-0.5 + 0.3j, (0.1, 0.5 + 0.2j * PI, -0.3 - 0.1j * PI), (1, 1, 1), 1.17, -0.9 * PI),
]


def test_criterion_8_contour(acceptance):
    errs = []
    for B, thetas, signs, xi, c in CONTOUR_CASES:
        cfg = KernelConfig(xi)
        thetas = tuple(complex(t) for t in thetas)

        def A(x):
            out = np.exp(B * x)
            for t, s in zip(thetas, signs):
                out = out * eval_W(s * (x - t), cfg)
            return out

        direct = gl_line(A, c)
        P, X = deformation_contributions(B, thetas, signs, cfg)
        errs.append(rel(gl_line(A, 0.0) + P + X, direct))
    ok = max(errs) <= TOL_CONTOUR
    acceptance(8, ok, f"{len(errs)} points, max rel err {max(errs):.1e} (tol {TOL_CONTOUR:.0e})")
    assert ok


# -- 9 ------------------------------------------------------------------------------


def test_criterion_9_continuity(acceptance):
    th = (7.6, 7.0, 7.2, 6 - 1j * PI)
    xi0 = 2.0 / 3.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lo = form_factor("--++", th, FFConfig(xi0 * (1 - 1e-6), a_over_beta=1.25)).value
        hi = form_factor("--++", th, FFConfig(xi0 * (1 + 1e-6), a_over_beta=1.25)).value
    e_rat = rel(lo, hi)
    cfg = FFConfig(1.17, a_over_beta=0.5)
    mid = form_factor("--++", th, cfg)
    e_zm = max(rel(form_factor("--++", th, cfg.replace(a_over_beta=0.5 + d)).value, mid.value)
               for d in (-1e-4, 1e-4))
    ok = e_rat <= TOL_RATIONAL and e_zm <= TOL_ZERO_MODE and mid.diagnostics["dropped_zero_modes"] > 0
    acceptance(9, ok, f"xi=2/3(1+-1e-6) {e_rat:.1e} (tol {TOL_RATIONAL:.0e}); "
                      f"a/beta=1/2+-1e-4 at xi=1.17 {e_zm:.1e} (tol {TOL_ZERO_MODE:.0e}), "
                      f"{mid.diagnostics['dropped_zero_modes']} zero modes dropped")
    assert ok
