"""Regularized integrals of ``A(x) = exp(B x) prod_i W(s_i (x - theta_i))``.

The contour is first moved onto the real axis (adding pole terms from
:mod:`sgff.contour`).  The real-axis integral is then split into a left
tail, a finite window ``[aa, bb]`` and a right tail.  Each tail is replaced
by the analytically continued integral of the asymptotic series of ``A``,
and the window is integrated by composite Gauss-Legendre quadrature.

Rapidities are first moved by a common real shift ``delta`` so that the
smallest real part equals ``shift_floor``.  Only the overall factor
``exp(B delta)`` changes under the shift.  This keeps the tails far
from every ``W`` factor, where the truncated series are accurate.

:class:`IntegrandFamily` shares the expensive parts between integrals:
``W`` on the quadrature grid, the series and the pole terms.  The
integrals differ only in ``B`` and in the sign pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asym import (
    AsymSeries,
    ZeroModeCounter,
    exponential_series,
    series_integrate_tail,
    series_product,
    w_series_for_factor,
)
from .config import FFConfig
from .contour import PoleTerms, pole_terms, w_pole_set
from .errors import QuadratureError, StripError
from .kernels import eval_W

__all__ = [
    "IntegrandSpec",
    "RegIntResult",
    "IntegrandFamily",
    "integrand_series",
    "regularized_integral",
]

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_MIN_PANEL = 1e-7
_TAIL_WINDOW = 30.0
_ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class IntegrandSpec:
    """Exponent ``B`` and the factors ``W(s_i (x - theta_i))`` of an integrand."""

    B: complex
    thetas: tuple
    signs: tuple

    def __post_init__(self):
        th = tuple(complex(t) for t in self.thetas)
        sg = tuple(int(s) for s in self.signs)
        if len(th) != len(sg):
            raise ValueError("thetas and signs differ in length")
        if any(s not in (1, -1) for s in sg):
            raise ValueError("signs must be +1 or -1")
        for t in th:
            if abs(t.imag) > math.pi + 1e-12:
                raise StripError(f"|Im theta| = {abs(t.imag):.6g} exceeds pi")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "signs", sg)
        object.__setattr__(self, "B", complex(self.B))


@dataclass
class RegIntResult:
    value: complex
    tail_value: complex
    quad_value: complex
    pole_value: complex
    dropped_zero_modes: int = 0
    dropped_weight: complex = 0j
    extra: dict = field(default_factory=dict)


def _panel_breaks(a, b, n_panels, poles):
    """Breakpoints on ``[a, b]`` such that every panel is no wider than its pole distance."""
    edges = list(np.linspace(a, b, n_panels + 1))
    if poles.size == 0:
        return np.array(edges)
    out = []
    stack = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)][::-1]
    while stack:
        lo, hi = stack.pop()
        # distance from the segment [lo, hi] to the nearest pole
        xr = np.clip(poles.real, lo, hi)
        dist = np.min(np.hypot(poles.real - xr, poles.imag))
        if hi - lo > dist and hi - lo > _MIN_PANEL:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi))
            stack.append((lo, mid))
        else:
            out.append(lo)
    out.append(b)
    return np.array(out)


def _gl_grid(breaks):
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


class IntegrandFamily:
    """Integrals over one set of rapidities with any sign pattern and exponent.

    Parameters
    ----------
    thetas : sequence of complex
        Rapidities ``theta_i`` with ``|Im theta_i| <= pi``.
    cfg : FFConfig
    w_eval : callable, optional
        Replacement for ``eval_W`` on 1-d arrays (used by the tabulated fast
        path).
    """

    def __init__(self, thetas, cfg: FFConfig, w_eval=None):
        self.cfg = cfg
        self.kcfg = cfg.kernel
        raw = np.array([complex(t) for t in thetas])
        for t in raw:
            if abs(t.imag) > math.pi + 1e-12:
                raise StripError(f"|Im theta| = {abs(t.imag):.6g} exceeds pi")
        self.raw_thetas = raw
        self.delta = float(np.min(raw.real)) - cfg.shift_floor if raw.size else 0.0
        self.thetas = raw - self.delta
        self._w = w_eval or (lambda z: eval_W(z, self.kcfg))
        hi = float(np.max(self.thetas.real)) if raw.size else 0.0
        self.aa = cfg.aa
        self.bb = cfg.bb if cfg.bb is not None else hi + cfg.shift_floor
        if self.bb <= self.aa:
            raise ValueError("empty quadrature window")
        self._build_grid()
        self._factor_vals = {}
        self._factor_series = {}
        self._patterns = {}

    # -- grid -------------------------------------------------------------
    def _build_grid(self):
        poles = []
        base = w_pole_set(self.cfg.xi, 4 * math.pi)
        for t in self.thetas:
            for s in (1, -1):
                poles.append(t + s * base)
        poles = np.concatenate(poles) if poles else np.zeros(0, complex)
        # only poles near the window matter for panel sizes
        near = np.abs(poles.imag) < (self.bb - self.aa)
        n_panels = max(1, int(math.ceil(self.cfg.Ni / _GL_ORDER)))
        breaks = _panel_breaks(self.aa, self.bb, n_panels, poles[near])
        self.x, self.wq = _gl_grid(breaks)

    # -- factors ----------------------------------------------------------
    def factor_values(self, i, s):
        key = (i, s)
        if key not in self._factor_vals:
            self._factor_vals[key] = self._w(s * (self.x - self.thetas[i]))
        return self._factor_vals[key]

    def factor_series(self, i, s, direction):
        key = (i, s, direction)
        if key not in self._factor_series:
            self._factor_series[key] = w_series_for_factor(
                self.cfg.xi, s, self.thetas[i], direction, self.cfg.Na, self.kcfg
            )
        return self._factor_series[key]

    def pattern(self, signs):
        """Grid product, tail series and pole terms for a sign pattern."""
        signs = tuple(int(s) for s in signs)
        if len(signs) != self.thetas.size:
            raise ValueError("sign pattern length differs from number of rapidities")
        if signs in self._patterns:
            return self._patterns[signs]
        prod = np.ones(self.x.shape, dtype=complex)
        left = exponential_series(1.0, 0.0, -1)
        right = exponential_series(1.0, 0.0, 1)
        for i, s in enumerate(signs):
            prod = prod * self.factor_values(i, s)
            left = series_product(left, self.factor_series(i, s, -1))
            right = series_product(right, self.factor_series(i, s, 1))
        poles = pole_terms(self.thetas, signs, self.kcfg, self.cfg.epsilon, self._w)
        self._check_tail(prod, left, right)
        data = _Pattern(prod, left, right, poles, signs)
        self._patterns[signs] = data
        return data

    def _check_tail(self, prod, left, right):
        # the integrand without exp(Bx) must match its series at both ends
        for xe, ser in ((self.aa, left), (self.bb, right)):
            j = int(np.argmin(np.abs(self.x - xe)))
            exact = prod[j]
            approx = ser(self.x[j])
            if abs(exact - approx) > self.cfg.tail_tol * max(abs(exact), 1e-300):
                raise QuadratureError(
                    f"integrand does not match its asymptotic series near x={xe:.3g} "
                    f"(relative mismatch {abs(exact - approx) / abs(exact):.2e}); "
                    "increase Na or shift_floor"
                )

    # -- integration ------------------------------------------------------
    def integrate(self, B, signs, counter: ZeroModeCounter | None = None) -> RegIntResult:
        """Regularized integral of ``exp(Bx) prod W(s_i (x - theta_i))`` over the original contour."""
        B = complex(B)
        pat = self.pattern(signs)
        scale = np.exp(B * self.delta)
        quad = np.sum(self.wq * np.exp(B * self.x) * pat.prod)
        local = ZeroModeCounter()
        left = AsymSeries(pat.left.coeffs, pat.left.exps + B, pat.left.cutoff, -1)
        right = AsymSeries(pat.right.coeffs, pat.right.exps + B, pat.right.cutoff, 1)
        tail = series_integrate_tail(left, self.aa, local) + series_integrate_tail(right, self.bb, local)
        if self.cfg.tail_correction:
            tail += self._tail_correction(B, pat)
        poles = pat.poles.total(B)
        weight = local.dropped_weight * scale
        if counter is not None:
            counter.dropped += local.dropped
            counter.dropped_weight += weight
        return RegIntResult(
            value=complex(scale * (quad + tail + poles)),
            tail_value=complex(scale * tail),
            quad_value=complex(scale * quad),
            pole_value=complex(scale * poles),
            dropped_zero_modes=local.dropped,
            dropped_weight=complex(weight),
        )

    def _tail_correction(self, B, pat):
        """``int (A - [A])`` over the two outer half-lines, by quadrature on a finite window."""
        total = 0j
        noise = max(10.0 * self.cfg.quad_rel_tol, _ROUNDOFF) * max(len(pat.signs), 1)
        for lo, hi, ser in (
            (self.aa - _TAIL_WINDOW, self.aa, pat.left),
            (self.bb, self.bb + _TAIL_WINDOW, pat.right),
        ):
            breaks = np.linspace(lo, hi, int(_TAIL_WINDOW * 4) + 1)
            x, w = _gl_grid(breaks)
            vals = np.ones(x.shape, dtype=complex)
            for i, s in enumerate(pat.signs):
                vals *= self._w(s * (x - self.thetas[i]))
            diff = vals - ser(x)
            # below the kernel accuracy the difference is noise that exp(Bx) would amplify
            diff[np.abs(diff) <= noise * np.abs(vals)] = 0.0
            total += np.sum(w * np.exp(B * x) * diff)
        return total

    def pole_terms(self, signs) -> PoleTerms:
        return self.pattern(signs).poles


@dataclass
class _Pattern:
    prod: np.ndarray
    left: AsymSeries
    right: AsymSeries
    poles: PoleTerms
    signs: tuple = ()


def integrand_series(spec: IntegrandSpec, cfg: FFConfig, direction: int = -1) -> AsymSeries:
    """Asymptotic series of ``A(x)`` as ``Re x -> direction * inf`` (unshifted rapidities)."""
    acc = exponential_series(1.0, spec.B, direction)
    for t, s in zip(spec.thetas, spec.signs):
        acc = series_product(acc, w_series_for_factor(cfg.xi, s, t, direction, cfg.Na, cfg.kernel))
    return acc


def regularized_integral(spec: IntegrandSpec, cfg: FFConfig, counter: ZeroModeCounter | None = None,
                         w_eval=None) -> RegIntResult:
    """Analytically continued ``int_C A(x) dx`` for a single integrand."""
    fam = IntegrandFamily(spec.thetas, cfg, w_eval)
    return fam.integrate(spec.B, spec.signs, counter)
