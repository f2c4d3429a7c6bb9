"""Truncated asymptotic series in exponentials.

A series ``sum_i c_i exp(alpha_i x)`` describes a function as
``Re x -> direction * infinity``.  The decay rate of a term is
``-direction * Re alpha``; every retained term has decay rate at most
``cutoff`` and its coefficient is exact to that order.  Exact finite sums
(for instance a single exponential) carry ``cutoff = inf``.

The operations mirror the bookkeeping needed to integrate products of ``W``
over half-lines: products, shifts of the argument, reflection ``x -> -x``
and the analytically continued half-line integral.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesError
from .kernels import KernelConfig, const_C2

__all__ = [
    "AsymSeries",
    "ZeroModeCounter",
    "series_product",
    "series_shift",
    "series_eval",
    "series_integrate_neg_halfline",
    "series_integrate_tail",
    "exponential_series",
    "w_coeff_a",
    "w_coeff_b",
    "w_prefactor",
    "build_W_series",
    "w_series_for_factor",
]

MERGE_TOL = 1e-12
ZERO_TOL = 1e-10
RATIONAL_TOL = 1e-9
# exponent coefficients above this signal a near-rational xi
ILL_CONDITIONED = 1e4
_CUT_SLACK = 1e-9


def _merge(coeffs, exps):
    """Sum coefficients of exponents closer than MERGE_TOL."""
    if exps.size <= 1:
        return coeffs, exps
    order = np.lexsort((exps.imag, exps.real))
    c = coeffs[order]
    e = exps[order]
    out_c, out_e = [], []
    # clusters in the real part, then in the imaginary part inside each
    breaks = np.flatnonzero(np.diff(e.real) > MERGE_TOL) + 1
    for block in np.split(np.arange(e.size), breaks):
        if block.size == 1:
            out_c.append(c[block[0]])
            out_e.append(e[block[0]])
            continue
        sub = block[np.argsort(e[block].imag, kind="stable")]
        rep = e[sub[0]]
        acc = c[sub[0]]
        for j in sub[1:]:
            if abs(e[j] - rep) <= MERGE_TOL:
                acc += c[j]
            else:
                out_c.append(acc)
                out_e.append(rep)
                rep, acc = e[j], c[j]
        out_c.append(acc)
        out_e.append(rep)
    return np.array(out_c, dtype=complex), np.array(out_e, dtype=complex)


@dataclass(frozen=True)
class AsymSeries:
    """Immutable truncated series ``sum c_i exp(alpha_i x)``."""

    coeffs: np.ndarray
    exps: np.ndarray
    cutoff: float
    direction: int
    _normalized: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise SeriesError("direction must be +1 or -1")
        if self._normalized:
            return
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel()
        e = np.atleast_1d(np.asarray(self.exps, dtype=complex)).ravel()
        if c.shape != e.shape:
            raise SeriesError("coefficient and exponent arrays differ in length")
        c, e = _merge(c, e)
        rate = -self.direction * e.real
        keep = rate <= self.cutoff + _CUT_SLACK
        c, e, rate = c[keep], e[keep], rate[keep]
        order = np.argsort(rate, kind="stable")
        c, e = c[order], e[order]
        c.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "exps", e)
        object.__setattr__(self, "_normalized", True)

    def __len__(self):
        return self.coeffs.size

    @property
    def decay_rates(self):
        return -self.direction * self.exps.real

    @property
    def slowest(self) -> float:
        """Smallest decay rate present (``inf`` for an empty series)."""
        return float(self.decay_rates[0]) if len(self) else math.inf

    def __call__(self, x):
        return series_eval(self, x)

    def __mul__(self, other):
        return series_product(self, other)

    def scale(self, factor) -> "AsymSeries":
        return AsymSeries(self.coeffs * factor, self.exps, self.cutoff, self.direction)

    def shift(self, a) -> "AsymSeries":
        return series_shift(self, a)

    def reflect(self) -> "AsymSeries":
        """Series of ``f(-x)``; the direction flips and decay rates are kept."""
        return AsymSeries(self.coeffs, -self.exps, self.cutoff, -self.direction)

    def truncate(self, cutoff: float) -> "AsymSeries":
        return AsymSeries(self.coeffs, self.exps, min(cutoff, self.cutoff), self.direction)


class ZeroModeCounter:
    """Collects zero-exponent terms dropped by half-line integration."""

    def __init__(self):
        self.dropped = 0
        self.dropped_weight = 0j

    def add(self, coeffs):
        self.dropped += int(np.size(coeffs))
        self.dropped_weight += complex(np.sum(coeffs))

    def __repr__(self):
        return f"ZeroModeCounter(dropped={self.dropped}, weight={self.dropped_weight:.3g})"


def exponential_series(coeff, exponent, direction: int) -> AsymSeries:
    """The exact one-term series ``coeff * exp(exponent x)``."""
    return AsymSeries(np.array([coeff]), np.array([exponent]), math.inf, direction)


def series_product(A: AsymSeries, B: AsymSeries) -> AsymSeries:
    """Product of two series with the conservative accuracy cutoff."""
    if A.direction != B.direction:
        raise SeriesError("cannot multiply series with different directions")
    if not len(A) or not len(B):
        cutoff = min(A.cutoff + B.slowest, B.cutoff + A.slowest)
        return AsymSeries(np.zeros(0), np.zeros(0), cutoff, A.direction)
    cutoff = min(A.cutoff + B.slowest, B.cutoff + A.slowest)
    e = (A.exps[:, None] + B.exps[None, :]).ravel()
    c = (A.coeffs[:, None] * B.coeffs[None, :]).ravel()
    keep = -A.direction * e.real <= cutoff + _CUT_SLACK
    return AsymSeries(c[keep], e[keep], cutoff, A.direction)


def series_shift(A: AsymSeries, a) -> AsymSeries:
    """Series of ``f(x + a)``."""
    return AsymSeries(A.coeffs * np.exp(A.exps * a), A.exps, A.cutoff, A.direction)


def series_eval(A: AsymSeries, x):
    """Value of the truncated sum at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=complex)
    if not len(A):
        return np.zeros(x.shape, dtype=complex)[()]
    out = np.exp(np.multiply.outer(x, A.exps)) @ A.coeffs
    return out[()] if np.ndim(out) == 0 else out


def series_integrate_tail(A: AsymSeries, x0=0.0, counter: ZeroModeCounter | None = None):
    """Continued integral of the series over the half-line beyond ``x0``.

    For direction -1 this is ``int_{-inf}^{x0}``, for direction +1
    ``int_{x0}^{inf}``, with ``int exp(alpha x)`` continued to every
    ``alpha != 0``.  Terms with ``|alpha| < 1e-10`` are dropped and counted.
    """
    if not len(A):
        return 0j
    zero = np.abs(A.exps) < ZERO_TOL
    if counter is not None and np.any(zero):
        counter.add(A.coeffs[zero])
    c = A.coeffs[~zero]
    e = A.exps[~zero]
    val = np.sum(c * np.exp(e * x0) / e)
    return complex(val if A.direction < 0 else -val)


def series_integrate_neg_halfline(A: AsymSeries, counter: ZeroModeCounter | None = None):
    """``int_{-inf}^0`` of a series with direction -1 (each term gives ``c/alpha``)."""
    if A.direction != -1:
        raise SeriesError("negative half-line integral needs a direction -1 series")
    return series_integrate_tail(A, 0.0, counter)


# ---------------------------------------------------------------------------
# asymptotic expansion of W


def _near_int(v):
    r = round(v)
    return abs(v - r) < RATIONAL_TOL, int(r)


def w_coeff_a(k: int, xi: float, s: int) -> complex:
    """Coefficient of ``exp(-2ksx/xi)`` in the exponent of the W expansion.

    When ``2k/xi`` is an odd integer the singular part cancels against
    ``b_{2k/xi}``; only ``-is sin(pi k/xi)/k`` survives.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hit, m = _near_int(2.0 * k / xi)
    if hit and m % 2:
        return -1j * s * math.sin(math.pi * k / xi) / k
    return (math.cos(2 * math.pi * k / xi) / (2 * math.cos(math.pi * k / xi))
            - 1j * s * math.sin(math.pi * k / xi)) / k


def w_coeff_b(k: int, xi: float) -> complex:
    """Coefficient of ``exp(-ksx)`` in the exponent of the W expansion."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k % 2 == 0:
        return -(1j ** k) / k
    hit, m = _near_int(k * xi)
    if hit and m % 2 == 0:
        return 0j
    return -(1j ** (k + 1)) / (k * math.tan(math.pi * xi * k / 2))


def w_prefactor(xi: float, s: int, cfg: KernelConfig | None = None) -> complex:
    """Constant in ``W(x) ~ prefactor * exp(-(xi+1)/(2 xi) s x)``."""
    c2 = const_C2(cfg if cfg is not None else KernelConfig(xi))
    return -s * 4j / math.sqrt(c2 * xi) * np.exp(-0.5j * s * math.pi / xi)


def _exp_factor(coeff, rate, depth, direction):
    """Series of ``exp(coeff * exp(-rate * direction * x))`` up to decay ``depth``."""
    mmax = int(math.floor(depth / rate + _CUT_SLACK))
    m = np.arange(mmax + 1)
    c = np.array([coeff ** j / math.factorial(j) for j in m], dtype=complex)
    return AsymSeries(c, -direction * rate * m, depth, direction)


def build_W_series(xi: float, s: int, depth: int, cfg: KernelConfig | None = None) -> AsymSeries:
    """Asymptotic series of ``W(x)`` as ``Re x -> s * infinity``.

    ``depth`` (``Na``) sets the retained offset ``Na * min(1, 2/xi)`` beyond
    the leading exponent.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if s not in (1, -1):
        raise ValueError("s must be +1 or -1")
    span = depth * min(1.0, 2.0 / xi)
    lead = (xi + 1.0) / (2.0 * xi)
    one = AsymSeries(np.array([1.0]), np.array([0.0]), span, s)
    # 1/(1 + exp(-2sx)) from 1/cosh
    nl = int(math.floor(span / 2.0 + _CUT_SLACK))
    l = np.arange(nl + 1)
    acc = AsymSeries((-1.0) ** l, -2.0 * s * l, span, s)
    factors = []
    k = 1
    while 2.0 * k / xi <= span + _CUT_SLACK:
        factors.append((w_coeff_a(k, xi, s), 2.0 * k / xi))
        k += 1
    k = 1
    while k <= span + _CUT_SLACK:
        factors.append((w_coeff_b(k, xi), float(k)))
        k += 1
    if factors and max(abs(c) for c, _ in factors) > ILL_CONDITIONED:
        warnings.warn(
            f"xi={xi} is close to a rational value with cancelling coefficients; "
            "the W series loses accuracy through cancellation",
            RuntimeWarning,
            stacklevel=2,
        )
    for coeff, rate in factors:
        acc = acc * _exp_factor(coeff, rate, span, s)
    acc = acc * one
    pref = w_prefactor(xi, s, cfg)
    return AsymSeries(acc.coeffs * pref, acc.exps - s * lead, lead + span, s)


def w_series_for_factor(xi: float, sign: int, theta, direction: int, depth: int,
                        cfg: KernelConfig | None = None) -> AsymSeries:
    """Series in ``x`` of ``W(sign * (x - theta))`` as ``Re x -> direction * inf``."""
    base = build_W_series(xi, sign * direction, depth, cfg)
    if sign < 0:
        base = base.reflect()
    return series_shift(base, -theta)
