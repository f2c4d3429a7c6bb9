"""Kernel functions of the free-field representation.

``G``, ``W`` and ``Gbar`` are the two-point functions of the vertex operators,
``C1``/``C2`` their normalisations, and ``S``, ``S_T``, ``S_R`` the soliton
S-matrix elements.  Every function accepts a scalar or an array of complex
rapidities and is a pure function of ``(theta, cfg)``.

The t-integrals are done with a composite Gauss-Legendre rule whose panel
width follows the oscillation frequency and whose upper limit follows the
exponential decay rate of the integrand, so whole arrays of rapidities are
processed in one vectorised pass.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import PoleError, QuadratureError

__all__ = [
    "KernelConfig",
    "eval_G",
    "eval_W",
    "eval_W_direct",
    "eval_Gbar",
    "const_C1",
    "const_C2",
    "principal_residue",
    "w_pole_residue",
    "eval_S",
    "eval_ST",
    "eval_SR",
    "beta_squared",
    "regularize_xi",
    "w_strip_decay",
    "g_strip_decay",
    "KernelValue",
    "kernel_value",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
# Tail is cut where the integrand envelope has dropped by exp(-_TAIL).
_TAIL = 40.0
# Decay rate requested from the gamma-product representation of W.
_KAPPA_TARGET = 6.0
_DEGENERATE_TOL = 1e-9
_DEGENERATE_SHIFT = 1e-7


@dataclass(frozen=True)
class KernelConfig:
    """Parameters shared by all kernel evaluations.

    ``reg_order`` is the number of gamma-function factors pulled out of the
    exponent of ``W`` (the ``NN`` parameter).  ``reg_order=0`` selects the
    bare integral, which converges only in a narrow strip; for
    ``reg_order >= 1`` the order is raised automatically where the requested
    one does not give a fast-converging exponent.
    """

    xi: float
    reg_order: int = 1
    quad_rel_tol: float = 1e-12
    quad_t_max: float = 60.0

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if self.reg_order < 0:
            raise ValueError("reg_order must be non-negative")
        if not self.quad_rel_tol > 0 or not self.quad_t_max > 0:
            raise ValueError("quadrature tolerance and cutoff must be positive")


def beta_squared(xi: float) -> float:
    """Invert ``xi = beta^2 / (1 - beta^2)``."""
    return xi / (1.0 + xi)


def regularize_xi(xi: float, which=("sin", "cot")) -> float:
    """Nudge ``xi`` off values where ``1/sin(pi/xi)`` or ``cot(pi xi/2)`` is singular.

    ``which`` selects the checks: ``"sin"`` for integer ``1/xi``, ``"cot"``
    for even integer ``xi``.
    """
    vals = {"sin": 1.0 / xi, "cot": xi / 2.0}
    for val in (vals[k] for k in which):
        if abs(val - round(val)) < _DEGENERATE_TOL:
            warnings.warn(
                f"xi={xi} is degenerate for a closed form; shifted by {_DEGENERATE_SHIFT}",
                RuntimeWarning,
                stacklevel=2,
            )
            return xi * (1.0 + _DEGENERATE_SHIFT)
    return xi


# ---------------------------------------------------------------------------
# t-integrals


def _kernel_w(t, xi):
    return np.sinh((xi - 1.0) * t) / (t * np.sinh(2.0 * t) * np.sinh(xi * t))


def _kernel_g(t, xi):
    return _kernel_w(t, xi) / np.cosh(t)


def w_strip_decay(re_c, xi, order=0):
    """Exponential decay rate in t of the W exponent integrand."""
    return 2.0 + xi + 4.0 * order - abs(xi - 1.0) - 2.0 * np.abs(re_c)


def g_strip_decay(re_c, xi):
    """Exponential decay rate in t of the G exponent integrand."""
    return 3.0 + xi - abs(xi - 1.0) - 2.0 * np.abs(re_c)


def _gl_nodes(t_max, h):
    n_panels = max(1, int(np.ceil(t_max / h)))
    edges = np.linspace(0.0, t_max, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return t, w


def _sinh2_integral(c, kernel_vals, t, w):
    """sum_j w_j K(t_j) sinh(t_j c)^2 for an array ``c``, chunked over c."""
    out = np.empty(c.shape, dtype=complex)
    kw = w * kernel_vals
    chunk = max(1, 4_000_000 // max(t.size, 1))
    flat_c = c.ravel()
    flat_out = out.ravel()
    for start in range(0, flat_c.size, chunk):
        cc = flat_c[start:start + chunk]
        flat_out[start:start + chunk] = np.sinh(np.outer(cc, t)) ** 2 @ kw
    return flat_out.reshape(c.shape)


def _exponent_integral(c, xi, kind, order, cfg):
    """Integral int_0^inf dt e^{-4 order t} K(t) sinh^2(t c) for an array ``c``."""
    if kind == "W":
        kappa = np.min(w_strip_decay(c.real, xi, order))
        kernel = _kernel_w
    else:
        kappa = np.min(g_strip_decay(c.real, xi))
        kernel = _kernel_g
    if kappa <= 0:
        raise QuadratureError(
            f"{kind} exponent integral diverges (decay rate {kappa:.3g}); "
            "increase the regularization order"
        )
    t_max = _TAIL / kappa
    if t_max > cfg.quad_t_max:
        # tail bound check: envelope at the cutoff must be below tolerance
        if np.exp(-kappa * cfg.quad_t_max) > cfg.quad_rel_tol:
            raise QuadratureError(
                f"{kind} exponent integral converges too slowly "
                f"(rate {kappa:.3g}) for quad_t_max={cfg.quad_t_max}"
            )
        t_max = cfg.quad_t_max
    omega = 2.0 * np.max(np.abs(c.imag)) if c.size else 0.0
    h = min(0.5, 4.0 / (omega + 1e-300))
    t, w = _gl_nodes(t_max, h)
    kv = kernel(t, xi)
    if order:
        kv = kv * np.exp(-4.0 * order * t)
    return _sinh2_integral(c, kv, t, w)


# ---------------------------------------------------------------------------
# W


def _needed_order(re_c, xi, requested):
    worst = np.max(np.abs(re_c)) if np.size(re_c) else 0.0
    base = w_strip_decay(worst, xi, 0)
    need = int(np.ceil((_KAPPA_TARGET - base) / 4.0))
    return max(requested, need, 1)


def _gamma_log_product(y, xi, order, drop_pole_gamma=False):
    """log of the gamma-function prefactor, without the k=1 factor that cancels cosh."""
    lg = special.loggamma
    out = np.zeros(y.shape, dtype=complex)
    for k in range(1, order + 1):
        if not (drop_pole_gamma and k == 1):
            out += lg(1 + (2 * k - 2.5 + y) / xi)
        out += lg(1 + (2 * k - 0.5 - y) / xi)
        out += 2 * lg((2 * k - 0.5) / xi + 0j) - 2 * lg(1 + (2 * k - 1.5) / xi + 0j)
        out -= lg((2 * k + 0.5 - y) / xi)
        if k == 1:
            # 1/Gamma(z) = z/Gamma(1+z); the factor z is merged with 1/cosh
            out -= lg(1 + (0.5 + y) / xi)
        else:
            out -= lg((2 * k - 1.5 + y) / xi)
    return out


def _u_over_sinh(u):
    small = np.abs(u) < 1e-8
    safe = np.where(small, 1.0, u)
    return np.where(small, 1.0 + 0j, safe / np.sinh(safe))


def eval_W_direct(theta, cfg: KernelConfig):
    """W from its bare integral representation (narrow convergence strip)."""
    th = np.asarray(theta, dtype=complex)
    c = 1.0 - 1j * th / np.pi
    expo = _exponent_integral(np.atleast_1d(c), cfg.xi, "W", 0, cfg).reshape(th.shape)
    out = -2.0 / np.cosh(th) * np.exp(-2.0 * expo)
    return out[()] if out.ndim == 0 else out


def _w_core(flat, cfg, drop_pole_gamma=False):
    xi = cfg.xi
    c = 1.0 - 1j * flat / np.pi
    order = _needed_order(c.real, xi, cfg.reg_order)
    y = 1j * flat / np.pi
    expo = _exponent_integral(c, xi, "W", order, cfg)
    u = flat - 0.5j * np.pi
    # drop_pole_gamma removes Gamma(1 + (y - 1/2)/xi), the source of the
    # poles at i pi (n xi - 1/2)
    logp = _gamma_log_product(y, xi, order, drop_pole_gamma)
    return -2.0 * _u_over_sinh(u) / (np.pi * xi) * np.exp(logp - 2.0 * expo)


def _on_w_pole(th, xi, tol=1e-12):
    """True if any argument sits on a pole of ``W`` (all poles have ``Re = 0``)."""
    cand = th[np.abs(th.real) < tol]
    if not cand.size:
        return False
    y = cand.imag / np.pi
    # cosh zeros at y = j + 1/2 survive for j < 0 and odd j
    j = np.round(y - 0.5)
    hit = (np.abs(y - 0.5 - j) < tol) & ((j < 0) | (j % 2 == 1))
    # gamma poles at y = n xi + 2k - 5/2 and y = -(n xi + 2k - 1/2), n, k >= 1
    kmax = int(np.max(np.abs(y))) // 2 + 2
    for k in range(1, kmax + 1):
        for v in ((y - 2 * k + 2.5) / xi, (-y - 2 * k + 0.5) / xi):
            n = np.round(v)
            hit |= (n >= 1) & (np.abs(v - n) * xi < tol)
    return bool(np.any(hit))


def eval_W(theta, cfg: KernelConfig):
    """Evaluate ``W(theta)``.

    Uses the bare integral for ``reg_order=0`` and otherwise the
    gamma-product form, in which ``-2/cosh`` is combined with the vanishing
    gamma factor so that the removable singularity at ``i pi/2`` is finite.
    """
    th = np.asarray(theta, dtype=complex)
    if _on_w_pole(np.atleast_1d(th).ravel(), cfg.xi):
        raise PoleError("W evaluated at a pole")
    if cfg.reg_order == 0:
        return eval_W_direct(theta, cfg)
    out = _w_core(np.atleast_1d(th).ravel(), cfg)
    if not np.all(np.isfinite(out)):
        raise PoleError("W evaluated at a pole")
    out = out.reshape(th.shape)
    return out[()] if out.ndim == 0 else out


def w_pole_residue(n: int, cfg: KernelConfig) -> complex:
    """Residue of ``W`` at ``i pi (n xi - 1/2)`` from the gamma-product form.

    Valid when the pole is simple, i.e. no other factor is singular there.
    """
    x_n = np.array([1j * np.pi * (n * cfg.xi - 0.5)])
    rest = _w_core(x_n, cfg if cfg.reg_order else KernelConfig(cfg.xi, 1), True)[0]
    return complex((-1) ** (n - 1) / special.factorial(n - 1) * np.pi * cfg.xi / 1j * rest)


# ---------------------------------------------------------------------------
# constants


@functools.lru_cache(maxsize=256)
def _c1(xi):
    cfg = KernelConfig(xi)
    return float(np.exp(-_exponent_integral(np.array([0.5 + 0j]), xi, "G", 0, cfg)[0].real))


@functools.lru_cache(maxsize=256)
def _c2(xi):
    cfg = KernelConfig(xi)
    return float(np.exp(4.0 * _exponent_integral(np.array([0.5 + 0j]), xi, "W", 0, cfg)[0].real))


def const_C1(cfg: KernelConfig) -> float:
    return _c1(float(cfg.xi))


def const_C2(cfg: KernelConfig) -> float:
    return _c2(float(cfg.xi))


def principal_residue(cfg: KernelConfig) -> complex:
    """Residue of ``W`` at its principal pole ``-i pi/2``, equal to ``-2i/sqrt(C2)``."""
    return -2j / np.sqrt(const_C2(cfg))


# ---------------------------------------------------------------------------
# G and Gbar


def _g_direct(th, cfg):
    c = 1.0 - 1j * th / np.pi
    expo = _exponent_integral(c, cfg.xi, "G", 0, cfg)
    return 1j * const_C1(cfg) * np.sinh(th / 2.0) * np.exp(expo)


def _w_raw(z, cfg):
    # no pole check: a W pole in the fold is a zero of G (e.g. G(0) = 0)
    if cfg.reg_order == 0:
        return eval_W_direct(z, cfg)
    return _w_core(np.array([complex(z)]), cfg)[0]


def eval_G(theta, cfg: KernelConfig):
    """Evaluate ``G(theta)``.

    The bare integral is used with ``Im theta`` folded into
    ``[-3pi/2, -pi/2)`` through ``G(t) G(t - i pi) W(t - i pi/2) = 1``, where it
    converges fastest; the fold is exact and valid for every ``Im theta``.
    """
    th = np.asarray(theta, dtype=complex)
    flat = np.atleast_1d(th).ravel()
    # number of i*pi steps that brings Im into [-3pi/2, -pi/2)
    steps = np.floor((flat.imag + 1.5 * np.pi) / np.pi).astype(int)
    base = flat - 1j * np.pi * steps
    out = _g_direct(base, cfg)
    for i in np.flatnonzero(steps):
        val = out[i]
        cur = base[i]
        if steps[i] > 0:
            for _ in range(steps[i]):
                # G(t + i pi) = 1 / (W(t + i pi/2) G(t))
                val = 1.0 / (_w_raw(cur + 0.5j * np.pi, cfg) * val)
                cur = cur + 1j * np.pi
        else:
            for _ in range(-steps[i]):
                # G(t - i pi) = 1 / (W(t - i pi/2) G(t))
                val = 1.0 / (_w_raw(cur - 0.5j * np.pi, cfg) * val)
                cur = cur - 1j * np.pi
        out[i] = val
    out = out.reshape(th.shape)
    return out[()] if out.ndim == 0 else out


def eval_Gbar(theta, cfg: KernelConfig):
    th = np.asarray(theta, dtype=complex)
    xi = cfg.xi
    out = -const_C2(cfg) / 4.0 * xi * np.sinh((th + 1j * np.pi) / xi) * np.sinh(th)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# S-matrix


def _s_decay(xi, order):
    return np.pi * min(1.0, xi * (order + 1))


def _s_integrand_kernel(t, xi, order):
    px = np.pi * xi * t
    damp = np.exp(-order * px)
    num = 2.0 * np.sinh(0.5 * np.pi * (1.0 - xi) * t) * damp + np.expm1(-order * px) * (
        np.exp(0.5 * np.pi * (xi - 1.0) * t) + np.exp(-0.5 * np.pi * (xi + 1.0) * t)
    )
    return num / (2.0 * np.sinh(0.5 * px) * np.cosh(0.5 * np.pi * t) * t)


def eval_S(theta, cfg: KernelConfig):
    """Soliton-soliton amplitude ``S(theta)`` (independent of ``reg_order``).

    The overall sign is fixed by ``S(0) = -1`` for every order.
    """
    th = np.asarray(theta, dtype=complex)
    flat = np.atleast_1d(th).ravel()
    xi = cfg.xi
    im_max = np.max(np.abs(flat.imag))
    if im_max >= np.pi:
        raise QuadratureError("S-matrix integral requires |Im theta| < pi")
    # S does not depend on the order; raise it until the integrand decays fast
    order = cfg.reg_order
    while _s_decay(xi, order) - im_max < min(_KAPPA_TARGET / 4.0, np.pi - im_max):
        order += 1
    kappa = _s_decay(xi, order) - im_max
    # the cosh(pi t/2) tail cannot be improved by the order, so the cutoff
    # here follows the decay rate rather than quad_t_max
    t_max = _TAIL / kappa
    if t_max > 50.0 * cfg.quad_t_max:
        raise QuadratureError("S-matrix integral converges too slowly this close to |Im theta| = pi")
    omega = np.max(np.abs(flat.real))
    h = min(0.5, 4.0 / (omega + 1e-300))
    t, w = _gl_nodes(t_max, h)
    kw = w * _s_integrand_kernel(t, xi, order)
    expo = np.sin(np.outer(flat, t)) @ kw
    prod = np.ones(flat.shape, dtype=complex)
    for k in range(1, order + 1):
        ik = 1j * k * np.pi * xi
        prod *= (ik + flat) / (ik - flat)
    out = -prod * np.exp(-1j * expo)
    out = out.reshape(th.shape)
    return out[()] if out.ndim == 0 else out


def _st_sr_denominator(th, xi):
    den = np.sinh((1j * np.pi - th) / xi)
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("S_T/S_R evaluated at a pole")
    return den


def eval_ST(theta, cfg: KernelConfig):
    """Transmission amplitude ``S_T = S sinh(theta/xi) / sinh((i pi - theta)/xi)``."""
    th = np.asarray(theta, dtype=complex)
    den = _st_sr_denominator(th, cfg.xi)
    out = eval_S(th, cfg) * np.sinh(th / cfg.xi) / den
    return out[()] if np.ndim(out) == 0 else out


def eval_SR(theta, cfg: KernelConfig):
    """Reflection amplitude ``S_R = S sinh(i pi/xi) / sinh((i pi - theta)/xi)``."""
    th = np.asarray(theta, dtype=complex)
    den = _st_sr_denominator(th, cfg.xi)
    out = eval_S(th, cfg) * np.sinh(1j * np.pi / cfg.xi) / den
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KernelValue:
    value: complex
    representation_used: str  # "direct-integral" or "gamma-product"


def kernel_value(name: str, theta, cfg: KernelConfig) -> KernelValue:
    """Scalar kernel evaluation tagged with the representation that produced it.

    ``name`` is one of ``G, W, Gbar, S, ST, SR, C1, C2`` (``theta`` is ignored
    for the constants).
    """
    funcs = {"G": eval_G, "W": eval_W, "Gbar": eval_Gbar, "S": eval_S, "ST": eval_ST, "SR": eval_SR}
    if name == "C1":
        return KernelValue(complex(const_C1(cfg)), "direct-integral")
    if name == "C2":
        return KernelValue(complex(const_C2(cfg)), "direct-integral")
    if name not in funcs:
        raise ValueError(f"unknown kernel {name!r}")
    val = complex(funcs[name](complex(theta), cfg))
    if name == "W" and cfg.reg_order == 0:
        rep = "direct-integral"
    elif name in ("W", "S", "ST", "SR"):
        rep = "gamma-product"
    else:
        rep = "direct-integral"
    return KernelValue(val, rep)
