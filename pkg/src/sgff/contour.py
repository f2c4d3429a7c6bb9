"""Pole bookkeeping for deforming integration contours onto the real line.

The integrand ``A(x) = exp(B x) prod_i W(s_i (x - theta_i))`` is defined on a
contour that keeps the principal pole of every ``W`` factor between itself
and the real axis.  Moving the contour to the real axis picks up

* ``P``: the principal poles, ``x = theta_i - s_i i pi/2``;
* ``X``: the poles ``x = theta_i + s_i x_n`` with ``x_n = i pi (n xi - 1/2)``
  that have crossed the real axis.

Both are sums of ``coeff * exp(B x*)`` over pole locations ``x*``.  The
coefficients do not depend on ``B``, so :func:`pole_terms` computes them once
and :func:`deformation_contributions` only adds the exponentials.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleError, QuadratureError, StripError
from .kernels import KernelConfig, eval_W, principal_residue

__all__ = [
    "PoleContribution",
    "PoleTerms",
    "xi_pole_positions",
    "residue_W",
    "w_pole_set",
    "pole_terms",
    "deformation_contributions",
]

# distance below which a W argument counts as sitting on a pole
COLLISION_TOL = 1e-12
BOUNDARY_TOL = 1e-12
STRIP_TOL = 1e-12


@dataclass(frozen=True)
class PoleContribution:
    """A pole crossed by the contour and its additive term for a given ``B``."""

    location: complex
    residue: complex
    contribution: complex
    kind: str  # "principal" or "xi"
    index: int  # factor index i
    n: int = 0  # xi-pole number, 0 for principal


def _check_strip(theta):
    if abs(theta.imag) > math.pi + STRIP_TOL:
        raise StripError(f"|Im theta| = {abs(theta.imag):.6g} exceeds pi")


def _xi_pole_count(theta, s, xi):
    val = (math.pi - 2.0 * s * theta.imag) / (2.0 * math.pi * xi)
    if val > 0 and abs(val - round(val)) < BOUNDARY_TOL:
        raise PoleError("a xi-dependent pole sits exactly on the real line")
    return max(0, int(math.floor(val)))


def xi_pole_positions(theta, s: int, xi: float):
    """Poles ``x_n = i pi (n xi - 1/2)`` of ``W(s(x - theta))`` that cross the real axis.

    Returns ``[(x_n, n), ...]`` for ``n = 1..N`` with
    ``N = floor((pi - 2 s Im theta) / (2 pi xi))``.
    """
    theta = complex(theta)
    _check_strip(theta)
    count = _xi_pole_count(theta, s, xi)
    return [(1j * math.pi * (n * xi - 0.5), n) for n in range(1, count + 1)]


@functools.lru_cache(maxsize=1024)
def _residue_cached(n, xi, reg_order, eps, tol):
    cfg = KernelConfig(xi, reg_order=max(1, reg_order))
    x_n = 1j * math.pi * (n * xi - 0.5)

    def sym(e):
        w = eval_W(np.array([x_n + e, x_n - e]), cfg)
        return 0.5 * e * (w[0] - w[1])

    # the symmetric quotient has only even powers of eps; two Richardson steps
    f0, f1, f2 = sym(eps), sym(eps / 2), sym(eps / 4)
    r1a = (4 * f1 - f0) / 3
    r1b = (4 * f2 - f1) / 3
    r2 = (16 * r1b - r1a) / 15
    if abs(r2 - r1b) > tol * max(abs(r2), 1e-300):
        raise QuadratureError(
            f"residue of W at x_{n} did not converge (near-double pole for xi={xi}?)"
        )
    return complex(r2)


def residue_W(n: int, cfg: KernelConfig, epsilon: float = 1e-3, tol: float = 1e-7) -> complex:
    """Residue ``r_n`` of ``W`` at ``x_n = i pi (n xi - 1/2)``, by Richardson-refined limit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _residue_cached(int(n), float(cfg.xi), int(cfg.reg_order), float(epsilon), float(tol))


def w_pole_set(xi: float, im_range: float = 5 * math.pi):
    """Poles of ``W`` with ``|Im| <= im_range`` for generic ``xi`` (all on ``Re x = 0``)."""
    out = []
    jmax = int(im_range / math.pi) + 1
    for j in range(-jmax - 1, jmax + 1):
        # cosh poles; i pi (2k - 3/2) are cancelled by a gamma zero
        if j >= 0 and j % 2 == 0:
            continue
        out.append(math.pi * (j + 0.5))
    kmax = int(im_range / (2 * math.pi)) + 2
    nmax = int(im_range / (math.pi * xi)) + 3
    for k in range(1, kmax + 1):
        for n in range(1, nmax + 1):
            out.append(math.pi * (n * xi + 2 * k - 2.5))
            out.append(-math.pi * (n * xi + 2 * k - 0.5))
    arr = np.unique(np.array(out))
    return 1j * arr[np.abs(arr) <= im_range]


def _check_collision(args, xi):
    poles = w_pole_set(xi, max(5 * math.pi, float(np.max(np.abs(args.imag))) + math.pi))
    d = np.abs(args[:, None] - poles[None, :])
    if np.any(d < COLLISION_TOL):
        raise PoleError("W argument coincides with a pole (degenerate rapidities)")


@dataclass(frozen=True)
class PoleTerms:
    """``B``-independent data: ``P + X = sum coeff * exp(B * location)``."""

    locations: np.ndarray
    coeffs: np.ndarray
    residues: np.ndarray
    kinds: tuple
    indices: tuple
    ns: tuple

    def total(self, B) -> complex:
        if not self.locations.size:
            return 0j
        return complex(np.sum(self.coeffs * np.exp(B * self.locations)))

    def split(self, B):
        """``(P, X)`` for exponent ``B``."""
        if not self.locations.size:
            return 0j, 0j
        vals = self.coeffs * np.exp(B * self.locations)
        mask = np.array([k == "principal" for k in self.kinds])
        return complex(np.sum(vals[mask])), complex(np.sum(vals[~mask]))

    def contributions(self, B):
        return [
            PoleContribution(complex(loc), complex(res), complex(c * np.exp(B * loc)), kind, i, n)
            for loc, res, c, kind, i, n in zip(
                self.locations, self.residues, self.coeffs, self.kinds, self.indices, self.ns
            )
        ]


def pole_terms(thetas, signs, cfg: KernelConfig, epsilon: float = 1e-3,
               w_eval=None) -> PoleTerms:
    """Locations and ``B``-independent coefficients of all crossed poles.

    ``w_eval`` may replace :func:`eval_W` (for instance by a tabulated
    version); it is called on 1-d arrays of arguments.
    """
    thetas = [complex(t) for t in thetas]
    signs = [int(s) for s in signs]
    if len(thetas) != len(signs):
        raise ValueError("thetas and signs differ in length")
    w_eval = w_eval or (lambda z: eval_W(z, cfg))
    rp = principal_residue(cfg)
    locs, res, kinds, idx, ns = [], [], [], [], []
    for i, (th, s) in enumerate(zip(thetas, signs)):
        _check_strip(th)
        step = -s * th.imag + 0.5 * math.pi
        if abs(step) < BOUNDARY_TOL:
            raise PoleError("principal pole sits exactly on the real line")
        if step > 0:
            locs.append(th - s * 0.5j * math.pi)
            res.append(rp)
            kinds.append("principal")
            idx.append(i)
            ns.append(0)
        for x_n, n in xi_pole_positions(th, s, cfg.xi):
            locs.append(th + s * x_n)
            res.append(residue_W(n, cfg, epsilon))
            kinds.append("xi")
            idx.append(i)
            ns.append(n)
    coeffs = []
    for loc, r, i in zip(locs, res, idx):
        args = np.array([sj * (loc - tj) for j, (tj, sj) in enumerate(zip(thetas, signs)) if j != i],
                        dtype=complex)
        if args.size:
            _check_collision(args, cfg.xi)
            prod = np.prod(w_eval(args))
        else:
            prod = 1.0
        coeffs.append(2j * math.pi * r * prod)
    return PoleTerms(
        np.array(locs, dtype=complex),
        np.array(coeffs, dtype=complex),
        np.array(res, dtype=complex),
        tuple(kinds),
        tuple(idx),
        tuple(ns),
    )


def deformation_contributions(B, thetas, signs, cfg: KernelConfig, epsilon: float = 1e-3):
    """``(P, X)`` such that the contour integral equals the real-line integral plus ``P + X``."""
    return pole_terms(thetas, signs, cfg, epsilon).split(B)
