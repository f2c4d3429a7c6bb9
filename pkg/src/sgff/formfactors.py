"""Assembly of 2n-soliton form factors of the exponential operator.

``F_{s_1...s_2n}(t_1, ..., t_2n)`` is the free-field average
``<< Z_{s_2n}(t_2n) ... Z_{s_1}(t_1) >>`` (the vacuum expectation value of
the operator is not included).  Every ``Z_-`` carries a contour integral over
``gamma`` with two terms (contours ``C_+`` and ``C_-``); the Wick contractions
give

* ``G(t_p - t_q)`` for every pair of ``Z`` operators,
* ``W(right - left)`` between an ``exp(i phi)`` and an ``exp(-i phibar)``,
* ``Gbar(right - left)`` between two ``exp(-i phibar)``, expanded into four
  exponentials so that the ``gamma`` integrals factorize.

Every signature is evaluated directly from these rules; the ``gamma``
integrals are regularized integrals from :mod:`sgff.regint`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import FFConfig
from .errors import ZeroModeImbalanceError
from .kernels import const_C1, const_C2, eval_G, eval_S, eval_SR, eval_ST
from .regint import IntegrandFamily

__all__ = [
    "FFConfig",
    "ChargeSignature",
    "FormFactorResult",
    "FormFactorEvaluator",
    "form_factor",
    "ff2",
    "ff4",
    "ff6",
    "balanced_signatures",
    "ExchangeTerm",
    "watson_exchange",
    "reorder_signature",
    "evaluate_terms",
    "gbar_terms",
]

# Gbar(y) = -C2 xi/16 * sum_t w_t exp(c_t y)
def gbar_terms(xi):
    """``(c_t, w_t)`` with ``Gbar(y) = -(C2 xi/16) sum_t w_t exp(c_t y)``."""
    e = np.exp(1j * math.pi / xi)
    return (
        (1.0 + 1.0 / xi, e),
        (1.0 / xi - 1.0, -e),
        (1.0 - 1.0 / xi, -1.0 / e),
        (-1.0 - 1.0 / xi, 1.0 / e),
    )


class ChargeSignature(tuple):
    """Balanced sequence of charges ``+1``/``-1``; parses strings like ``"--++"``."""

    def __new__(cls, value):
        if isinstance(value, str):
            text = value.strip()
            if any(ch not in "+-" for ch in text):
                raise ValueError(f"signature {value!r} may contain only '+' and '-'")
            items = [1 if ch == "+" else -1 for ch in text]
        else:
            items = [int(v) for v in value]
            if any(v not in (1, -1) for v in items):
                raise ValueError("charges must be +1 or -1")
        if not items or len(items) % 2:
            raise ValueError("signature length must be even and positive")
        if sum(items) != 0:
            raise ValueError(f"signature {value!r} is not charge balanced")
        return super().__new__(cls, items)

    def __str__(self):
        return "".join("+" if v > 0 else "-" for v in self)

    def __repr__(self):
        return f"ChargeSignature('{self}')"


def balanced_signatures(n_particles: int):
    """All balanced signatures of the given length, in lexicographic '+' < '-' order."""
    out = []
    for combo in itertools.product("+-", repeat=n_particles):
        if combo.count("+") * 2 == n_particles:
            out.append(ChargeSignature("".join(combo)))
    return out


@dataclass
class FormFactorResult:
    signature: ChargeSignature
    rapidities: tuple
    value: complex
    diagnostics: dict = field(default_factory=dict)


class FormFactorEvaluator:
    """Evaluates form factors for one rapidity tuple, sharing integrals across signatures.

    ``gbar_order`` selects the argument of the ``Gbar`` contraction between
    the integration variables of two ``Z_-`` operators: ``"wick"`` uses
    ``Gbar(gamma_right - gamma_left)`` as the contraction rules prescribe,
    ``"reversed"`` the opposite order.
    """

    def __init__(self, thetas, cfg: FFConfig, w_eval=None, gbar_order: str = "wick"):
        if gbar_order not in ("wick", "reversed"):
            raise ValueError("gbar_order must be 'wick' or 'reversed'")
        self.cfg = cfg
        self.thetas = tuple(complex(t) for t in thetas)
        self.family = IntegrandFamily(self.thetas, cfg, w_eval)
        self.gbar_order = gbar_order
        self._integrals = {}

    def _integral(self, q, plus, extra, counter_key):
        """Integral attached to ``Z_-`` at index ``q`` on contour ``C_+`` or ``C_-``."""
        key = (q, plus, round(extra.real, 12), round(extra.imag, 12))
        if key not in self._integrals:
            m = len(self.thetas)
            signs = [1 if p > q else -1 for p in range(m)]
            signs[q] = -1 if plus else 1
            B = self.cfg.A_param + extra
            self._integrals[key] = self.family.integrate(B, signs)
        return self._integrals[key]

    def evaluate(self, signature) -> FormFactorResult:
        sig = ChargeSignature(signature)
        th = np.array(self.thetas)
        if len(sig) != th.size:
            raise ValueError("signature length differs from number of rapidities")
        cfg = self.cfg
        kc = cfg.kernel
        xi = cfg.xi
        n = len(sig) // 2
        minus = [q for q, s in enumerate(sig) if s < 0]
        c1, c2 = const_C1(kc), const_C2(kc)
        beta2 = cfg.beta2

        # prefactor
        pairs = [(p, q) for p in range(th.size) for q in range(p + 1, th.size)]
        gvals = eval_G(np.array([th[p] - th[q] for p, q in pairs]), kc) if pairs else np.ones(0)
        log_pref = (
            cfg.omega * np.dot(np.array(sig, dtype=float), th)
            - cfg.A_param * np.sum(th[minus])
        )
        pref = (
            (1j * c2 / (4 * c1)) ** n
            / (2 * math.pi) ** n
            * (-c2 * xi / 16.0) ** (n * (n - 1) // 2)
            * np.prod(gvals)
            * np.exp(log_pref)
        )

        wplus = np.exp(0.5j * math.pi / beta2)
        wminus = -np.exp(-0.5j * math.pi / beta2)
        gterms = gbar_terms(xi)
        gpairs = [(q, r) for i, q in enumerate(minus) for r in minus[:i]]  # q > r
        total = 0j
        term_scale = 0.0
        zm_sum = 0j
        zm_scale = 0.0
        n_terms = 0
        for choice in itertools.product((True, False), repeat=n):
            wc = np.prod([wplus if ch else wminus for ch in choice])
            for tsel in itertools.product(range(4), repeat=len(gpairs)):
                extra = {q: 0j for q in minus}
                w = wc
                for (q, r), t in zip(gpairs, tsel):
                    c, wt = gterms[t]
                    w *= wt
                    # Gbar(gamma_r - gamma_q) for the Wick order, q to the left of r
                    sgn = 1.0 if self.gbar_order == "wick" else -1.0
                    extra[r] += sgn * c
                    extra[q] -= sgn * c
                res = [self._integral(q, ch, extra[q], None) for q, ch in zip(minus, choice)]
                vals = [r.value for r in res]
                term = w * np.prod(vals)
                total += term
                term_scale += abs(term)
                n_terms += 1
                for k, r in enumerate(res):
                    if r.dropped_zero_modes:
                        others = np.prod([v for j, v in enumerate(vals) if j != k])
                        contrib = w * r.dropped_weight * others
                        zm_sum += contrib
                        zm_scale += abs(contrib)
        dropped = sum(r.dropped_zero_modes for r in self._integrals.values())
        if zm_scale > 0 and abs(zm_sum) > cfg.zero_mode_tol * zm_scale:
            raise ZeroModeImbalanceError(
                f"dropped zero-exponent terms do not cancel (imbalance {abs(zm_sum) / zm_scale:.2e})"
            )
        value = complex(pref * total)
        diag = {
            "n_integrals": len(self._integrals),
            "n_terms": n_terms,
            "dropped_zero_modes": dropped,
            "zero_mode_imbalance": float(abs(zm_sum) / zm_scale) if zm_scale else 0.0,
            "pole_terms": sum(len(p.poles.locations) for p in self.family._patterns.values()),
            "shift": self.family.delta,
            # sum |term| / |sum|: roundoff in the terms is amplified by this factor
            "cancellation": float(term_scale / abs(total)) if total != 0 else math.inf,
        }
        return FormFactorResult(sig, self.thetas, value, diag)


def form_factor(signature, thetas, cfg: FFConfig, w_eval=None, gbar_order="wick") -> FormFactorResult:
    """``F_signature(thetas)`` for any balanced signature."""
    return FormFactorEvaluator(thetas, cfg, w_eval, gbar_order).evaluate(signature)


def _check_len(thetas, k):
    if len(thetas) != k:
        raise ValueError(f"expected {k} rapidities, got {len(thetas)}")


def ff2(theta1, theta2, order, cfg: FFConfig, **kw) -> complex:
    """Two-particle form factor ``F_order(theta1, theta2)``, ``order`` in {'+-', '-+'}."""
    return form_factor(order, (theta1, theta2), cfg, **kw).value


def ff4(thetas, signature, cfg: FFConfig, **kw) -> complex:
    _check_len(thetas, 4)
    return form_factor(signature, thetas, cfg, **kw).value


def ff6(thetas, signature, cfg: FFConfig, **kw) -> complex:
    _check_len(thetas, 6)
    return form_factor(signature, thetas, cfg, **kw).value


# ---------------------------------------------------------------------------
# Watson exchange


@dataclass(frozen=True)
class ExchangeTerm:
    weight: complex
    signature: ChargeSignature
    thetas: tuple


def watson_exchange(signature, thetas, j: int, cfg: FFConfig):
    """Exchange of positions ``j`` and ``j+1`` (0-based) as a list of terms.

    ``F_{..a b..}(..t_j, t_j+1..)`` equals the sum over the returned terms of
    ``weight * F_signature(thetas)`` with the two rapidities swapped.
    """
    sig = list(ChargeSignature(signature))
    th = list(thetas)
    if not 0 <= j < len(sig) - 1:
        raise ValueError("exchange position out of range")
    kc = cfg.kernel
    d = complex(th[j + 1]) - complex(th[j])
    swapped = th[:j] + [th[j + 1], th[j]] + th[j + 2:]
    if sig[j] == sig[j + 1]:
        return [ExchangeTerm(complex(eval_S(d, kc)), ChargeSignature(sig), tuple(swapped))]
    trans = sig[:j] + [sig[j + 1], sig[j]] + sig[j + 2:]
    return [
        ExchangeTerm(complex(eval_SR(d, kc)), ChargeSignature(sig), tuple(swapped)),
        ExchangeTerm(complex(eval_ST(d, kc)), ChargeSignature(trans), tuple(swapped)),
    ]


def reorder_signature(signature, thetas, swaps, cfg: FFConfig):
    """Express ``F_signature(thetas)`` through successive adjacent exchanges.

    ``swaps`` lists exchange positions applied in order; an empty list is the
    identity (a single term of weight 1).  Terms with equal signature and
    rapidities are merged.
    """
    terms = [ExchangeTerm(1.0 + 0j, ChargeSignature(signature), tuple(complex(t) for t in thetas))]
    for j in swaps:
        merged = {}
        for t in terms:
            for e in watson_exchange(t.signature, t.thetas, j, cfg):
                key = (str(e.signature), e.thetas)
                merged[key] = merged.get(key, 0j) + t.weight * e.weight
        terms = [ExchangeTerm(w, ChargeSignature(k[0]), k[1]) for k, w in merged.items()]
    return terms


def evaluate_terms(terms, cfg: FFConfig, **kw) -> complex:
    """Sum of ``weight * F`` over exchange terms, sharing evaluators per rapidity tuple."""
    evaluators = {}
    total = 0j
    for t in terms:
        if t.thetas not in evaluators:
            evaluators[t.thetas] = FormFactorEvaluator(t.thetas, cfg, **kw)
        total += t.weight * evaluators[t.thetas].evaluate(t.signature).value
    return total
