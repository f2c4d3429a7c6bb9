"""Solver configuration shared by the integral and form-factor layers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from .kernels import KernelConfig, beta_squared

__all__ = ["FFConfig", "CONFIG_ALIASES"]

# names accepted in flat key=value config files, mapped onto FFConfig fields
CONFIG_ALIASES = {
    "xi": "xi",
    "aoverbeta": "a_over_beta",
    "a_over_beta": "a_over_beta",
    "nn": "NN",
    "na": "Na",
    "ni": "Ni",
    "epsilon": "epsilon",
    "aa": "aa",
    "bb": "bb",
    "shift_floor": "shift_floor",
    "quad_rel_tol": "quad_rel_tol",
    "quad_t_max": "quad_t_max",
    "tail_tol": "tail_tol",
    "zero_mode_tol": "zero_mode_tol",
    "tail_correction": "tail_correction",
}


@dataclass(frozen=True)
class FFConfig:
    """All parameters of a form-factor evaluation.

    ``NN`` is the regularization order of the kernels, ``Na`` the depth of
    the asymptotic series of ``W``, ``Ni`` the minimum number of quadrature
    nodes, ``epsilon`` the initial step of the residue limit and ``aa``/``bb``
    the quadrature window in the shifted frame where the smallest rapidity
    real part equals ``shift_floor``.  ``bb=None`` puts the upper end
    ``shift_floor`` beyond the largest real part.
    """

    xi: float
    a_over_beta: float = 1.0
    NN: int = 1
    Na: int = 12
    Ni: int = 2000
    epsilon: float = 1e-3
    aa: float = 0.0
    bb: float | None = None
    shift_floor: float = 5.0
    quad_rel_tol: float = 1e-12
    quad_t_max: float = 60.0
    tail_tol: float = 1e-6
    zero_mode_tol: float = 1e-6
    tail_correction: bool = False

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        for name in ("Na", "Ni"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.NN < 0:
            raise ValueError("NN must be >= 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.bb is not None and not self.bb > self.aa:
            raise ValueError("bb must exceed aa")
        if not math.isfinite(self.a_over_beta):
            raise ValueError("a_over_beta must be finite")

    @property
    def A_param(self) -> float:
        """``A = -(1/xi + 2 a/beta)``."""
        return -(1.0 / self.xi + 2.0 * self.a_over_beta)

    @property
    def omega(self) -> float:
        """Mutual non-locality index ``a/beta``."""
        return self.a_over_beta

    @property
    def beta2(self) -> float:
        return beta_squared(self.xi)

    @property
    def kernel(self) -> KernelConfig:
        return KernelConfig(self.xi, self.NN, self.quad_rel_tol, self.quad_t_max)

    def replace(self, **kw) -> "FFConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: dict) -> "FFConfig":
        """Build from a mapping using field names or config-file aliases."""
        names = {f.name: f for f in fields(cls)}
        kw = {}
        for key, val in data.items():
            name = CONFIG_ALIASES.get(str(key).lower(), key)
            if name not in names:
                raise KeyError(f"unknown configuration key {key!r}")
            kw[name] = _coerce(name, val)
        return cls(**kw)


_INT_FIELDS = {"NN", "Na", "Ni"}


def _coerce(name, val):
    if not isinstance(val, str):
        return val
    text = val.strip()
    if name == "tail_correction":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"cannot read {name}={val!r} as a boolean")
    if name == "bb" and text.lower() in ("", "none", "auto"):
        return None
    if name in _INT_FIELDS:
        return int(text)
    return float(text)
