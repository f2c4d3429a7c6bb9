"""Tabulated ``W`` on horizontal lines for batches of physical rapidities.

When every rapidity has an imaginary part from a small set (typically
``0`` and ``+-pi``), the real-axis integrands only need ``W`` on the lines
``Im z = -s Im theta``.  :class:`WTable` samples ``log W`` on those lines,
interpolates it with cubic splines and falls back to the asymptotic series
beyond the tabulated range and to :func:`eval_W` elsewhere.  Tables can be
written to and read from a JSON cache file.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np
from scipy.interpolate import CubicSpline

from .asym import build_W_series
from .kernels import KernelConfig, eval_W

__all__ = ["WTable", "lines_for_rapidities", "required_range", "load_wtable", "CACHE_SCHEMA"]

CACHE_SCHEMA = "sgff.wtable/1"
LINE_TOL = 1e-12
PROBE_TOL = 1e-8
N_PROBES = 20
MAX_DOUBLINGS = 5
DECAY_LENGTHS = 25.0
# sinh-map scale; nodes cluster within this distance of Re z = 0 where the poles sit
_MAP_SCALE = 1.0


def lines_for_rapidities(rows) -> tuple:
    """Distinct values of ``+-Im theta`` over all rapidities in ``rows``."""
    vals = set()
    for row in rows:
        for t in row:
            im = complex(t).imag
            for v in (im, -im):
                vals.add(round(v, 12) + 0.0)
    return tuple(sorted(vals))


def required_range(rows, xi: float, shift_floor: float) -> float:
    """Half-width ``L`` of the tabulated range for a batch."""
    spread = 0.0
    for row in rows:
        re = [complex(t).real for t in row]
        if re:
            spread = max(spread, max(re) - min(re))
    return spread + shift_floor + DECAY_LENGTHS * 2.0 * xi / (xi + 1.0)


class WTable:
    """Spline representation of ``W`` on lines ``Im z = c`` for ``|Re z| <= L``.

    Parameters
    ----------
    xi, NN : float, int
        Coupling and regularization order of the underlying kernel.
    lines : sequence of float
        Imaginary parts of the tabulated lines.
    L : float
        Half-width of the tabulated range.
    Ni : int
        Initial number of nodes per line; doubled (at most five times) until
        the probe error is below ``1e-8``.
    Na : int
        Depth of the series used beyond ``L``.
    """

    def __init__(self, xi, NN, lines, L, Ni, Na=12, _data=None):
        self.xi = float(xi)
        self.NN = int(NN)
        self.lines = tuple(sorted(float(c) for c in lines))
        self.L = float(L)
        self.Ni = int(Ni)
        self.Na = int(Na)
        if self.L <= 0 or self.Ni < 8:
            raise ValueError("WTable needs L > 0 and Ni >= 8")
        self.kcfg = KernelConfig(self.xi, reg_order=max(self.NN, 1))
        self._series = {s: build_W_series(self.xi, s, self.Na, self.kcfg) for s in (1, -1)}
        self.probe_errors = {}
        self.nodes_used = {}
        self._splines = {}
        if _data is None:
            for c in self.lines:
                self._build_line(c)
        else:
            for c, (x, re, im, err) in _data.items():
                self._set_line(c, np.asarray(x), np.asarray(re), np.asarray(im), err)

    @property
    def key(self) -> dict:
        return {"xi": self.xi, "NN": self.NN, "lines": list(self.lines), "range": self.L, "Ni": self.Ni}

    # -- construction -------------------------------------------------------
    def _grid(self, n):
        umax = math.asinh(self.L / _MAP_SCALE)
        return _MAP_SCALE * np.sinh(np.linspace(-umax, umax, n))

    def _sample(self, x, c):
        w = eval_W(x + 1j * c, self.kcfg)
        logw = np.log(w)
        return logw.real, np.unwrap(logw.imag)

    def _set_line(self, c, x, re, im, err):
        self._splines[c] = (x, re, im, CubicSpline(x, re), CubicSpline(x, im))
        self.probe_errors[c] = float(err)
        self.nodes_used[c] = int(x.size)

    def _build_line(self, c):
        n = self.Ni
        for _ in range(MAX_DOUBLINGS + 1):
            x = self._grid(n)
            re, im = self._sample(x, c)
            idx = np.linspace(0, n - 2, N_PROBES).astype(int)
            xp = 0.5 * (x[idx] + x[idx + 1])
            exact = eval_W(xp + 1j * c, self.kcfg)
            approx = np.exp(CubicSpline(x, re)(xp) + 1j * CubicSpline(x, im)(xp))
            err = float(np.max(np.abs(approx - exact) / np.abs(exact)))
            if err < PROBE_TOL:
                self._set_line(c, x, re, im, err)
                return
            n *= 2
        warnings.warn(
            f"W table on Im z = {c:.6g} misses the probe tolerance ({err:.1e}); "
            "direct evaluation is used on this line",
            RuntimeWarning,
            stacklevel=3,
        )
        self.probe_errors[c] = err

    # -- evaluation ---------------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        done = np.zeros(flat.shape, dtype=bool)
        for c, (x, _, _, sre, sim) in self._splines.items():
            on = (~done) & (np.abs(flat.imag - c) < LINE_TOL)
            if not np.any(on):
                continue
            inner = on & (np.abs(flat.real) <= self.L)
            if np.any(inner):
                xr = flat.real[inner]
                out[inner] = np.exp(sre(xr) + 1j * sim(xr))
            for s in (1, -1):
                outer = on & (np.abs(flat.real) > self.L) & (np.sign(flat.real) == s)
                if np.any(outer):
                    out[outer] = self._series[s](flat[outer])
            done |= on
        if np.any(~done):
            out[~done] = eval_W(flat[~done], self.kcfg)
        out = out.reshape(z.shape)
        return out[()] if out.ndim == 0 else out

    def covers(self, lines, L) -> bool:
        have = np.array(self.lines)
        return L <= self.L + 1e-12 and all(np.any(np.abs(have - c) < LINE_TOL) for c in lines)

    # -- persistence --------------------------------------------------------
    def to_json(self, manifest: dict | None = None) -> str:
        data = {
            "schema": CACHE_SCHEMA,
            "key": self.key,
            "Na": self.Na,
            "manifest": manifest or {},
            "lines": [
                {
                    "im": c,
                    "x": x.tolist(),
                    "log_re": re.tolist(),
                    "log_im": im.tolist(),
                    "probe_error": self.probe_errors[c],
                }
                for c, (x, re, im, _, _) in sorted(self._splines.items())
            ],
        }
        return json.dumps(data)

    def save(self, path, manifest: dict | None = None):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json(manifest))

    @classmethod
    def from_json(cls, text: str) -> "WTable":
        doc = json.loads(text)
        if doc.get("schema") != CACHE_SCHEMA:
            raise ValueError("not a W table cache file")
        k = doc["key"]
        data = {
            float(e["im"]): (e["x"], e["log_re"], e["log_im"], e["probe_error"]) for e in doc["lines"]
        }
        return cls(k["xi"], k["NN"], k["lines"], k["range"], k["Ni"], doc.get("Na", 12), _data=data)


def load_wtable(path, xi, NN, Ni, lines=(), L=0.0):
    """Load a cache file; ``None`` with a warning unless the key matches.

    ``xi``, ``NN`` and ``Ni`` must be equal to the stored key; the stored
    lines and range must cover the requested ones.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            table = WTable.from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        warnings.warn(f"W table cache {path} unusable ({exc}); ignored", RuntimeWarning, stacklevel=2)
        return None
    if table.xi != float(xi) or table.NN != int(NN) or table.Ni != int(Ni):
        warnings.warn(
            f"W table cache {path} has key {table.key}, requested xi={xi}, NN={NN}, Ni={Ni}; ignored",
            RuntimeWarning,
            stacklevel=2,
        )
        return None
    if not table.covers(lines, L):
        warnings.warn(
            f"W table cache {path} does not cover lines {list(lines)} with range {L:.6g}; ignored",
            RuntimeWarning,
            stacklevel=2,
        )
        return None
    return table
