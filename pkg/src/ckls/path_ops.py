"""Discrete path functionals: left-point time integrals, Ito sums and
realized quadratic variation.

Everything uses the left-point rule, which is what makes the drift
estimators recover the generating parameters exactly on noiseless Euler paths.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ZeroValueNegativePower
from .model import SamplePath

_GRID_SNAP = 1e-9


def grid_index(path: SamplePath, t: float) -> float:
    """Position of time ``t`` on the path grid in units of ``dt``, snapped to
    the nearest integer when within rounding of it."""
    x = (t - path.t0) / path.dt
    k = round(x)
    if abs(x - k) <= _GRID_SNAP * max(1.0, abs(x)):
        return float(k)
    return x


class PathFunctionals:
    """Per-path cache of the functionals the estimators consume.

    Not thread-safe; create one per path per worker.
    """

    def __init__(self, path: SamplePath):
        self.path = path
        self._powers: dict[float, np.ndarray] = {}
        self._integrals: dict[float, float] = {}
        self._ito: dict[float, float] = {}
        self._qv: np.ndarray | None = None

    @property
    def T(self) -> float:
        return self.path.T

    def powers(self, mu: float) -> np.ndarray:
        mu = float(mu)
        if mu not in self._powers:
            v = self.path.values
            if mu == 0.0:
                pw = np.ones_like(v)
            else:
                if mu < 0 and np.any(v <= 0.0):
                    k = int(np.argmax(v <= 0.0))
                    raise ZeroValueNegativePower(
                        f"r is {v[k]} at grid index {k}; r^{mu} is undefined"
                    )
                pw = v**mu
            self._powers[mu] = pw
        return self._powers[mu]

    def time_integral(self, mu: float) -> float:
        """Left-point ``sum r_k^mu dt`` over the whole path."""
        mu = float(mu)
        if mu not in self._integrals:
            pw = self.powers(mu)
            self._integrals[mu] = float(np.sum(pw[:-1])) * self.path.dt
        return self._integrals[mu]

    def ito_sum(self, mu: float) -> float:
        """Left-point ``sum r_k^mu (r_{k+1} - r_k)``."""
        mu = float(mu)
        if mu not in self._ito:
            pw = self.powers(mu)
            self._ito[mu] = float(np.dot(pw[:-1], np.diff(self.path.values)))
        return self._ito[mu]

    def qv_series(self) -> np.ndarray:
        """Cumulative squared increments aligned to the grid; starts at 0."""
        if self._qv is None:
            qv = np.empty_like(self.path.values)
            qv[0] = 0.0
            np.cumsum(np.diff(self.path.values) ** 2, out=qv[1:])
            qv.setflags(write=False)
            self._qv = qv
        return self._qv


def _check_t_hi(path: SamplePath, t_hi: float | None) -> float:
    T_end = path.t0 + path.T
    if t_hi is None:
        return path.n_steps
    x = grid_index(path, t_hi)
    if not (0 < x <= path.n_steps):
        raise ValueError(f"t_hi must lie in ({path.t0}, {T_end}], got {t_hi}")
    return x


def riemann_integral(path: SamplePath, mu: float, t_hi: float | None = None) -> float:
    """Left-point approximation of ``int_{t0}^{t_hi} r_t^mu dt``.

    A cell straddling ``t_hi`` contributes its left value times the covered
    fraction of the cell.
    """
    x = _check_t_hi(path, t_hi)
    full = int(math.floor(x))
    frac = x - full
    v = path.values[: full + (1 if frac > 0 else 0) + 1]
    pw = PathFunctionals(SamplePath(path.dt, v, path.t0)).powers(mu)
    total = float(np.sum(pw[:full])) * path.dt
    if frac > 0:
        total += pw[full] * frac * path.dt
    return total


def ito_integral(path: SamplePath, mu: float) -> float:
    """Left-point (Ito) sum ``sum r_k^mu (r_{k+1} - r_k)`` over the full grid."""
    return PathFunctionals(path).ito_sum(mu)


def quadratic_variation(path: SamplePath, t_hi: float | None = None) -> float:
    """Sum of squared increments over the grid cells inside ``[t0, t_hi]``."""
    x = _check_t_hi(path, t_hi)
    k = int(math.floor(x))
    d = np.diff(path.values[: k + 1])
    return float(np.sum(d * d))
