"""Identification of beta and sigma^2 from realized quadratic variation.

Over a short window ``[t, t+h]`` the QV increment is close to
``sigma^2 r_t^{2 beta} h``. Taking logs at several probe times and summing
absolute values gives the multi-point estimators ``beta1`` (sigma known),
``beta2`` (sigma unknown, ratios of two windows) and ``sigma2`` (beta known).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    InvalidProbeConfig,
    LogDenominatorNearZero,
    ZeroQvIncrement,
    ZeroValueNegativePower,
)
from .model import SamplePath
from .path_ops import PathFunctionals, grid_index, quadratic_variation, riemann_integral

EPS_LOG = 1e-3


class DiffusionMethod(str, Enum):
    BETA1 = "beta1"
    BETA2 = "beta2"
    SIGMA2 = "sigma2"


@dataclass(frozen=True)
class QvProbeConfig:
    """Window length ``h`` and probe times for the QV estimators.

    ``points`` feed ``beta1`` and ``sigma2``; ``pairs`` of ``(s, t)`` feed
    ``beta2``.
    """

    h: float
    points: tuple[float, ...] = ()
    pairs: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(t) for t in self.points))
        object.__setattr__(
            self, "pairs", tuple((float(s), float(t)) for s, t in self.pairs)
        )
        if not self.h > 0:
            raise InvalidProbeConfig(f"h must be positive, got {self.h}")
        if not self.points and not self.pairs:
            raise InvalidProbeConfig("need at least one probe point or pair")
        for s, t in self.pairs:
            if s == t:
                raise InvalidProbeConfig(f"pair ({s}, {t}) has s == t")

    @classmethod
    def default_layout(cls) -> QvProbeConfig:
        """h = 2^-6, points i/8 and pairs (i/16, (i+8)/16) for i = 1..8."""
        return cls(
            h=2.0**-6,
            points=tuple(i / 8 for i in range(1, 9)),
            pairs=tuple((i / 16, (i + 8) / 16) for i in range(1, 9)),
        )

    @property
    def horizon(self) -> float:
        """Latest time any probe window reaches."""
        times = list(self.points) + [t for pair in self.pairs for t in pair]
        return max(times) + self.h

    def window_indices(self, path: SamplePath, t: float) -> tuple[int, int]:
        """Grid indices of ``t`` and ``t + h``; both must be exact grid points."""
        kh = grid_index(path, path.t0 + self.h)
        if kh != int(kh) or kh < 1:
            raise InvalidProbeConfig(f"h={self.h} is not a positive multiple of dt={path.dt}")
        k = grid_index(path, t)
        if k != int(k):
            raise InvalidProbeConfig(f"probe time {t} is not on the grid (dt={path.dt})")
        i0, i1 = int(k), int(k) + int(kh)
        if i0 <= 0 or i1 > path.n_steps:
            raise InvalidProbeConfig(
                f"window [{t}, {t + self.h}] leaves ({path.t0}, {path.t0 + path.T}]"
            )
        return i0, i1

    def validate_for(self, path: SamplePath) -> QvProbeConfig:
        for t in self.points:
            self.window_indices(path, t)
        for s, t in self.pairs:
            self.window_indices(path, s)
            self.window_indices(path, t)
        return self


@dataclass(frozen=True)
class DiffusionEstimate:
    method: DiffusionMethod
    config: QvProbeConfig
    beta_hat: float | None = None
    sigma2_hat: float | None = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def value(self) -> float:
        return self.sigma2_hat if self.method is DiffusionMethod.SIGMA2 else self.beta_hat


def _qv(path: SamplePath, qv) -> np.ndarray:
    if qv is None:
        return PathFunctionals(path).qv_series()
    qv = np.asarray(qv, dtype=np.float64)
    if qv.shape != path.values.shape:
        raise ValueError("QV series must align with the path grid")
    return qv


def _increment(path, qv, cfg, t) -> tuple[float, float]:
    i0, i1 = cfg.window_indices(path, t)
    dq = qv[i1] - qv[i0]
    if not dq > 0:
        raise ZeroQvIncrement(f"QV increment over [{t}, {t + cfg.h}] is {dq!r}")
    r = path.values[i0]
    if not r > 0:
        raise ZeroValueNegativePower(f"r is {r} at probe time {t}; log undefined")
    return dq, r


def beta_known_sigma(
    path: SamplePath, sigma: float, cfg: QvProbeConfig, qv=None
) -> DiffusionEstimate:
    """``sum |log(dQ_i / (sigma^2 h))| / (2 sum |log r_{t_i}|)`` over ``cfg.points``.

    ``qv`` optionally overrides the realized QV series (same grid as ``path``).
    """
    if not cfg.points:
        raise InvalidProbeConfig("beta1 needs probe points")
    qv = _qv(path, qv)
    num = den = 0.0
    for t in cfg.points:
        dq, r = _increment(path, qv, cfg, t)
        num += abs(math.log(dq / (sigma**2 * cfg.h)))
        den += abs(math.log(r))
    if den < EPS_LOG:
        raise LogDenominatorNearZero(
            f"sum |log r_t| = {den:.3g} at the probe points; choose times where r is far from 1"
        )
    return DiffusionEstimate(DiffusionMethod.BETA1, cfg, beta_hat=num / (2 * den))


def beta_unknown_sigma(path: SamplePath, cfg: QvProbeConfig, qv=None) -> DiffusionEstimate:
    """``sum |log(dQ_t / dQ_s)| / (2 sum |log(r_t / r_s)|)`` over ``cfg.pairs``.

    Invariant under a common rescaling of the QV series, so sigma never enters.
    """
    if not cfg.pairs:
        raise InvalidProbeConfig("beta2 needs probe pairs")
    qv = _qv(path, qv)
    num = den = 0.0
    for s, t in cfg.pairs:
        dq_s, r_s = _increment(path, qv, cfg, s)
        dq_t, r_t = _increment(path, qv, cfg, t)
        num += abs(math.log(dq_t / dq_s))
        den += abs(math.log(r_t / r_s))
    if den < EPS_LOG:
        raise LogDenominatorNearZero(
            f"sum |log(r_t/r_s)| = {den:.3g}; choose pairs with clearly different r values"
        )
    return DiffusionEstimate(DiffusionMethod.BETA2, cfg, beta_hat=num / (2 * den))


def sigma2_known_beta(
    path: SamplePath, beta: float, cfg: QvProbeConfig, qv=None
) -> DiffusionEstimate:
    """``sum dQ_i / (h sum r_{t_i}^{2 beta})`` over ``cfg.points``.

    ``details["global"]`` holds the whole-path variant ``[r]_T / int r^{2 beta} dt``.
    """
    if not cfg.points:
        raise InvalidProbeConfig("sigma2 needs probe points")
    qv_series = _qv(path, qv)
    num = den = 0.0
    for t in cfg.points:
        dq, r = _increment(path, qv_series, cfg, t)
        num += dq
        den += r ** (2 * beta)
    glob = float(qv_series[-1]) / riemann_integral(path, 2 * beta)
    return DiffusionEstimate(
        DiffusionMethod.SIGMA2,
        cfg,
        sigma2_hat=num / (cfg.h * den),
        details={"global": glob},
    )


def sigma2_global(path: SamplePath, beta: float) -> float:
    """``[r]_T / int_0^T r^{2 beta} dt`` on the whole path."""
    return quadratic_variation(path) / riemann_integral(path, 2 * beta)
