"""Stationary density, its moments and the asymptotic covariances of the
drift MLEs.

The stationary density is

    p(x) = G x^{-2 beta} exp{(2/sigma^2) (a x^{1-2beta}/(1-2beta) - b x^{2-2beta}/(2-2beta))}.

Moments are computed after the substitution ``x = e^y``. In ``y`` the
log-integrand is strictly concave, so it has a single mode that can be found
by root finding; the integral is then split at the mode and truncated where
the integrand has fallen ``TAIL_DROP`` nats below its peak. The exponent is
shifted by a constant (``(x^c - 1)/c`` instead of ``x^c/c``) which keeps it
finite at beta = 1/2 and cancels in every normalized quantity.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, optimize

from .errors import QuadratureNotConverged, SingularSigma
from .model import ModelParams, validate_params

TAIL_DROP = 60.0


@dataclass(frozen=True)
class AsymptoticCovariance:
    sigma_matrix: np.ndarray
    covariance: np.ndarray
    var_a_given_b: float
    var_b_given_a: float


@dataclass(frozen=True)
class StationaryModel:
    params: ModelParams
    rtol: float = 1e-12
    limit: int = 200
    _moments: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        validate_params(dataclasses.replace(self.params, r0=1.0))

    @property
    def _kappa(self) -> float:
        return 2.0 / self.params.sigma**2

    def _shifted_exponent(self, y):
        """``(2/sigma^2)(a (e^{cy}-1)/c - b (e^{dy}-1)/d)`` with c = 1-2beta, d = 2-2beta."""
        p = self.params
        c, d = 1 - 2 * p.beta, 2 - 2 * p.beta
        ec = y if c == 0 else np.expm1(c * y) / c
        ed = np.expm1(d * y) / d
        return self._kappa * (p.a * ec - p.b * ed)

    def _log_integrand(self, y, mu: float):
        # x^mu p(x) dx with x = e^y, up to the normalizing constant
        return (mu + 1 - 2 * self.params.beta) * y + self._shifted_exponent(y)

    def _dlog_integrand(self, y, mu: float) -> float:
        p = self.params
        c, d = 1 - 2 * p.beta, 2 - 2 * p.beta
        return mu + 1 - 2 * p.beta + self._kappa * (p.a * math.exp(c * y) - p.b * math.exp(d * y))

    def _d2log_integrand(self, y) -> float:
        p = self.params
        c, d = 1 - 2 * p.beta, 2 - 2 * p.beta
        return self._kappa * (p.a * c * math.exp(c * y) - p.b * d * math.exp(d * y))

    def _mode(self, mu: float) -> float:
        p = self.params
        if p.beta == 0.5 and mu + self._kappa * p.a <= 0:
            raise QuadratureNotConverged(
                f"moment of order {mu} diverges at beta = 1/2 (needs mu > -2a/sigma^2)"
            )
        g = lambda y: self._dlog_integrand(y, mu)  # noqa: E731
        lo, hi = -1.0, 1.0
        while g(lo) <= 0:
            lo *= 2
        while g(hi) >= 0:
            hi *= 2
        return optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    def _tail_point(self, mu: float, y_star: float, peak: float, direction: int) -> float:
        width = 1.0 / math.sqrt(-self._d2log_integrand(y_star))
        drop = lambda y: self._log_integrand(y, mu) - peak + TAIL_DROP  # noqa: E731
        prev, step = y_star, width
        for _ in range(200):
            cur = y_star + direction * step
            if drop(cur) < 0:
                a, b = sorted((prev, cur))
                return optimize.brentq(drop, a, b, xtol=1e-10)
            prev, step = cur, step * 2
        raise QuadratureNotConverged("could not bracket the integrand tail")

    def _log_mass(self, mu: float) -> float:
        """``log int_0^inf x^mu x^{-2beta} e^{shifted exponent} dx``."""
        mu = float(mu)
        if mu in self._moments:
            return self._moments[mu]
        y_star = self._mode(mu)
        peak = float(self._log_integrand(y_star, mu))
        y_lo = self._tail_point(mu, y_star, peak, -1)
        y_hi = self._tail_point(mu, y_star, peak, +1)
        f = lambda y: math.exp(self._log_integrand(y, mu) - peak)  # noqa: E731
        total = 0.0
        for lo, hi in ((y_lo, y_star), (y_star, y_hi)):
            total += _quad(f, lo, hi, self.rtol, self.limit)
        out = peak + math.log(total)
        self._moments[mu] = out
        return out

    @cached_property
    def log_G(self) -> float:
        """Log of the normalizing constant G, in the closed-form convention.

        At beta = 1/2 this is the gamma constant ``rate^shape / Gamma(shape)``.
        """
        p = self.params
        c, d = 1 - 2 * p.beta, 2 - 2 * p.beta
        shift = self._kappa * ((p.a / c if c != 0 else 0.0) - p.b / d)
        return -self._log_mass(0.0) - shift

    @property
    def G(self) -> float:
        return math.exp(self.log_G)

    def density(self, x: float) -> float:
        if x <= 0:
            return 0.0
        y = math.log(x)
        log_p = -self._log_mass(0.0) - 2 * self.params.beta * y + self._shifted_exponent(y)
        return math.exp(log_p) if log_p > -745.2 else 0.0

    def moment(self, mu: float) -> float:
        """``int_0^inf x^mu p(x) dx``."""
        return math.exp(self._log_mass(mu) - self._log_mass(0.0))

    def sigma_matrix(self) -> AsymptoticCovariance:
        beta, s2 = self.params.beta, self.params.sigma**2
        m0 = self.moment(-2 * beta)
        m1 = self.moment(1 - 2 * beta)
        m2 = self.moment(2 - 2 * beta)
        det = m0 * m2 - m1 * m1
        if not det > 0:
            raise SingularSigma(f"det Sigma = {det!r}")
        sig = np.array([[m0, -m1], [-m1, m2]])
        cov = s2 / det * np.array([[m2, m1], [m1, m0]])
        return AsymptoticCovariance(sig, cov, s2 / m0, s2 / m2)


def _quad(f, lo, hi, rtol, limit):
    val, err, info, *rest = integrate.quad(
        f, lo, hi, epsabs=0.0, epsrel=rtol, limit=limit, full_output=True
    )
    # quad warns (extra return value) when it misses rtol; accept unless far off
    if rest and err > 1e-9 * abs(val):
        raise QuadratureNotConverged(f"quad stopped at {val!r} +/- {err!r}: {rest[0]}")
    return val
