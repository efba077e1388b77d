"""Drift estimators for (a, b) from a continuously observed path.

All four estimators are closed-form ratios of path functionals:

* ``mle_joint``: maximum likelihood for the couple (a, b); needs only beta.
* ``mle_b_given_a`` / ``mle_a_given_b``: one-parameter maximum likelihood.
* ``alt_joint``: solves the two ergodic moment equations
  ``mean(r) -> a/b`` and ``mean(r^{3-2beta}) - (a/b) mean(r^{2-2beta}) -> sigma^2 (1-beta) a/b^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateDenominator
from .model import SamplePath
from .path_ops import PathFunctionals

REL_DEGENERACY = 1e-12


class DriftKind(str, Enum):
    MLE_JOINT = "mle_joint"
    MLE_A_GIVEN_B = "mle_a_given_b"
    MLE_B_GIVEN_A = "mle_b_given_a"
    ALT_JOINT = "alt_joint"


@dataclass(frozen=True)
class DriftEstimate:
    a_hat: float
    b_hat: float
    kind: DriftKind
    denominator: float
    T: float


def _functionals(path) -> PathFunctionals:
    return path if isinstance(path, PathFunctionals) else PathFunctionals(path)


def _check_beta(beta: float):
    if not 0.5 <= beta < 1.0:
        raise ValueError(f"beta must lie in [1/2, 1), got {beta}")


def mle_joint(path: SamplePath | PathFunctionals, beta: float) -> DriftEstimate:
    """Joint maximum likelihood estimate of (a, b).

    Raises ``DegenerateDenominator`` when the Cauchy-Schwarz gap
    ``D = I(-2b) I(2-2b) - I(1-2b)^2`` is not positive relative to
    ``I(-2b) I(2-2b)`` (constant or nearly constant paths).
    """
    _check_beta(beta)
    f = _functionals(path)
    i_m2 = f.time_integral(-2 * beta)
    i_m1 = f.time_integral(1 - 2 * beta)
    i_0 = f.time_integral(2 - 2 * beta)
    s_m2 = f.ito_sum(-2 * beta)
    s_m1 = f.ito_sum(1 - 2 * beta)
    scale = i_m2 * i_0
    D = scale - i_m1 * i_m1
    if not D > REL_DEGENERACY * scale:
        raise DegenerateDenominator(f"joint MLE denominator {D!r} vs scale {scale!r}")
    a_hat = (s_m2 * i_0 - s_m1 * i_m1) / D
    b_hat = (s_m2 * i_m1 - s_m1 * i_m2) / D
    return DriftEstimate(a_hat, b_hat, DriftKind.MLE_JOINT, D, f.T)


def mle_b_given_a(path: SamplePath | PathFunctionals, a: float, beta: float) -> DriftEstimate:
    _check_beta(beta)
    f = _functionals(path)
    den = f.time_integral(2 - 2 * beta)
    if not den > 0:
        raise DegenerateDenominator(f"integral of r^(2-2beta) is {den!r}")
    b_hat = (a * f.time_integral(1 - 2 * beta) - f.ito_sum(1 - 2 * beta)) / den
    return DriftEstimate(float(a), b_hat, DriftKind.MLE_B_GIVEN_A, den, f.T)


def mle_a_given_b(path: SamplePath | PathFunctionals, b: float, beta: float) -> DriftEstimate:
    _check_beta(beta)
    f = _functionals(path)
    den = f.time_integral(-2 * beta)
    if not den > 0:
        raise DegenerateDenominator(f"integral of r^(-2beta) is {den!r}")
    a_hat = (b * f.time_integral(1 - 2 * beta) + f.ito_sum(-2 * beta)) / den
    return DriftEstimate(a_hat, float(b), DriftKind.MLE_A_GIVEN_B, den, f.T)


def alt_joint(path: SamplePath | PathFunctionals, sigma: float, beta: float) -> DriftEstimate:
    """Ergodic-moment estimator of (a, b); needs sigma and beta.

    The ratio ``a_hat / b_hat`` is always the time average of the path.
    """
    _check_beta(beta)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    f = _functionals(path)
    T = f.T
    i1 = f.time_integral(1.0)
    i3 = f.time_integral(3 - 2 * beta)
    i2 = f.time_integral(2 - 2 * beta)
    scale = T * i3
    D = scale - i1 * i2
    if not abs(D) > REL_DEGENERACY * abs(scale):
        raise DegenerateDenominator(f"alternative-estimator denominator {D!r} vs scale {scale!r}")
    k = sigma**2 * (1 - beta)
    return DriftEstimate(k * i1 * i1 / D, k * T * i1 / D, DriftKind.ALT_JOINT, D, T)


def log_likelihood(
    path: SamplePath | PathFunctionals, a: float, b: float, sigma: float, beta: float
) -> float:
    """Discretized Girsanov log-likelihood of (a, b) relative to zero drift.

    ``int (a - b r)/(sigma^2 r^{2beta}) dr - 1/2 int (a - b r)^2/(sigma^2 r^{2beta}) dt``,
    expanded into the same left-point functionals the estimators use.
    """
    f = _functionals(path)
    s2 = sigma**2
    stoch = a * f.ito_sum(-2 * beta) - b * f.ito_sum(1 - 2 * beta)
    quad = (
        a * a * f.time_integral(-2 * beta)
        - 2 * a * b * f.time_integral(1 - 2 * beta)
        + b * b * f.time_integral(2 - 2 * beta)
    )
    return (stoch - 0.5 * quad) / s2


def estimate(path, kind: DriftKind | str, *, beta: float, sigma=None, a=None, b=None) -> DriftEstimate:
    """Dispatch to the estimator named by ``kind``."""
    kind = DriftKind(kind)
    if kind is DriftKind.MLE_JOINT:
        return mle_joint(path, beta)
    if kind is DriftKind.MLE_B_GIVEN_A:
        return mle_b_given_a(path, a, beta)
    if kind is DriftKind.MLE_A_GIVEN_B:
        return mle_a_given_b(path, b, beta)
    return alt_joint(path, sigma, beta)


def is_finite(est: DriftEstimate) -> bool:
    return bool(np.isfinite(est.a_hat) and np.isfinite(est.b_hat))
