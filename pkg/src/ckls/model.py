"""CKLS model parameters, sample paths and the Euler simulator.

The model is ``dr = (a - b r) dt + sigma r^beta dW``. Paths are produced by a
full-truncation Euler scheme driven by a counter-based generator, so a path is
a pure function of ``(params, T, n_steps, rng, replicate_index)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import ndtri

from .errors import InvalidParameter, NonFinite

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ModelParams:
    a: float
    b: float
    sigma: float
    beta: float
    r0: float = 1.0

    @property
    def long_run_mean(self) -> float:
        return self.a / self.b


def validate_params(p: ModelParams) -> ModelParams:
    """Check the standing assumptions and return ``p`` unchanged.

    ``beta`` may equal 1/2 only when ``2a > sigma^2``. ``r0 = 0`` is accepted
    with a warning because the reproduction runs start there.
    """
    for name in ("a", "b", "sigma", "beta", "r0"):
        v = getattr(p, name)
        if not math.isfinite(v):
            raise InvalidParameter(name, f"must be finite, got {v!r}")
    if p.a <= 0:
        raise InvalidParameter("a", f"must be > 0, got {p.a}")
    if p.b <= 0:
        raise InvalidParameter("b", f"must be > 0, got {p.b}")
    if p.sigma <= 0:
        raise InvalidParameter("sigma", f"must be > 0, got {p.sigma}")
    if not 0.5 <= p.beta < 1.0:
        raise InvalidParameter("beta", f"must lie in [1/2, 1), got {p.beta}")
    if p.beta == 0.5 and not 2 * p.a > p.sigma**2:
        raise InvalidParameter(
            "beta", f"beta = 1/2 requires 2a > sigma^2 (2a={2 * p.a}, sigma^2={p.sigma**2})"
        )
    if p.r0 < 0:
        raise InvalidParameter("r0", f"must be >= 0, got {p.r0}")
    if p.r0 == 0:
        warnings.warn(
            "r0 = 0 lies outside the positive-start assumption; the first "
            "observation is zero and negative-power functionals are undefined there",
            stacklevel=2,
        )
    return p


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Observations ``values[k]`` of r at times ``t0 + k*dt``."""

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a sample path needs at least 2 points")
        if not np.all(np.isfinite(v)):
            raise NonFinite("sample path contains non-finite values")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def T(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    def head(self, n_steps: int) -> SamplePath:
        """The sub-path covering the first ``n_steps`` cells."""
        if not 1 <= n_steps <= self.n_steps:
            raise ValueError(f"n_steps must be in [1, {self.n_steps}], got {n_steps}")
        return SamplePath(self.dt, self.values[: n_steps + 1], self.t0)

    def tail(self, start: int) -> SamplePath:
        """The sub-path starting at grid index ``start``."""
        if not 0 <= start <= self.n_steps - 1:
            raise ValueError(f"start must be in [0, {self.n_steps - 1}], got {start}")
        return SamplePath(self.dt, self.values[start:], self.t0 + start * self.dt)

    def __eq__(self, other):
        if not isinstance(other, SamplePath):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.t0 == other.t0
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood 2014) on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngConfig:
    """Randomness contract for simulation.

    Replicate ``i`` draws from Philox4x64-10 keyed with
    ``(splitmix64(master_seed), splitmix64(i))``, counter starting at 0. Each
    raw 64-bit output ``u`` becomes the uniform ``((u >> 11) + 0.5) / 2**53``,
    which lies strictly inside (0, 1), and then a normal via the inverse CDF.
    """

    master_seed: int = 0
    algorithm: str = field(default="philox4x64-10/splitmix64-key", init=False)
    normal_method: str = field(default="inverse-cdf/ndtri", init=False)

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def stream_key(self, replicate_index: int) -> tuple[int, int]:
        return splitmix64(self.master_seed), splitmix64(replicate_index & _MASK64)

    def uniforms(self, replicate_index: int, n: int) -> np.ndarray:
        key = np.array(self.stream_key(replicate_index), dtype=np.uint64)
        raw = np.random.Philox(key=key).random_raw(n)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def normals(self, replicate_index: int, n: int) -> np.ndarray:
        return ndtri(self.uniforms(replicate_index, n))


def euler_step(p: ModelParams, r: float, dt: float, z: float) -> float:
    """One full-truncation Euler update, clamped at zero."""
    diffusion = p.sigma * max(r, 0.0) ** p.beta * math.sqrt(dt) * z
    return max(0.0, r + (p.a - p.b * r) * dt + diffusion)


@numba.njit(cache=True, nogil=True)
def _euler_loop(a, b, sigma, beta, r0, dt, z):
    out = np.empty(z.size + 1)
    out[0] = r0
    sq = math.sqrt(dt)
    r = r0
    for k in range(z.size):
        rp = r if r > 0.0 else 0.0
        r = r + (a - b * r) * dt + sigma * rp**beta * sq * z[k]
        if r < 0.0:
            r = 0.0
        out[k + 1] = r
    return out


def simulate_path(
    p: ModelParams,
    T: float,
    n_steps: int,
    rng: RngConfig,
    replicate_index: int = 0,
    *,
    zero_noise: bool = False,
) -> SamplePath:
    """Simulate r on ``[0, T]`` with ``n_steps`` Euler steps.

    ``zero_noise=True`` replaces every normal draw by 0 (testing only).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not T > 0:
        raise ValueError("T must be positive")
    dt = T / n_steps
    if zero_noise:
        z = np.zeros(n_steps)
    else:
        z = rng.normals(replicate_index, n_steps)
    values = _euler_loop(
        float(p.a), float(p.b), float(p.sigma), float(p.beta), float(p.r0), dt, z
    )
    if not np.all(np.isfinite(values)):
        raise NonFinite(f"simulation overflowed for {p}")
    return SamplePath(dt, values)
