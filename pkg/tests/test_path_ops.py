import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ckls.errors import ZeroValueNegativePower
from ckls.model import ModelParams, RngConfig, SamplePath, simulate_path
from ckls.path_ops import (
    PathFunctionals,
    ito_integral,
    quadratic_variation,
    riemann_integral,
)

positive_paths = st.builds(
    SamplePath,
    dt=st.floats(1e-3, 1.0),
    values=hnp.arrays(
        float, st.integers(2, 60), elements=st.floats(0.05, 20.0, allow_nan=False)
    ),
)


def test_mu_zero_gives_horizon():
    path = SamplePath(0.1, np.linspace(1, 2, 51))
    assert riemann_integral(path, 0.0) == path.T
    assert PathFunctionals(path).time_integral(0.0) == path.T


@pytest.mark.parametrize("mu", [-1.4, 0.3, 2.0])
def test_constant_path_integral(mu):
    path = SamplePath(0.01, np.full(101, 2.5))
    assert riemann_integral(path, mu) == pytest.approx(2.5**mu * 1.0, rel=1e-13)


def test_linear_path_integral_against_closed_form():
    n = 2**16
    path = SamplePath(1 / n, 1 + np.arange(n + 1) / n)
    assert riemann_integral(path, 1.0, 1.0) == pytest.approx(1.5, abs=1e-4)


def test_partial_cell_is_prorated_with_left_value():
    path = SamplePath(1.0, [1.0, 2.0, 4.0])
    assert riemann_integral(path, 1.0, 1.5) == pytest.approx(1.0 + 0.5 * 2.0)
    assert riemann_integral(path, 1.0, 0.25) == pytest.approx(0.25)


def test_t_hi_outside_path_rejected():
    path = SamplePath(1.0, [1.0, 2.0, 4.0])
    with pytest.raises(ValueError):
        riemann_integral(path, 1.0, 2.5)
    with pytest.raises(ValueError):
        quadratic_variation(path, 0.0)


def test_negative_power_at_zero_raises():
    path = SamplePath(0.1, [0.0, 1.0, 2.0])
    with pytest.raises(ZeroValueNegativePower):
        riemann_integral(path, -1.0)
    with pytest.raises(ZeroValueNegativePower):
        ito_integral(path, -0.5)
    assert riemann_integral(path, 1.0) == pytest.approx(0.1)


def test_ito_telescopes_at_mu_zero():
    path = SamplePath(0.1, [1.0, 3.0, 2.0, 5.0])
    assert ito_integral(path, 0.0) == pytest.approx(4.0)


def test_ito_vanishes_on_constant_path():
    assert ito_integral(SamplePath(0.1, np.full(10, 3.0)), -1.4) == 0.0


def test_quadratic_variation_of_linear_path():
    n = 64
    path = SamplePath(1 / n, np.arange(n + 1) / n)
    assert quadratic_variation(path) == pytest.approx(1 / n, rel=1e-12)
    assert quadratic_variation(SamplePath(0.1, np.full(5, 2.0))) == 0.0


def test_qv_matches_integrated_diffusion_on_fine_grid():
    p = ModelParams(3, 2, 1, 0.7, 1.0)
    path = simulate_path(p, 1.0, 2**14, RngConfig(0))
    ratio = quadratic_variation(path, 1.0) / (p.sigma**2 * riemann_integral(path, 2 * p.beta, 1.0))
    assert abs(ratio - 1) < 0.02


def test_qv_series_starts_at_zero_and_matches_sums():
    p = ModelParams(3, 2, 1, 0.7, 1.0)
    path = simulate_path(p, 1.0, 1000, RngConfig(1))
    qv = PathFunctionals(path).qv_series()
    assert qv[0] == 0.0
    assert np.all(np.diff(qv) >= 0)
    assert qv[500] == pytest.approx(quadratic_variation(path, 0.5), rel=1e-12)


def test_riemann_refinement_halves_the_gap_on_smooth_path():
    fine = 2**14
    t = np.arange(fine + 1) / fine
    values = 2 + np.sin(3 * t)
    exact = 2 + (1 - np.cos(3.0)) / 3
    gaps = []
    for step in (64, 32, 16):
        coarse = SamplePath(step / fine, values[::step])
        gaps.append(abs(riemann_integral(coarse, 1.0) - exact))
    assert gaps[1] <= 0.55 * gaps[0]
    assert gaps[2] <= 0.55 * gaps[1]


def test_riemann_refinement_on_simulated_paths():
    # gap to the finest-grid value, averaged over paths; left-point error is O(dt)
    p = ModelParams(3, 2, 1, 0.7, 1.0)
    g_coarse, g_fine = [], []
    for i in range(20):
        path = simulate_path(p, 1.0, 2**14, RngConfig(5), i)
        ref = riemann_integral(path, 1.0)
        g_coarse.append(abs(riemann_integral(SamplePath(path.dt * 64, path.values[::64]), 1.0) - ref))
        g_fine.append(abs(riemann_integral(SamplePath(path.dt * 32, path.values[::32]), 1.0) - ref))
    assert np.mean(g_fine) <= 0.75 * np.mean(g_coarse)


@settings(max_examples=200, deadline=None)
@given(positive_paths)
def test_discrete_ito_identity(path):
    v = path.values
    lhs = ito_integral(path, 1.0)
    rhs = 0.5 * (v[-1] ** 2 - v[0] ** 2 - quadratic_variation(path))
    scale = np.sum(np.abs(v[:-1] * np.diff(v))) + v[-1] ** 2 + v[0] ** 2
    assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(positive_paths, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_qv_monotone_in_time(path, u, w):
    s, t = sorted((u, w))
    s, t = max(s, 1e-6) * path.T, max(t, 1e-6) * path.T
    assert quadratic_variation(path, s) <= quadratic_variation(path, t)


@settings(max_examples=100, deadline=None)
@given(positive_paths, st.floats(0.05, 0.95), st.floats(-2.0, 3.0))
def test_riemann_additive_within_one_cell(path, frac, mu):
    # whole = [0, s] + [s, T] where the second piece starts at the next grid point
    k = max(1, min(path.n_steps - 1, int(frac * path.n_steps)))
    if path.n_steps < 2:
        return
    s = k * path.dt
    left = riemann_integral(path, mu, s)
    right = riemann_integral(path.tail(k), mu)
    whole = riemann_integral(path, mu)
    cell = path.dt * np.max(path.values**mu)
    assert abs(left + right - whole) <= cell


def test_functionals_cache_returns_same_values():
    path = SamplePath(0.1, [1.0, 2.0, 3.0, 2.5])
    f = PathFunctionals(path)
    assert f.time_integral(-1.4) == riemann_integral(path, -1.4)
    assert f.ito_sum(-1.4) == ito_integral(path, -1.4)
    assert f.powers(-1.4) is f.powers(-1.4)
