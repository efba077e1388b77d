import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckls import diffusion
from ckls.diffusion import QvProbeConfig
from ckls.errors import (
    InvalidProbeConfig,
    LogDenominatorNearZero,
    ZeroQvIncrement,
)
from ckls.model import ModelParams, RngConfig, SamplePath, simulate_path

DT = 2.0**-10


def exact_qv(values, sigma, beta, dt=DT):
    """Cumulative ``sigma^2 sum r_k^{2 beta} dt`` on the path grid."""
    inc = sigma**2 * values[:-1] ** (2 * beta) * dt
    return np.concatenate([[0.0], np.cumsum(inc)])


def piecewise_path(levels, cells_per_level):
    return SamplePath(DT, np.repeat(levels, cells_per_level).astype(float))


def test_beta1_exact_on_synthetic_window():
    beta0, sigma = 0.73, 1.3
    path = SamplePath(DT, np.full(257, math.e))
    cfg = QvProbeConfig(h=64 * DT, points=(64 * DT,))
    qv = exact_qv(path.values, sigma, beta0)
    est = diffusion.beta_known_sigma(path, sigma, cfg, qv)
    assert est.beta_hat == pytest.approx(beta0, rel=1e-12)
    assert est.method is diffusion.DiffusionMethod.BETA1


def test_beta2_exact_on_synthetic_pair():
    beta0 = 0.81
    path = piecewise_path([1.0, math.e], [256, 257])
    cfg = QvProbeConfig(h=64 * DT, pairs=((64 * DT, 320 * DT),))
    qv = exact_qv(path.values, 2.0, beta0)
    assert diffusion.beta_unknown_sigma(path, cfg, qv).beta_hat == pytest.approx(beta0, rel=1e-12)


def test_beta2_is_invariant_under_qv_rescaling():
    p = ModelParams(3, 2, 1, 0.8, 0.2)
    path = simulate_path(p, 1 + 2**-6, 16640, RngConfig(4))
    cfg = QvProbeConfig.default_layout()
    qv = np.array(diffusion.PathFunctionals(path).qv_series())
    base = diffusion.beta_unknown_sigma(path, cfg).beta_hat
    # a power of two scales without rounding, so the result is bit-identical
    assert diffusion.beta_unknown_sigma(path, cfg, qv * 1024.0).beta_hat == base
    assert diffusion.beta_unknown_sigma(path, cfg, qv * 7.3).beta_hat == pytest.approx(base, rel=1e-13)


def test_sigma2_on_unit_constant_path():
    path = SamplePath(DT, np.ones(600))
    cfg = QvProbeConfig(h=64 * DT, points=(0.125, 0.25, 0.375))
    qv = np.arange(600) * DT  # increment of exactly h per window when sigma = 1
    est = diffusion.sigma2_known_beta(path, 0.7, cfg, qv)
    assert est.sigma2_hat == pytest.approx(1.0, rel=1e-12)


def test_exact_constructions_recover_parameters():
    # path constant over every probe window, so the window QV equals sigma^2 r^{2beta} h
    beta0, sigma = 0.66, 0.8
    levels = [0.3, 2.5, 0.4, 3.0, 0.6, 4.0, 0.5, 2.0, 1.0]
    path = piecewise_path(levels, 128)
    pts = tuple(128 * DT * i for i in range(1, 8))
    cfg = QvProbeConfig(h=64 * DT, points=pts, pairs=tuple(zip(pts[:-1], pts[1:])))
    qv = exact_qv(path.values, sigma, beta0)
    assert diffusion.beta_known_sigma(path, sigma, cfg, qv).beta_hat == pytest.approx(beta0, rel=1e-6)
    assert diffusion.beta_unknown_sigma(path, cfg, qv).beta_hat == pytest.approx(beta0, rel=1e-6)
    assert diffusion.sigma2_known_beta(path, beta0, cfg, qv).sigma2_hat == pytest.approx(
        sigma**2, rel=1e-6
    )


def test_single_cell_window_recovers_beta_on_simulated_path():
    p = ModelParams(3, 2, 1, 0.7, 0.2)
    path = simulate_path(p, 1 + 2**-6, 16640, RngConfig(9))
    cfg = QvProbeConfig(h=path.dt, points=tuple(i / 8 for i in range(1, 9)))
    qv = exact_qv(path.values, 1.0, 0.7, path.dt)
    assert diffusion.beta_known_sigma(path, 1.0, cfg, qv).beta_hat == pytest.approx(0.7, abs=1e-10)
    assert diffusion.sigma2_known_beta(path, 0.7, cfg, qv).sigma2_hat == pytest.approx(1.0, rel=1e-10)


def test_flat_window_raises():
    path = SamplePath(DT, np.full(300, 2.0))
    cfg = QvProbeConfig(h=64 * DT, points=(0.125,), pairs=((0.0625, 0.125),))
    with pytest.raises(ZeroQvIncrement):
        diffusion.beta_known_sigma(path, 1.0, cfg)
    with pytest.raises(ZeroQvIncrement):
        diffusion.beta_unknown_sigma(path, cfg)


def test_probe_values_near_one_raise():
    path = SamplePath(DT, np.full(300, 1.0002))
    cfg = QvProbeConfig(h=64 * DT, points=(0.125,), pairs=((0.0625, 0.125),))
    qv = exact_qv(path.values, 1.0, 0.7)
    with pytest.raises(LogDenominatorNearZero, match="far from 1"):
        diffusion.beta_known_sigma(path, 1.0, cfg, qv)
    with pytest.raises(LogDenominatorNearZero):
        diffusion.beta_unknown_sigma(path, cfg, qv)


def test_probe_config_validation():
    path = SamplePath(DT, np.full(300, 2.0))
    with pytest.raises(InvalidProbeConfig):
        QvProbeConfig(h=0.0, points=(0.1,))
    with pytest.raises(InvalidProbeConfig):
        QvProbeConfig(h=0.01, pairs=((0.1, 0.1),))
    with pytest.raises(InvalidProbeConfig):
        QvProbeConfig(h=0.01)
    with pytest.raises(InvalidProbeConfig, match="multiple of dt"):
        QvProbeConfig(h=1.5 * DT, points=(0.1,)).validate_for(path)
    with pytest.raises(InvalidProbeConfig, match="leaves"):
        QvProbeConfig(h=64 * DT, points=(0.25,)).validate_for(path)
    with pytest.raises(InvalidProbeConfig, match="not on the grid"):
        QvProbeConfig(h=64 * DT, points=(0.1 + DT / 3,)).validate_for(path)
    with pytest.raises(InvalidProbeConfig, match="leaves"):
        QvProbeConfig(h=64 * DT, points=(0.0,)).validate_for(path)


def test_default_layout_layout():
    cfg = QvProbeConfig.default_layout()
    assert cfg.h == 2**-6
    assert cfg.points == tuple(i / 8 for i in range(1, 9))
    assert cfg.pairs[0] == (1 / 16, 9 / 16) and cfg.pairs[-1] == (0.5, 1.0)
    assert cfg.horizon == 1 + 2**-6


def test_global_sigma2_on_fine_path():
    p = ModelParams(3, 2, 1, 0.7, 1.0)
    path = simulate_path(p, 1.0, 2**14, RngConfig(0))
    assert diffusion.sigma2_global(path, 0.7) == pytest.approx(1.0, abs=0.02)
    est = diffusion.sigma2_known_beta(path, 0.7, QvProbeConfig(h=2**-6, points=(0.5,)))
    assert est.details["global"] == pytest.approx(diffusion.sigma2_global(path, 0.7), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    beta0=st.floats(0.5, 0.99),
    sigma=st.floats(0.2, 3.0),
    levels=st.lists(st.floats(0.05, 20.0), min_size=3, max_size=8),
)
def test_exactness_property(beta0, sigma, levels):
    path = piecewise_path(levels, 64)
    pts = tuple(64 * DT * i for i in range(1, len(levels) - 1))
    pairs = tuple(zip(pts[:-1], pts[1:]))
    qv = exact_qv(path.values, sigma, beta0)
    cfg = QvProbeConfig(h=32 * DT, points=pts, pairs=pairs)
    try:
        est = diffusion.beta_known_sigma(path, sigma, cfg, qv)
    except LogDenominatorNearZero:
        pass
    else:
        assert est.beta_hat == pytest.approx(beta0, rel=1e-6)
    assert diffusion.sigma2_known_beta(path, beta0, cfg, qv).sigma2_hat == pytest.approx(
        sigma**2, rel=1e-6
    )


@pytest.mark.slow
def test_refinement_of_window_on_average():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = ModelParams(3, 2, 1, 0.7, 0.0)
    pts = tuple(i / 8 for i in range(1, 9))
    wide, narrow = QvProbeConfig(h=2**-6, points=pts), QvProbeConfig(h=2**-7, points=pts)
    e_wide, e_narrow = [], []
    for i in range(100):
        path = simulate_path(p, 1 + 2**-6, 16640, RngConfig(0), i)
        e_wide.append(abs(diffusion.beta_known_sigma(path, 1.0, wide).beta_hat - 0.7))
        e_narrow.append(abs(diffusion.beta_known_sigma(path, 1.0, narrow).beta_hat - 0.7))
    diff = np.array(e_narrow) - np.array(e_wide)
    se = diff.std(ddof=1) / math.sqrt(diff.size)
    assert diff.mean() <= 2 * se
