import warnings

import numpy as np
import pytest

from ckls.model import ModelParams, RngConfig, SamplePath, simulate_path

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def base_params():
    return ModelParams(a=3.0, b=2.0, sigma=1.0, beta=0.7, r0=1.0)


@pytest.fixture
def rng():
    return RngConfig(12345)


def zero_noise_path(beta=0.7, r0=1.0, T=10.0, n=10_000, a=3.0, b=2.0):
    p = ModelParams(a, b, 1.0, beta, r0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return simulate_path(p, T, n, RngConfig(0), zero_noise=True)


def constant_path(c=1.5, n=100, dt=0.01):
    return SamplePath(dt, np.full(n + 1, c))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
