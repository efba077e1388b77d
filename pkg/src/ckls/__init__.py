"""Simulation and parameter estimation for the CKLS short-rate model
``dr = (a - b r) dt + sigma r^beta dW``."""

from .diffusion import (
    DiffusionEstimate,
    QvProbeConfig,
    beta_known_sigma,
    beta_unknown_sigma,
    sigma2_global,
    sigma2_known_beta,
)
from .drift import (
    DriftEstimate,
    DriftKind,
    alt_joint,
    log_likelihood,
    mle_a_given_b,
    mle_b_given_a,
    mle_joint,
)
from .errors import *  # noqa: F401,F403
from .experiments import McConfig, McReport, run_diffusion_table, run_drift_table, write_report
from .model import ModelParams, RngConfig, SamplePath, euler_step, simulate_path, validate_params
from .path_ops import PathFunctionals, ito_integral, quadratic_variation, riemann_integral
from .stationary import AsymptoticCovariance, StationaryModel

__version__ = "0.1.0"
