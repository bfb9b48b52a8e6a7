"""Weighted sum-rate beamforming for the multi-user MISO downlink.

Solvers: learning-aided gradient descent (:mod:`lagdbf.lagd`), WMMSE
(:mod:`lagdbf.wmmse`) and projected GD / Adam (:mod:`lagdbf.baselines`).
"""

__version__ = "0.1.0"

from .baselines import adam_solve, gd_solve
from .estimators import AdamBeamformer, GDBeamformer, LAGDBeamformer, WMMSEBeamformer
from .exceptions import ConfigurationError, DimensionError, NumericDomainError, SolverError
from .harness import ExperimentSpec, emit_results, run_experiment, run_trace
from .lagd import LagdConfig, lagd_multistart, lagd_solve, lagd_step
from .model import (
    RunResult,
    SystemConfig,
    project_power,
    random_precoder,
    sample_channel,
    sinr,
    snr_to_power,
    wsr,
    wsr_gradient,
)
from .network import UpdateNet, init_net
from .wmmse import wmmse_solve

__all__ = [
    "AdamBeamformer", "ConfigurationError", "DimensionError", "ExperimentSpec",
    "GDBeamformer", "LAGDBeamformer", "LagdConfig", "NumericDomainError", "RunResult",
    "SolverError", "SystemConfig", "UpdateNet", "WMMSEBeamformer", "adam_solve",
    "emit_results", "gd_solve", "init_net", "lagd_multistart", "lagd_solve", "lagd_step",
    "project_power", "random_precoder", "run_experiment", "run_trace", "sample_channel",
    "sinr", "snr_to_power", "wmmse_solve", "wsr", "wsr_gradient",
]
