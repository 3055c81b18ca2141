"""Benchmark metrics and named experiments."""

from .experiments import EXPERIMENTS, run_experiment
from .metrics import (
    DEFAULT_TARGET,
    InstanceMetrics,
    TtsReport,
    approximation_ratio,
    beta_eff_fit,
    build_report,
    distinct_optimal,
    success_probability,
    time_to_epsilon,
    tts,
)

__all__ = [
    "DEFAULT_TARGET",
    "EXPERIMENTS",
    "InstanceMetrics",
    "TtsReport",
    "approximation_ratio",
    "beta_eff_fit",
    "build_report",
    "distinct_optimal",
    "run_experiment",
    "success_probability",
    "time_to_epsilon",
    "tts",
]
