"""Predictive safety filter toolkit: model-learning safe control with a
certified backup-plan filter."""

from ._core import (
    BenchmarkResult,
    ConfigError,
    ContractViolation,
    DynamicsBelief,
    EpisodeLog,
    FilterDecision,
    FilterMode,
    NumericalError,
    PendulumParams,
    RunConfig,
    RunMode,
    SafetyFilter,
    SolveStatus,
    StepRecord,
    Transition,
    logs_to_json,
    pendulum_step,
    run_benchmark,
)

__all__ = [
    "BenchmarkResult",
    "ConfigError",
    "ContractViolation",
    "DynamicsBelief",
    "EpisodeLog",
    "FilterDecision",
    "FilterMode",
    "NumericalError",
    "PendulumParams",
    "RunConfig",
    "RunMode",
    "SafetyFilter",
    "SolveStatus",
    "StepRecord",
    "Transition",
    "logs_to_json",
    "pendulum_step",
    "run_benchmark",
]
