"""Variational loop: objectives, gradients, optimisation, noise and CDR."""

from __future__ import annotations

from .cdr import CDRError, CDRModel, cdr_apply, cdr_fit, fit_mse
from .experiments import (
    SCAN_COLUMNS,
    TREE_COLUMNS,
    ScanResult,
    TreeReport,
    run_jobs,
    scan_experiment,
    tree_xy_experiment,
)
from .objective import (
    Evaluation,
    NodeWiseSimulator,
    NoiseModel,
    Objective,
    ObjectiveError,
    ObjectiveSpec,
    PauliOperator,
    gradient,
    measurement_settings,
    value_and_gradient,
)
from .optimizer import MinimizeResult, OptimizerConfig, RunResult, lbfgs, optimize, relative_error

__all__ = [
    "CDRError",
    "CDRModel",
    "Evaluation",
    "MinimizeResult",
    "NodeWiseSimulator",
    "NoiseModel",
    "Objective",
    "ObjectiveError",
    "ObjectiveSpec",
    "OptimizerConfig",
    "PauliOperator",
    "RunResult",
    "SCAN_COLUMNS",
    "ScanResult",
    "TREE_COLUMNS",
    "TreeReport",
    "cdr_apply",
    "cdr_fit",
    "fit_mse",
    "gradient",
    "lbfgs",
    "measurement_settings",
    "optimize",
    "relative_error",
    "run_jobs",
    "scan_experiment",
    "tree_xy_experiment",
    "value_and_gradient",
]
