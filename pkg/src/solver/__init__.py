"""
Explicit scheme, CFL step selection and run loop
"""

from .pme_solver import (
    SnapshotObserver,
    SolverConfig,
    SolverObserver,
    SolverRun,
    StencilWeights,
    StepRecord,
    cfl_bound,
    cfl_dt,
    initial_datum,
    interior_update,
    monotone_weights,
    run,
    step,
)

__all__ = [
    "SnapshotObserver",
    "SolverConfig",
    "SolverObserver",
    "SolverRun",
    "StencilWeights",
    "StepRecord",
    "cfl_bound",
    "cfl_dt",
    "initial_datum",
    "interior_update",
    "monotone_weights",
    "run",
    "step",
]
