"""
Explicit finite-difference solver for the traveling-wave pressure equation

    p_t = m p (p_xx + p_yy) - (c + alpha(y)) p_x + |grad p|^2

on [0, x_max] x T^1 with p = 0 at x = 0, p_x = c at x = x_max, an adaptive
CFL time step and a positivity clamp.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..flows.shear_flows import FlowProfile
from ..grid.grid_core import (
    GridSpec,
    PressureField,
    backward_x,
    centered_x,
    centered_y,
    second_xx,
    second_yy,
)
from ..grid.snapshots import SnapshotMeta, write_snapshot
from ..utils.error_handler import (
    AdmissibilityError,
    BoundaryContactError,
    CFLViolationError,
    ConfigError,
    NumericalInstabilityError,
    PMEWaveError,
)
from ..utils.logger import log_step_progress, setup_logger
from ..utils.performance import performance_monitor

logger = setup_logger(__name__)

CFL_RELATIVE_SLACK = 1e-12
LEFT_WARNING_COLUMNS = 10
LEFT_ABORT_COLUMNS = 3


@dataclass(frozen=True)
class SolverConfig:
    """Physical and time-stepping parameters of one run"""

    m: float
    c: float
    tau: float
    t_max: float
    cfl_safety: float = 1.0
    snapshot_times: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.m > 0:
            raise ConfigError(f"m must be positive, got {self.m}", key="m")
        if not self.c > 0:
            raise ConfigError(f"c must be positive, got {self.c}", key="c")
        if not 0 < self.cfl_safety <= 1.0:
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}", key="cfl_safety")
        if self.t_max < 0:
            raise ConfigError(f"t_max must be nonnegative, got {self.t_max}", key="t_max")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(b < a for a, b in zip(times, times[1:])):
            raise ConfigError("snapshot_times must be sorted", key="snapshot_times")
        object.__setattr__(self, "snapshot_times", times)

    def check(self, grid: GridSpec, flow: FlowProfile) -> None:
        """Admissibility against the domain and the flow"""
        if not 0.0 < self.tau < grid.x_max:
            raise AdmissibilityError(f"tau={self.tau} must lie in (0, {grid.x_max})", key="tau")
        if not self.c > flow.c_star:
            raise AdmissibilityError(f"c={self.c} must exceed c_star={flow.c_star:.6g}", key="c")

    @classmethod
    def from_experiment(cls, cfg) -> "SolverConfig":
        """Solver parameters of an ``ExperimentConfig``"""
        return cls(
            m=cfg.physics.m,
            c=cfg.physics.c,
            tau=cfg.tau,
            t_max=cfg.run.t_max,
            cfl_safety=cfg.run.cfl_safety,
            snapshot_times=tuple(cfg.run.snapshot_times),
        )


@dataclass(frozen=True)
class StepRecord:
    """Bookkeeping for one time step"""
    n: int
    t: float
    dt: float
    max_p: float
    clamp_count: int = 0


@dataclass(frozen=True)
class StencilWeights:
    """Coefficients of the update without the gradient-squared term,
    written as a combination of the old node values"""
    center: np.ndarray
    east: np.ndarray
    west: np.ndarray
    north: np.ndarray
    south: np.ndarray

    def minimum(self) -> float:
        return float(min(w.min() for w in (self.center, self.east, self.west, self.north, self.south)))

    def total(self) -> np.ndarray:
        return self.center + self.east + self.west + self.north + self.south


@dataclass
class SolverRun:
    """Final field and step log of :func:`run`"""
    final: PressureField
    records: List[StepRecord]
    warnings: List[str] = field(default_factory=list)

    @property
    def t(self) -> float:
        return self.records[-1].t if self.records else 0.0

    @property
    def total_clamped(self) -> int:
        return sum(r.clamp_count for r in self.records)


def initial_datum(grid: GridSpec, cfg: SolverConfig) -> PressureField:
    """The planar wave c [x - tau]^+ on every row"""
    return PressureField.from_rows(grid, lambda x, j: cfg.c * np.maximum(x - cfg.tau, 0.0))


def cfl_bound(P: PressureField, cfg: SolverConfig, flow: FlowProfile) -> float:
    """Largest stable step 1 / [2 (1/dx^2 + 1/dy^2) m max P + (c + |alpha|_inf) / dx]"""
    grid = P.grid
    max_p = max(P.max(), 0.0)
    diffusion = 2.0 * (1.0 / (grid.dx * grid.dx) + 1.0 / (grid.dy * grid.dy)) * cfg.m * max_p
    advection = (cfg.c + flow.alpha_sup) / grid.dx
    return 1.0 / (diffusion + advection)


def cfl_dt(P: PressureField, cfg: SolverConfig, flow: FlowProfile) -> float:
    """The time step actually taken: cfl_safety times the bound"""
    return cfg.cfl_safety * cfl_bound(P, cfg, flow)


def interior_update(values: np.ndarray, grid: GridSpec, cfg: SolverConfig, alpha_rows: np.ndarray,
                    dt: float, gradient_term: bool = True) -> np.ndarray:
    """New values on columns 2 .. n_x - 1, computed from the old array only"""
    Pc = values[:, 1:-1]
    d2x = second_xx(values, grid.dx)
    d2y = second_yy(values, grid.dy)[:, 1:-1]
    dmx = backward_x(values, grid.dx)
    speed = cfg.c + alpha_rows[:, None]

    rate = cfg.m * Pc * (d2x + d2y) - speed * dmx
    if gradient_term:
        dcx = centered_x(values, grid.dx)
        dcy = centered_y(values, grid.dy)[:, 1:-1]
        rate = rate + (dcx * dcx + dcy * dcy)
    return Pc + dt * rate


def monotone_weights(P: PressureField, cfg: SolverConfig, flow: FlowProfile, dt: float) -> StencilWeights:
    """Coefficients of the diffusion-advection update on the interior.

    All are nonnegative when dt respects the CFL bound and c > c_star, which
    is what keeps the scheme positive and order preserving.
    """
    grid = P.grid
    Pc = P.values[:, 1:-1]
    speed = cfg.c + flow.on_rows(grid.y_nodes)[:, None]
    kx = dt * cfg.m * Pc / (grid.dx * grid.dx)
    ky = dt * cfg.m * Pc / (grid.dy * grid.dy)
    upwind = dt * speed / grid.dx
    return StencilWeights(
        center=1.0 - 2.0 * kx - 2.0 * ky - upwind,
        east=kx,
        west=kx + upwind,
        north=ky,
        south=ky.copy(),
    )


def step(P: PressureField, cfg: SolverConfig, flow: FlowProfile, dt: float, n: int = 1, t: float = 0.0,
         alpha_rows: Optional[np.ndarray] = None) -> Tuple[PressureField, StepRecord]:
    """Advance P, the field at time t, by dt.

    Order: interior update, Dirichlet column, Neumann column, clamp.
    """
    grid = P.grid
    bound = cfl_bound(P, cfg, flow)
    if not 0.0 < dt <= bound * (1.0 + CFL_RELATIVE_SLACK):
        raise CFLViolationError(f"dt={dt:.6e} outside (0, {bound:.6e}] at step {n}")
    if alpha_rows is None:
        alpha_rows = flow.on_rows(grid.y_nodes)

    new = np.empty(grid.shape)
    new[:, 1:-1] = interior_update(P.values, grid, cfg, alpha_rows, dt)
    new[:, 0] = 0.0
    new[:, -1] = new[:, -2] + cfg.c * grid.dx

    if not np.isfinite(new).all():
        bad = int((~np.isfinite(new)).sum())
        logger.bind(step=n, t=t + dt, bad_nodes=bad).error(f"Non-finite values at step {n}")
        raise NumericalInstabilityError(f"{bad} non-finite nodes at step {n}, t={t + dt:.6g}")

    negative = new < 0.0
    clamp_count = int(negative.sum())
    if clamp_count:
        new[negative] = 0.0
        logger.bind(step=n, clamp_count=clamp_count).warning(f"Clamped {clamp_count} negative nodes at step {n}")

    P_next = PressureField(grid, new, copy=False)
    return P_next, StepRecord(n=n, t=t + dt, dt=dt, max_p=P_next.max(), clamp_count=clamp_count)


class SolverObserver:
    """Hooks called by :func:`run` between steps"""

    def on_start(self, P: PressureField, cfg: SolverConfig) -> None:
        pass

    def on_step(self, P_prev: PressureField, P_next: PressureField, record: StepRecord) -> None:
        pass

    def on_finish(self, P: PressureField, records: Sequence[StepRecord]) -> None:
        pass


class SnapshotObserver(SolverObserver):
    """Write the field at the first step reaching each requested time"""

    def __init__(self, directory: Union[str, Path], prefix: str, times: Sequence[float], m: float, c: float,
                 flow_name: str):
        self.directory = Path(directory)
        self.prefix = prefix
        self.pending = sorted(float(t) for t in times)
        self.m = m
        self.c = c
        self.flow_name = flow_name
        self.written: List[Path] = []

    def _write(self, P: PressureField, t: float) -> None:
        path = self.directory / f"{self.prefix}_snapshot_t{t:.4f}.csv"
        write_snapshot(path, P, SnapshotMeta(m=self.m, c=self.c, alpha=self.flow_name, t=t))
        self.written.append(path)
        logger.bind(path=str(path), t=t).info(f"Snapshot written at t={t:.4f}")

    def _flush_due(self, P: PressureField, t: float) -> None:
        due = [s for s in self.pending if s <= t]
        if due:
            self.pending = self.pending[len(due):]
            self._write(P, t)

    def on_start(self, P: PressureField, cfg: SolverConfig) -> None:
        self._flush_due(P, 0.0)

    def on_step(self, P_prev: PressureField, P_next: PressureField, record: StepRecord) -> None:
        self._flush_due(P_next, record.t)


def _support_reaches(P: PressureField, columns: int) -> bool:
    """True when any node with 2 <= i <= columns is positive"""
    return bool(P.values[:, 1:columns].max(initial=0.0) > 0.0)


@performance_monitor.track_performance("solver.run")
def run(grid: GridSpec, cfg: SolverConfig, flow: FlowProfile,
        observers: Sequence[SolverObserver] = (), progress_fraction: float = 0.1) -> SolverRun:
    """Advance the initial datum until the first time t >= t_max"""
    cfg.check(grid, flow)
    P = initial_datum(grid, cfg)
    alpha_rows = flow.on_rows(grid.y_nodes)
    records: List[StepRecord] = []
    warnings: List[str] = []

    for observer in observers:
        observer.on_start(P, cfg)

    logger.bind(m=cfg.m, c=cfg.c, flow=flow.name.value, n_x=grid.n_x, n_y=grid.n_y).info(
        f"Solver start: m={cfg.m} c={cfg.c} flow={flow.name.value} t_max={cfg.t_max}"
    )

    t, n = 0.0, 0
    progress_every = max(progress_fraction, 1e-6) * cfg.t_max
    next_progress = progress_every
    try:
        while t < cfg.t_max:
            dt = cfl_dt(P, cfg, flow)
            P_next, record = step(P, cfg, flow, dt, n=n + 1, t=t, alpha_rows=alpha_rows)
            records.append(record)
            for observer in observers:
                observer.on_step(P, P_next, record)
            P, t, n = P_next, record.t, record.n

            if _support_reaches(P, LEFT_WARNING_COLUMNS):
                if _support_reaches(P, LEFT_ABORT_COLUMNS):
                    raise BoundaryContactError(
                        f"support reached column i={LEFT_ABORT_COLUMNS} at t={t:.4f}; "
                        f"increase tau or x_max"
                    )
                if not warnings:
                    message = f"support within {LEFT_WARNING_COLUMNS} columns of x=0 at t={t:.4f}"
                    logger.warning(f"Solver: {message}; consider a larger tau or x_max")
                    warnings.append(message)

            if t >= next_progress or t >= cfg.t_max:
                log_step_progress(t, cfg.t_max, n, dt, record.max_p)
                next_progress += progress_every
    except PMEWaveError:
        logger.bind(step=n + 1, t=t).error(f"Solver aborted after {n} steps at t={t:.6g}")
        raise
    finally:
        for observer in observers:
            observer.on_finish(P, records)

    return SolverRun(final=P, records=records, warnings=warnings)
