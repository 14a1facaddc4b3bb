"""
Residual norms, marker drift and convergence detection in the drifting frame
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from ..grid.grid_core import GridSpec, PressureField, centered_x, require_same_grid
from ..models.schemas import ConvergenceVerdict
from ..solver.pme_solver import SolverConfig, SolverObserver, StepRecord
from ..utils.error_handler import InsufficientSamplesError
from ..utils.logger import setup_logger

logger = setup_logger(__name__)

PLATEAU_TOLERANCE = 0.2


@dataclass(frozen=True)
class ResidualReport:
    """Norms of the time derivative at one diagnostics time"""
    t: float
    l2: float
    linf: float
    e_corr: float
    drift_rate: float = 0.0
    verdict: ConvergenceVerdict = ConvergenceVerdict.NOT_CONVERGED


@dataclass
class DriftEstimate:
    """Marker series p~(t) = p(t, x_max, y0) and the drift rates derived from it"""
    y0_row: int
    window: int
    times: List[float] = field(default_factory=list)
    p_tilde: List[float] = field(default_factory=list)
    rate_times: List[float] = field(default_factory=list)
    drift_rates: List[float] = field(default_factory=list)

    def add_sample(self, t: float, value: float) -> None:
        self.times.append(t)
        self.p_tilde.append(value)

    def current_rate(self, c: float) -> Optional[float]:
        """Trailing-window drift rate, or None before the window fills"""
        if len(self.p_tilde) < self.window:
            return None
        return drift_rate(self.times, self.p_tilde, c, self.window)

    def shift(self) -> np.ndarray:
        """X*(t) at ``rate_times``, integrated from the drift series with X*(first) = 0"""
        if not self.drift_rates:
            return np.zeros(0)
        return integrate.cumulative_trapezoid(self.drift_rates, self.rate_times, initial=0.0)


def residual_field(P_prev: PressureField, P_next: PressureField, dt: float) -> np.ndarray:
    """Forward difference quotient (P_next - P_prev) / dt on every node"""
    require_same_grid(P_prev, P_next)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (P_next.values - P_prev.values) / dt


def quadrature_weights(grid: GridSpec) -> np.ndarray:
    """Trapezoid weights in x times dy, so the measure of the cylinder is x_max"""
    wx = np.full(grid.n_x, grid.dx)
    wx[0] = wx[-1] = 0.5 * grid.dx
    return np.broadcast_to(wx * grid.dy, grid.shape)


def norms(residual: np.ndarray, grid: GridSpec) -> Tuple[float, float]:
    """(L2, Linf) of a nodal field over the unique nodes"""
    residual = np.asarray(residual, dtype=np.float64)
    if residual.size == 0:
        return 0.0, 0.0
    l2 = float(np.sqrt(np.sum(quadrature_weights(grid) * residual * residual)))
    return l2, float(np.max(np.abs(residual)))


def drift_rate(times: Sequence[float], p_tilde: Sequence[float], c: float, window: int) -> float:
    """Least-squares slope of p~ over the trailing window, divided by c"""
    if window < 2 or len(p_tilde) < window or len(times) != len(p_tilde):
        raise InsufficientSamplesError(f"drift rate needs {window} samples, have {len(p_tilde)}")
    t = np.asarray(times[-window:], dtype=np.float64)
    p = np.asarray(p_tilde[-window:], dtype=np.float64)
    if np.ptp(p) == 0.0:
        return 0.0
    return float(stats.linregress(t, p).slope) / c


def corrected_residual(P_prev: PressureField, P_next: PressureField, dt: float, drift: float) -> float:
    """Linf over interior columns of |dP/dt - (centered P_x) * drift|"""
    residual = residual_field(P_prev, P_next, dt)[:, 1:-1]
    if drift != 0.0:
        residual = residual - centered_x(P_prev.values, P_prev.grid.dx) * drift
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def convergence_monitor(reports: Sequence[ResidualReport], decay_window: int, factor: float = 10.0,
                        abs_tol: float = 1e-8, plateau_tol: float = PLATEAU_TOLERANCE) -> ConvergenceVerdict:
    """Classify the residual history.

    converged: the latest norms are all below ``abs_tol``.
    drifting-converged: e_corr fell by ``factor`` between reports[-2w] and
    reports[-1] while linf changed by less than ``plateau_tol`` relative.
    """
    if not reports:
        return ConvergenceVerdict.NOT_CONVERGED
    last = reports[-1]
    if max(last.l2, last.linf, last.e_corr) < abs_tol:
        return ConvergenceVerdict.CONVERGED
    if len(reports) < 2 * decay_window:
        return ConvergenceVerdict.NOT_CONVERGED

    first = reports[-2 * decay_window]
    decayed = last.e_corr * factor <= first.e_corr
    plateau = abs(last.linf - first.linf) < plateau_tol * max(first.linf, abs_tol)
    if decayed and plateau:
        return ConvergenceVerdict.DRIFTING_CONVERGED
    return ConvergenceVerdict.NOT_CONVERGED


class DiagnosticsObserver(SolverObserver):
    """Samples the marker and the residual norms while the solver runs"""

    def __init__(self, c: float, y0_row: int = 1, marker_stride: int = 10, diag_interval: float = 0.05,
                 drift_window: int = 50, decay_window: int = 20, decay_factor: float = 10.0,
                 converged_tol: float = 1e-8):
        self.c = c
        self.marker_stride = marker_stride
        self.diag_interval = diag_interval
        self.decay_window = decay_window
        self.decay_factor = decay_factor
        self.converged_tol = converged_tol
        self.drift = DriftEstimate(y0_row=y0_row, window=drift_window)
        self.reports: List[ResidualReport] = []
        self._next_diag = diag_interval

    @classmethod
    def from_experiment(cls, cfg) -> "DiagnosticsObserver":
        a = cfg.analysis
        return cls(c=cfg.physics.c, y0_row=a.y0_row, marker_stride=cfg.run.marker_stride,
                   diag_interval=cfg.run.diag_interval, drift_window=a.drift_window,
                   decay_window=a.decay_window, decay_factor=a.decay_factor, converged_tol=a.converged_tol)

    @property
    def verdict(self) -> ConvergenceVerdict:
        return self.reports[-1].verdict if self.reports else ConvergenceVerdict.NOT_CONVERGED

    def _marker(self, P: PressureField) -> float:
        return P.at(P.grid.n_x, self.drift.y0_row)

    def on_start(self, P: PressureField, cfg: SolverConfig) -> None:
        self.drift.add_sample(0.0, self._marker(P))

    def on_step(self, P_prev: PressureField, P_next: PressureField, record: StepRecord) -> None:
        if record.n % self.marker_stride == 0:
            self.drift.add_sample(record.t, self._marker(P_next))
        if record.t < self._next_diag:
            return
        while self._next_diag <= record.t:
            self._next_diag += self.diag_interval
        self.reports.append(self.report(P_prev, P_next, record))

    def report(self, P_prev: PressureField, P_next: PressureField, record: StepRecord) -> ResidualReport:
        """Norms at one step, with the running verdict"""
        l2, linf = norms(residual_field(P_prev, P_next, record.dt), P_prev.grid)
        rate = self.drift.current_rate(self.c)
        if rate is not None:
            self.drift.rate_times.append(record.t)
            self.drift.drift_rates.append(rate)
        e_corr = corrected_residual(P_prev, P_next, record.dt, rate or 0.0)

        partial = ResidualReport(t=record.t, l2=l2, linf=linf, e_corr=e_corr, drift_rate=rate or 0.0)
        verdict = convergence_monitor([*self.reports, partial], self.decay_window, self.decay_factor,
                                      self.converged_tol)
        logger.bind(t=record.t, l2=l2, linf=linf, e_corr=e_corr).debug(
            f"Diagnostics t={record.t:.4f} linf={linf:.3e} e_corr={e_corr:.3e} verdict={verdict.value}"
        )
        return ResidualReport(t=record.t, l2=l2, linf=linf, e_corr=e_corr, drift_rate=rate or 0.0,
                              verdict=verdict)
