"""
Tests for residual norms, drift estimation and the convergence verdicts
"""

import numpy as np
import pytest

from src.analysis.wave_diagnostics import (
    DiagnosticsObserver,
    DriftEstimate,
    ResidualReport,
    convergence_monitor,
    corrected_residual,
    drift_rate,
    norms,
    quadrature_weights,
    residual_field,
)
from src.flows.shear_flows import build_flow
from src.grid.grid_core import GridSpec, PressureField
from src.models.schemas import ConvergenceVerdict
from src.solver.pme_solver import SolverConfig, run
from src.utils.error_handler import GridMismatchError, InsufficientSamplesError


def reports_from(e_corr, linf=0.5, l2=0.5):
    """Report series with the given e_corr values and flat uncorrected norms"""
    return [ResidualReport(t=0.1 * k, l2=l2, linf=linf, e_corr=e) for k, e in enumerate(e_corr)]


@pytest.mark.unit
class TestResidualNorms:
    """Time-derivative fields and their norms"""

    @pytest.fixture
    def grid(self):
        return GridSpec(x_max=1.0, n_x=11, n_y=11)

    def test_identical_fields_give_zero(self, grid):
        P = PressureField.from_function(grid, lambda x, y: x * x)
        assert np.all(residual_field(P, P, 0.01) == 0.0)

    def test_recovers_rate(self, grid):
        rng = np.random.default_rng(4)
        G = rng.standard_normal(grid.shape)
        P = PressureField(grid, rng.random(grid.shape))
        dt = 1e-3
        P_next = PressureField(grid, P.values + dt * G)
        assert np.allclose(residual_field(P, P_next, dt), G, rtol=1e-9, atol=1e-9)

    def test_grid_mismatch(self, grid):
        other = GridSpec(x_max=2.0, n_x=11, n_y=11)
        with pytest.raises(GridMismatchError):
            residual_field(PressureField.zeros(grid), PressureField.zeros(other), 0.1)

    def test_nonpositive_dt(self, grid):
        P = PressureField.zeros(grid)
        with pytest.raises(ValueError):
            residual_field(P, P, 0.0)

    def test_norms_of_zero(self, grid):
        assert norms(np.zeros(grid.shape), grid) == (0.0, 0.0)

    def test_norms_of_single_node(self, grid):
        residual = np.zeros(grid.shape)
        residual[3, 4] = 2.0
        l2, linf = norms(residual, grid)
        assert l2 == pytest.approx(0.2)
        assert linf == 2.0

    def test_norms_of_constant(self, grid):
        l2, linf = norms(np.ones(grid.shape), grid)
        assert l2 == pytest.approx(1.0)
        assert linf == 1.0

    def test_weights_measure_the_cylinder(self):
        grid = GridSpec(x_max=3.0, n_x=31, n_y=21)
        assert quadrature_weights(grid).sum() == pytest.approx(3.0)


@pytest.mark.unit
class TestDrift:
    """Marker regression and the drift-corrected residual"""

    def test_linear_marker(self):
        t = np.linspace(0.0, 2.0, 30)
        assert drift_rate(t, 1.5 + 0.3 * t, c=0.6, window=20) == pytest.approx(0.5)

    def test_constant_marker(self):
        t = np.linspace(0.0, 2.0, 30)
        assert drift_rate(t, np.full(30, 2.4), c=0.6, window=10) == 0.0

    def test_only_trailing_window_counts(self):
        t = np.arange(40, dtype=float)
        p = np.where(t < 20, 5.0 * t, 100.0 + 0.2 * (t - 20))
        assert drift_rate(t, p, c=1.0, window=20) == pytest.approx(0.2)

    @pytest.mark.parametrize("samples,window", [(5, 10), (10, 1)])
    def test_insufficient_samples(self, samples, window):
        t = np.arange(samples, dtype=float)
        with pytest.raises(InsufficientSamplesError):
            drift_rate(t, t, c=1.0, window=window)

    def test_estimate_waits_for_window(self):
        drift = DriftEstimate(y0_row=1, window=3)
        drift.add_sample(0.0, 1.0)
        drift.add_sample(0.1, 1.1)
        assert drift.current_rate(c=0.5) is None
        drift.add_sample(0.2, 1.2)
        assert drift.current_rate(c=0.5) == pytest.approx(2.0)

    def test_shift_integrates_rates(self):
        drift = DriftEstimate(y0_row=1, window=2, rate_times=[0.0, 1.0, 2.0, 3.0], drift_rates=[0.5] * 4)
        assert np.allclose(drift.shift(), [0.0, 0.5, 1.0, 1.5])
        assert DriftEstimate(y0_row=1, window=2).shift().size == 0

    def test_zero_drift_is_plain_interior_residual(self):
        grid = GridSpec(x_max=1.0, n_x=11, n_y=5)
        rng = np.random.default_rng(6)
        P = PressureField(grid, rng.random(grid.shape))
        Q = PressureField(grid, rng.random(grid.shape))
        expected = np.abs(residual_field(P, Q, 0.1)[:, 1:-1]).max()
        assert corrected_residual(P, Q, 0.1, 0.0) == expected

    def test_translating_profile(self):
        grid = GridSpec(x_max=2.0, n_x=201, n_y=9)
        v, dt = 0.3, 1e-6

        def profile(t):
            return PressureField.from_function(grid, lambda x, y: np.sin(x + v * t) + 0.1 * np.cos(2 * np.pi * y))

        P_prev, P_next = profile(1.0), profile(1.0 + dt)
        uncorrected = corrected_residual(P_prev, P_next, dt, 0.0)
        corrected = corrected_residual(P_prev, P_next, dt, v)
        assert uncorrected > 0.1
        assert corrected <= 1e-4


@pytest.mark.unit
class TestConvergenceMonitor:
    """Verdicts from a report series"""

    def test_drifting_convergence(self):
        reports = reports_from([1.0, 0.1, 0.01, 0.001])
        assert convergence_monitor(reports, decay_window=2) is ConvergenceVerdict.DRIFTING_CONVERGED

    def test_converged_below_tolerance(self):
        reports = reports_from([1e-10], linf=1e-10, l2=1e-10)
        assert convergence_monitor(reports, decay_window=5) is ConvergenceVerdict.CONVERGED

    def test_flat_corrected_error(self):
        reports = reports_from([0.5] * 10)
        assert convergence_monitor(reports, decay_window=3) is ConvergenceVerdict.NOT_CONVERGED

    def test_too_few_reports(self):
        reports = reports_from([1.0, 0.001])
        assert convergence_monitor(reports, decay_window=2) is ConvergenceVerdict.NOT_CONVERGED
        assert convergence_monitor([], decay_window=2) is ConvergenceVerdict.NOT_CONVERGED

    def test_moving_uncorrected_norm_is_not_a_plateau(self):
        reports = [ResidualReport(t=k, l2=1.0, linf=1.0 / (k + 1), e_corr=10.0 ** -k) for k in range(4)]
        assert convergence_monitor(reports, decay_window=2) is ConvergenceVerdict.NOT_CONVERGED


@pytest.mark.unit
class TestDiagnosticsObserver:
    """Sampling during a short run"""

    @pytest.fixture(scope="class")
    def observed(self):
        grid = GridSpec(x_max=2.0, n_x=41, n_y=11)
        flow = build_flow("alpha2")
        cfg = SolverConfig(m=0.5, c=0.4, tau=1.0, t_max=0.5)
        observer = DiagnosticsObserver(c=cfg.c, y0_row=3, marker_stride=5, diag_interval=0.05,
                                       drift_window=4, decay_window=3)
        result = run(grid, cfg, flow, [observer])
        return observer, result

    def test_marker_sampling(self, observed):
        observer, result = observed
        assert observer.drift.times[0] == 0.0
        assert len(observer.drift.p_tilde) == 1 + len(result.records) // 5
        assert observer.drift.p_tilde[0] == pytest.approx(0.4 * 1.0)

    def test_reports_at_intervals(self, observed):
        observer, result = observed
        times = [r.t for r in observer.reports]
        assert 9 <= len(times) <= 11
        assert times[0] >= 0.05
        assert all(b > a for a, b in zip(times, times[1:]))
        assert all(r.linf >= 0.0 and r.e_corr >= 0.0 for r in observer.reports)

    def test_drift_rates_follow_window(self, observed):
        observer, _ = observed
        assert observer.drift.drift_rates
        assert len(observer.drift.rate_times) == len(observer.drift.drift_rates)
        assert observer.verdict is observer.reports[-1].verdict

    def test_planar_marker_does_not_move(self):
        grid = GridSpec(x_max=2.0, n_x=41, n_y=11)
        cfg = SolverConfig(m=0.5, c=0.6, tau=1.0, t_max=0.3)
        observer = DiagnosticsObserver(c=cfg.c, marker_stride=2, diag_interval=0.05, drift_window=3)
        run(grid, cfg, build_flow("zero"), [observer])
        # the discrete profile relaxes within the truncation error
        tolerance = grid.dx ** 2
        assert np.allclose(observer.drift.p_tilde, observer.drift.p_tilde[0], rtol=0, atol=tolerance)
        assert observer.drift.drift_rates
        assert all(abs(rate) < tolerance for rate in observer.drift.drift_rates)


@pytest.mark.slow
class TestDriftingFrameAcceptance:
    """Desk-scale alpha2 run, m = 0.1, c = 0.4, t = 20"""

    @pytest.fixture(scope="class")
    def history(self):
        grid = GridSpec(x_max=8.0, n_x=401, n_y=51)
        cfg = SolverConfig(m=0.1, c=0.4, tau=6.0, t_max=20.0)
        observer = DiagnosticsObserver(c=cfg.c, diag_interval=0.05)
        run(grid, cfg, build_flow("alpha2"), [observer])
        return observer.reports

    @staticmethod
    def at(reports, t):
        return min(reports, key=lambda r: abs(r.t - t))

    def test_corrected_error_decays(self, history):
        samples = [self.at(history, float(t)).e_corr for t in range(2, 21)]
        assert all(b <= a * (1.0 + 1e-6) for a, b in zip(samples, samples[1:]))
        assert samples[-1] * 10.0 <= samples[0]

    def test_uncorrected_norm_plateaus(self, history):
        late = np.array([self.at(history, float(t)).linf for t in range(12, 21)])
        assert late.min() > 0.0
        assert late.max() <= 2.0 * late.min()
