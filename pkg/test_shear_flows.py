"""
Tests for the benchmark shear flows and the critical wave speed
"""

import numpy as np
import pytest

from src.flows.shear_flows import (
    FlowProfile,
    build_flow,
    critical_speed,
    eval_flow,
    load_custom_flow,
    mean_zero_residual,
)
from src.models.schemas import FlowName
from src.utils.error_handler import SnapshotFormatError


@pytest.fixture(scope="module")
def flows():
    return {name: build_flow(name) for name in (FlowName.ALPHA1, FlowName.ALPHA2, FlowName.ALPHA3, FlowName.ZERO)}


@pytest.mark.unit
class TestBuiltinFlows:
    """Evaluation, extrema and mean of the built-in profiles"""

    def test_eval_flow_values(self, flows):
        assert eval_flow(flows[FlowName.ALPHA1], 0.25) == pytest.approx(0.5)
        assert eval_flow(flows[FlowName.ALPHA2], 0.5) == pytest.approx(7.0 / 24.0)
        assert eval_flow(flows[FlowName.ALPHA3], 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_eval_flow_returns_arrays_for_arrays(self, flows):
        y = np.linspace(0.0, 0.9, 10)
        values = eval_flow(flows[FlowName.ALPHA1], y)
        assert values.shape == (10,)
        assert np.allclose(values, 0.5 * np.sin(2.0 * np.pi * y))

    def test_alpha2_is_periodic(self, flows):
        alpha2 = flows[FlowName.ALPHA2]
        assert eval_flow(alpha2, 1.2) == pytest.approx(eval_flow(alpha2, 0.2))

    def test_critical_speeds(self, flows):
        assert critical_speed(flows[FlowName.ALPHA1]) == pytest.approx(0.5, abs=1e-9)
        assert critical_speed(flows[FlowName.ALPHA2]) == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_alpha3_critical_speed_from_minimization(self, flows):
        alpha3 = flows[FlowName.ALPHA3]
        assert 0.80 < critical_speed(alpha3) < 0.82
        dense = eval_flow(alpha3, np.linspace(0.0, 1.0, 100_001))
        assert alpha3.alpha_min <= dense.min() + 1e-12
        assert eval_flow(alpha3, alpha3.argmin) == pytest.approx(alpha3.alpha_min, abs=1e-12)

    def test_alpha_sup(self, flows):
        assert flows[FlowName.ALPHA1].alpha_sup == pytest.approx(0.5, abs=1e-9)
        assert flows[FlowName.ALPHA2].alpha_sup == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert flows[FlowName.ZERO].alpha_sup == 0.0

    @pytest.mark.parametrize("name,tol", [
        (FlowName.ALPHA1, 1e-12),
        (FlowName.ALPHA2, 1e-10),
        (FlowName.ALPHA3, 1e-12),
        (FlowName.ZERO, 0.0),
    ])
    def test_mean_zero(self, flows, name, tol):
        assert mean_zero_residual(flows[name]) <= tol

    def test_zero_flow_has_no_positive_critical_speed(self, flows):
        assert critical_speed(flows[FlowName.ZERO]) == 0.0

    def test_on_rows_matches_evaluator(self, flows):
        y = np.arange(50) * 0.02
        alpha2 = flows[FlowName.ALPHA2]
        assert np.array_equal(alpha2.on_rows(y), alpha2(y))

    def test_build_flow_accepts_strings(self):
        assert build_flow("alpha1").name is FlowName.ALPHA1


@pytest.mark.unit
class TestCustomFlows:
    """Tabulated profiles read from files"""

    def test_samples_are_centered(self):
        y = np.arange(100) / 100.0
        flow = FlowProfile.from_samples(y, np.sin(2.0 * np.pi * y) + 0.3)
        assert flow.name is FlowName.CUSTOM
        assert mean_zero_residual(flow) < 1e-8
        assert critical_speed(flow) == pytest.approx(1.0, abs=1e-6)

    def test_unsorted_samples_rejected(self):
        with pytest.raises(SnapshotFormatError):
            FlowProfile.from_samples(np.array([0.0, 0.5, 0.4]), np.zeros(3))

    def test_samples_outside_period_rejected(self):
        with pytest.raises(SnapshotFormatError):
            FlowProfile.from_samples(np.array([0.0, 0.5, 1.0]), np.zeros(3))

    def test_load_from_file_with_header_and_comments(self, tmp_path):
        path = tmp_path / "flow.csv"
        lines = ["# sampled alpha", "y,alpha"]
        lines += [f"{k / 20},{0.5 * np.sin(2.0 * np.pi * k / 20):.17g}" for k in range(20)]
        path.write_text("\n".join(lines) + "\n")
        flow = load_custom_flow(path)
        assert critical_speed(flow) == pytest.approx(0.5, abs=1e-6)

    def test_build_custom_requires_file(self):
        with pytest.raises(SnapshotFormatError):
            build_flow(FlowName.CUSTOM)

    def test_three_column_file_rejected(self, tmp_path):
        path = tmp_path / "flow.csv"
        path.write_text("0,0,0\n0.5,1,1\n")
        with pytest.raises(SnapshotFormatError):
            load_custom_flow(path)
