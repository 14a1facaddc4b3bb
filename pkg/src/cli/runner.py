"""
Experiment orchestration: single runs, sweeps and snapshot re-analysis
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ..analysis.free_boundary import FreeBoundaryAnalysis, analyze_free_boundary, eps_ladder
from ..analysis.wave_diagnostics import DiagnosticsObserver
from ..flows.shear_flows import FlowProfile, build_flow, critical_speed
from ..grid.grid_core import GridSpec, PressureField
from ..grid.snapshots import read_snapshot
from ..models.schemas import ExperimentConfig, LevelsetSummary, RunSummary, SweepParameter
from ..reports.report_generator import ReportGenerator
from ..solver.pme_solver import SnapshotObserver, SolverConfig, SolverObserver, StepRecord, run
from ..utils.config import RuntimeSettings, get_settings
from ..utils.error_handler import EXIT_OK, ConfigError, PMEWaveError, exit_code_for
from ..utils.logger import LoggedOperation, log_run_summary, setup_logger
from .config_parser import with_override

logger = setup_logger(__name__)


class _LastState(SolverObserver):
    """Keeps the last field and step log so a failed run can still be flushed"""

    def __init__(self):
        self.field: Optional[PressureField] = None
        self.records: Sequence[StepRecord] = ()

    def on_finish(self, P: PressureField, records: Sequence[StepRecord]) -> None:
        self.field = P
        self.records = list(records)


@dataclass
class SweepResult:
    """Per-value verdict rows of a sweep"""
    parameter: SweepParameter
    rows: List[Dict[str, Any]] = field(default_factory=list)
    transition: Optional[Tuple[float, float]] = None
    table_path: Optional[Path] = None


class ExperimentRunner:
    """Runs experiments and writes their artifacts"""

    def __init__(self, settings: Optional[RuntimeSettings] = None, output_dir: Union[str, Path, None] = None):
        self.settings = settings or get_settings()
        self.output_override = Path(output_dir) if output_dir is not None else None

    def output_dir(self, cfg: ExperimentConfig) -> Path:
        if self.output_override is not None:
            return self.output_override
        return self.settings.ensure_output_dir(cfg.output.output_dir)

    def _summary(self, cfg: ExperimentConfig, flow: FlowProfile, label: str) -> RunSummary:
        return RunSummary(label=label, flow=flow.name.value, m=cfg.physics.m, c=cfg.physics.c,
                          c_star=critical_speed(flow))

    def _record_analysis(self, summary: RunSummary, analysis: FreeBoundaryAnalysis,
                         reports: ReportGenerator, y, label: str) -> None:
        levelsets = analysis.levelsets
        summary.nondegenerate = analysis.nondegenerate
        summary.min_slope = analysis.trace.min_slope
        summary.h1_pass = levelsets.h1_pass
        summary.h2_pass = levelsets.h2_pass
        summary.levelsets = [
            LevelsetSummary(eps=float(eps), sup_eps_pxx=float(pxx), sup_eps_pxy=float(pxy),
                            min_px=float(px), missing_rows=trace.missing_count)
            for eps, pxx, pxy, px, trace in zip(levelsets.eps_ladder, levelsets.sup_eps_pxx,
                                                levelsets.sup_eps_pxy, levelsets.min_px, levelsets.traces)
        ]
        summary.warnings.extend(analysis.warnings)

        reports.write_interface(analysis.trace)
        reports.write_levelsets(levelsets, y)
        if analysis.g is not None and analysis.corners is not None:
            summary.corner_count = analysis.corners.corner_count
            reports.write_forcing(y, levelsets.f, analysis.g)
            reports.write_corner_report(analysis.corners, label, analysis.hj_residual)

    def run_experiment(self, cfg: ExperimentConfig) -> RunSummary:
        """Solve, analyse the final field and write every artifact"""
        flow = build_flow(cfg.physics.flow, cfg.physics.flow_file)
        grid = GridSpec(x_max=cfg.grid.x_max, n_x=cfg.grid.n_x, n_y=cfg.grid.n_y)
        solver_cfg = SolverConfig.from_experiment(cfg)
        out_dir = self.output_dir(cfg)
        label = cfg.output.prefix
        reports = ReportGenerator(out_dir, label)
        summary = self._summary(cfg, flow, label)

        diagnostics = DiagnosticsObserver.from_experiment(cfg)
        snapshots = SnapshotObserver(out_dir, label, cfg.run.snapshot_times, cfg.physics.m, cfg.physics.c,
                                     flow.name.value)
        last = _LastState()

        with LoggedOperation("experiment", label=label, preset=cfg.preset) as operation:
            try:
                result = run(grid, solver_cfg, flow, [diagnostics, snapshots, last],
                             progress_fraction=self.settings.progress_fraction)
                summary.warnings.extend(result.warnings)
                summary.t_final, summary.steps = result.t, len(result.records)
                summary.convergence = diagnostics.verdict

                with LoggedOperation("free_boundary_analysis", label=label):
                    analysis = analyze_free_boundary(result.final, flow, cfg.physics.c, cfg.analysis,
                                                     cfg.eps_ladder())
                self._record_analysis(summary, analysis, reports, grid.y_nodes, label)
            except PMEWaveError as e:
                self._record_failure(summary, e, last)
                logger.error(f"Experiment {label} failed: {e}; flushing partial artifacts")
            except Exception as e:
                self._record_failure(summary, e, last)
                logger.exception(f"Experiment {label} failed unexpectedly; flushing partial artifacts")
                raise
            finally:
                reports.write_step_log(last.records)
                reports.write_diagnostics(diagnostics.reports)
                reports.write_marker(diagnostics.drift)
                reports.write_shift(diagnostics.drift)
                for path in snapshots.written:
                    reports.artifacts[path.stem] = str(path)
                reports.write_summary(summary)
                summary.artifacts = dict(reports.artifacts)

        log_run_summary(label, self._verdicts(summary), operation.duration)
        return summary

    @staticmethod
    def _record_failure(summary: RunSummary, error: Exception, last: Optional[_LastState] = None) -> None:
        summary.exit_code = exit_code_for(error)
        summary.error = str(error) if isinstance(error, PMEWaveError) else f"{type(error).__name__}: {error}"
        if last is not None and last.records:
            summary.t_final, summary.steps = last.records[-1].t, len(last.records)

    @staticmethod
    def _verdicts(summary: RunSummary) -> Dict[str, Any]:
        return {
            "convergence": summary.convergence.value,
            "nondegenerate": summary.nondegenerate,
            "h1": summary.h1_pass,
            "h2": summary.h2_pass,
            "corners": summary.corner_count,
            "exit_code": summary.exit_code,
        }

    def analyze(self, snapshot: Union[str, Path], cfg: ExperimentConfig) -> RunSummary:
        """Re-run the free-boundary analyses on a stored field"""
        P, meta = read_snapshot(snapshot)
        flow = build_flow(cfg.physics.flow, cfg.physics.flow_file)
        c = cfg.physics.c
        if meta.alpha != flow.name.value or meta.c != c or meta.m != cfg.physics.m:
            logger.warning(f"Snapshot physics (m={meta.m}, c={meta.c}, alpha={meta.alpha}) differ from "
                           f"the config (m={cfg.physics.m}, c={c}, alpha={flow.name.value})")

        a = cfg.analysis
        ladder = eps_ladder(c, P.grid.dx, a.eps_max, a.eps_min, a.eps_count, a.eps_floor)
        label = f"{cfg.output.prefix}_analysis"
        reports = ReportGenerator(self.output_dir(cfg), label)
        summary = self._summary(cfg, flow, label)
        summary.t_final = meta.t

        with LoggedOperation("snapshot_analysis", snapshot=str(snapshot)) as operation:
            try:
                analysis = analyze_free_boundary(P, flow, c, a, ladder)
                self._record_analysis(summary, analysis, reports, P.grid.y_nodes, label)
            except PMEWaveError as e:
                self._record_failure(summary, e)
                logger.error(f"Analysis of {snapshot} failed: {e}")
            except Exception as e:
                self._record_failure(summary, e)
                logger.exception(f"Analysis of {snapshot} failed unexpectedly")
                raise
            finally:
                reports.write_summary(summary)
                summary.artifacts = dict(reports.artifacts)

        log_run_summary(label, self._verdicts(summary), operation.duration)
        return summary

    def sweep(self, cfg: ExperimentConfig, parameter: Union[SweepParameter, str],
              values: Sequence[float]) -> SweepResult:
        """One experiment per value; inadmissible or failing values are recorded and skipped"""
        parameter = SweepParameter(parameter)
        result = SweepResult(parameter=parameter)
        base_prefix = cfg.output.prefix

        for value in values:
            row: Dict[str, Any] = {parameter.value: value}
            try:
                variant = with_override(cfg, parameter.value, value)
                variant = with_override(variant, "prefix", f"{base_prefix}_{parameter.value}{value:g}")
            except ConfigError as e:
                logger.warning(f"Sweep value {parameter.value}={value:g} rejected: {e}")
                row.update(status="rejected", exit_code=e.exit_code, error=str(e))
                result.rows.append(row)
                continue

            try:
                with LoggedOperation("sweep_value", parameter=parameter.value, value=value):
                    summary = self.run_experiment(variant)
            except Exception as e:
                logger.error(f"Sweep value {parameter.value}={value:g} failed: {type(e).__name__}: {e}")
                row.update(status="failed", exit_code=exit_code_for(e), error=f"{type(e).__name__}: {e}")
                result.rows.append(row)
                continue
            row.update(
                status="ok" if summary.exit_code == EXIT_OK else "failed",
                exit_code=summary.exit_code,
                convergence=summary.convergence.value,
                nondegenerate=summary.nondegenerate,
                h1=summary.h1_pass,
                h2=summary.h2_pass,
                corners=summary.corner_count,
                error=summary.error or "",
            )
            result.rows.append(row)

        if parameter is SweepParameter.M:
            result.transition = corner_transition(result.rows)
            if result.transition:
                logger.info(f"Corner transition bracketed in m ∈ [{result.transition[0]:g}, {result.transition[1]:g}]")

        reports = ReportGenerator(self.output_dir(cfg), f"{base_prefix}_{parameter.value}")
        result.table_path = reports.write_sweep(result.rows)
        return result


def corner_transition(rows: Sequence[Dict[str, Any]]) -> Optional[Tuple[float, float]]:
    """Adjacent m values (sorted) where runs switch from having corners to having none"""
    runs = sorted((row["m"], row.get("corners")) for row in rows
                  if row.get("status") == "ok" and row.get("corners") is not None)
    for (m_low, low), (m_high, high) in zip(runs, runs[1:]):
        if low >= 1 and high == 0:
            return m_low, m_high
    return None
