"""
CSV, plain-text and JSON artifacts of a run
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..analysis.free_boundary import CornerReport, InterfaceTrace, LevelsetReport
from ..analysis.wave_diagnostics import DriftEstimate, ResidualReport
from ..models.schemas import RunSummary
from ..solver.pme_solver import StepRecord
from ..utils.logger import setup_logger

logger = setup_logger(__name__)


class ReportGenerator:
    """Writes every artifact of one experiment under ``output_dir`` with a common prefix"""

    def __init__(self, output_dir: Path, prefix: str):
        self.output_dir = Path(output_dir)
        self.prefix = prefix
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: Dict[str, str] = {}

    def _path(self, kind: str, suffix: str = "csv") -> Path:
        return self.output_dir / f"{self.prefix}_{kind}.{suffix}"

    def _write_frame(self, kind: str, frame: pd.DataFrame) -> Path:
        path = self._path(kind)
        frame.to_csv(path, index=False)
        self.artifacts[kind] = str(path)
        logger.debug(f"Wrote {kind} ({len(frame)} rows) to {path}")
        return path

    def write_step_log(self, records: Sequence[StepRecord]) -> Path:
        """n,t,dt,max_p,clamp_count"""
        frame = pd.DataFrame(
            [(r.n, r.t, r.dt, r.max_p, r.clamp_count) for r in records],
            columns=["n", "t", "dt", "max_p", "clamp_count"],
        )
        return self._write_frame("steps", frame)

    def write_diagnostics(self, reports: Sequence[ResidualReport]) -> Path:
        """t,l2,linf,drift_rate,e_corr,verdict"""
        frame = pd.DataFrame(
            [(r.t, r.l2, r.linf, r.drift_rate, r.e_corr, r.verdict.value) for r in reports],
            columns=["t", "l2", "linf", "drift_rate", "e_corr", "verdict"],
        )
        return self._write_frame("diagnostics", frame)

    def write_marker(self, drift: DriftEstimate) -> Path:
        """t,p_tilde"""
        return self._write_frame("marker", pd.DataFrame({"t": drift.times, "p_tilde": drift.p_tilde}))

    def write_shift(self, drift: DriftEstimate) -> Path:
        """t,drift_rate,shift with the shift integrated from the first estimate"""
        frame = pd.DataFrame({"t": drift.rate_times, "drift_rate": drift.drift_rates, "shift": drift.shift()})
        return self._write_frame("shift", frame)

    def write_interface(self, trace: InterfaceTrace) -> Path:
        """j,y,fb_x,slope_gamma_plus"""
        frame = pd.DataFrame({
            "j": np.arange(1, len(trace.fb_index) + 1),
            "y": trace.y,
            "fb_x": trace.fb_x,
            "slope_gamma_plus": trace.slope_gamma_plus,
        })
        return self._write_frame("interface", frame)

    def write_levelsets(self, report: LevelsetReport, y: np.ndarray) -> Path:
        """eps,j,y,X_eps,px,eps_pxx,eps_pxy for every rung and row"""
        blocks = []
        for eps, trace, deriv in zip(report.eps_ladder, report.traces, report.derivatives):
            blocks.append(pd.DataFrame({
                "eps": eps,
                "j": np.arange(1, len(y) + 1),
                "y": y,
                "X_eps": trace.x,
                "px": deriv.px,
                "eps_pxx": eps * np.abs(deriv.pxx),
                "eps_pxy": eps * np.abs(deriv.pxy),
            }))
        return self._write_frame("levelsets", pd.concat(blocks, ignore_index=True))

    def write_forcing(self, y: np.ndarray, f: np.ndarray, g: np.ndarray) -> Path:
        """j,y,f,g"""
        frame = pd.DataFrame({"j": np.arange(1, len(y) + 1), "y": y, "f": f, "g": g})
        return self._write_frame("forcing", frame)

    def write_corner_report(self, report: CornerReport, label: str, hj_residual: Optional[float] = None) -> Path:
        """Structured plain text: header, zeros of g, one line per maximum"""
        lines = [
            f"# corner report {label}",
            f"g_max = {report.g_max:.6g}",
            f"zero_tol = {report.zero_tol:.6g}",
            f"g_vanishes_everywhere = {str(report.g_vanishes_everywhere).lower()}",
            "zeros_of_g = " + (", ".join(f"{y:.6f}" for y in report.zeros_of_g) or "none"),
        ]
        if hj_residual is not None:
            lines.append(f"hj_consistency = {hj_residual:.6g}")
        lines.append(f"maxima = {len(report.maxima)}")
        lines.append(f"corners = {report.corner_count}")
        for m in report.maxima:
            lines.append(f"maximum j={m.j} y={m.y:.6f} fb_x={m.fb_x:.6f} prominence={m.prominence} "
                         f"g_min={m.g_min:.6g} verdict={m.verdict.value}")

        path = self._path("corners", "txt")
        path.write_text("\n".join(lines) + "\n")
        self.artifacts["corners"] = str(path)
        return path

    def write_sweep(self, rows: List[Dict[str, Any]]) -> Path:
        """One line per swept value"""
        return self._write_frame("sweep", pd.DataFrame(rows))

    def write_summary(self, summary: RunSummary) -> Path:
        """JSON verdict summary"""
        path = self._path("summary", "json")
        self.artifacts["summary"] = str(path)
        payload = self._serialize_for_json({
            **summary.model_dump(mode="json"),
            "artifacts": dict(self.artifacts),
            "generated_at": datetime.now(),
        })
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
        return path

    def _serialize_for_json(self, obj: Any) -> Any:
        """Serialize numpy and datetime values for JSON"""
        if isinstance(obj, dict):
            return {key: self._serialize_for_json(value) for key, value in obj.items()}
        elif isinstance(obj, (list, tuple)):
            return [self._serialize_for_json(item) for item in obj]
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return None if not np.isfinite(obj) else float(obj)
        elif isinstance(obj, float) and not np.isfinite(obj):
            return None
        elif isinstance(obj, np.ndarray):
            return self._serialize_for_json(obj.tolist())
        elif isinstance(obj, datetime):
            return obj.isoformat()
        return obj
