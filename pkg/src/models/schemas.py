"""
Pydantic models for experiment configuration and run summaries
"""

from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.error_handler import AdmissibilityError


class FlowName(str, Enum):
    """Available shear flows"""
    ALPHA1 = "alpha1"
    ALPHA2 = "alpha2"
    ALPHA3 = "alpha3"
    ZERO = "zero"
    CUSTOM = "custom"


class ConvergenceVerdict(str, Enum):
    """Long-time behaviour of the residual series"""
    CONVERGED = "converged"
    DRIFTING_CONVERGED = "drifting-converged"
    NOT_CONVERGED = "not-converged"


class CornerVerdict(str, Enum):
    """Classification of a local maximum of the interface"""
    CORNER = "corner"
    SMOOTH = "smooth"
    INCONCLUSIVE = "inconclusive"


class SweepParameter(str, Enum):
    """Parameters a sweep may vary"""
    M = "m"
    C = "c"
    EPS_FLOOR = "eps_floor"


EPS_FLOOR_CELLS = 4.0


class GridConfig(BaseModel):
    """Truncated cylinder geometry"""
    model_config = ConfigDict(extra="forbid")

    x_max: float = Field(default=4.0, gt=0)
    n_x: int = Field(default=201, ge=3)
    n_y: int = Field(default=51, ge=4)

    @property
    def dx(self) -> float:
        return self.x_max / (self.n_x - 1)

    @property
    def dy(self) -> float:
        return 1.0 / (self.n_y - 1)


class PhysicsConfig(BaseModel):
    """Equation parameters"""
    model_config = ConfigDict(extra="forbid")

    m: float = Field(default=1.1, gt=0)
    c: float = Field(default=0.4, gt=0)
    flow: FlowName = FlowName.ALPHA2
    flow_file: Optional[str] = None
    tau: Optional[float] = None


class RunConfig(BaseModel):
    """Time integration and sampling"""
    model_config = ConfigDict(extra="forbid")

    t_max: float = Field(default=10.0, ge=0)
    cfl_safety: float = Field(default=1.0, gt=0, le=1.0)
    snapshot_times: List[float] = Field(default_factory=list)
    diag_interval: float = Field(default=0.05, gt=0)
    marker_stride: int = Field(default=10, ge=1)

    @field_validator("snapshot_times")
    @classmethod
    def validate_snapshot_times(cls, v: List[float]) -> List[float]:
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("snapshot_times must be sorted")
        if any(t < 0 for t in v):
            raise ValueError("snapshot_times must be nonnegative")
        return v


class AnalysisConfig(BaseModel):
    """Free-boundary and diagnostics parameters"""
    model_config = ConfigDict(extra="forbid")

    s: int = Field(default=5, ge=0)
    eps_max: float = Field(default=0.5, gt=0)
    eps_min: float = Field(default=0.01, gt=0)
    eps_count: int = Field(default=12, ge=2)
    eps_floor: Optional[float] = Field(default=None, gt=0)
    corner_kappa: float = Field(default=0.1, ge=0)
    corner_zero_tol: float = Field(default=0.02, ge=0)
    corner_window: int = Field(default=5, ge=1)
    corner_min_prominence: int = Field(default=2, ge=1)
    nondegeneracy_factor: float = Field(default=0.1, gt=0)
    h1_rungs: int = Field(default=8, ge=2)
    h2_max_exponent: float = Field(default=0.4, gt=0)
    y0_row: int = Field(default=1, ge=1)
    drift_window: int = Field(default=50, ge=2)
    decay_window: int = Field(default=20, ge=1)
    decay_factor: float = Field(default=10.0, gt=1)
    converged_tol: float = Field(default=1e-8, gt=0)

    @model_validator(mode="after")
    def validate_ladder(self) -> "AnalysisConfig":
        if self.eps_min >= self.eps_max:
            raise ValueError("eps_min must be smaller than eps_max")
        return self


class OutputConfig(BaseModel):
    """Artifact destination"""
    model_config = ConfigDict(extra="forbid")

    output_dir: Optional[str] = None
    prefix: str = "run"


class ExperimentConfig(BaseModel):
    """Complete description of one experiment"""
    model_config = ConfigDict(extra="forbid")

    preset: str = "paper-fig5-desk"
    grid: GridConfig = Field(default_factory=GridConfig)
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def validate_admissibility(self) -> "ExperimentConfig":
        # deferred: the flows package imports this module
        from ..flows.shear_flows import build_flow

        tau = self.tau
        if not 0.0 < tau < self.grid.x_max:
            raise AdmissibilityError(f"tau={tau} must lie in (0, x_max={self.grid.x_max})", key="tau")
        if self.analysis.y0_row > self.grid.n_y - 1:
            raise AdmissibilityError(f"y0_row={self.analysis.y0_row} exceeds the {self.grid.n_y - 1} stored rows",
                                     key="y0_row")
        if self.eps_floor < self.min_eps_floor * (1.0 - 1e-12):
            raise AdmissibilityError(f"eps_floor={self.eps_floor:g} is below 4*c*dx={self.min_eps_floor:g}",
                                     key="eps_floor")
        if self.eps_floor > self.analysis.eps_max:
            raise AdmissibilityError(f"eps_floor={self.eps_floor:g} leaves no levelset below "
                                     f"eps_max={self.analysis.eps_max:g}", key="eps_floor")

        c_star = build_flow(self.physics.flow, self.physics.flow_file).c_star
        if not self.physics.c > c_star:
            raise AdmissibilityError(f"c={self.physics.c:g} must exceed c_star={c_star:.6g} "
                                     f"of flow {self.physics.flow.value}", key="c")
        return self

    @property
    def tau(self) -> float:
        return self.physics.tau if self.physics.tau is not None else self.grid.x_max / 2.0

    @property
    def min_eps_floor(self) -> float:
        """Smallest admissible ladder floor, clear of the O(dx) boundary layer"""
        return EPS_FLOOR_CELLS * self.physics.c * self.grid.dx

    @property
    def eps_floor(self) -> float:
        return self.analysis.eps_floor if self.analysis.eps_floor is not None else self.min_eps_floor

    def eps_ladder(self) -> np.ndarray:
        """Geometric, decreasing ladder from eps_max to eps_min, cut at the floor"""
        from ..analysis.free_boundary import eps_ladder

        a = self.analysis
        return eps_ladder(self.physics.c, self.grid.dx, a.eps_max, a.eps_min, a.eps_count, self.eps_floor)

    def label(self) -> str:
        return f"{self.output.prefix}_{self.physics.flow.value}_m{self.physics.m:g}_c{self.physics.c:g}"


class LevelsetSummary(BaseModel):
    """Per-rung sup/min norms of the levelset report"""
    eps: float
    sup_eps_pxx: float
    sup_eps_pxy: float
    min_px: float
    missing_rows: int


class RunSummary(BaseModel):
    """Verdicts and artifacts of one experiment"""
    label: str
    exit_code: int = 0
    flow: str
    m: float
    c: float
    c_star: float
    t_final: float = 0.0
    steps: int = 0
    convergence: ConvergenceVerdict = ConvergenceVerdict.NOT_CONVERGED
    nondegenerate: Optional[bool] = None
    min_slope: Optional[float] = None
    h1_pass: Optional[bool] = None
    h2_pass: Optional[bool] = None
    corner_count: Optional[int] = None
    levelsets: List[LevelsetSummary] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    artifacts: Dict[str, str] = Field(default_factory=dict)
    error: Optional[str] = None

    def verdict_line(self) -> str:
        """One-line summary printed by the CLI"""
        def yn(flag: Optional[bool], yes: str, no: str) -> str:
            return "n/a" if flag is None else (yes if flag else no)

        return (f"{self.label}: convergence={self.convergence.value} "
                f"nondegeneracy={yn(self.nondegenerate, 'nondegenerate', 'degenerate')} "
                f"H1={yn(self.h1_pass, 'pass', 'fail')} H2={yn(self.h2_pass, 'pass', 'fail')} "
                f"corners={'n/a' if self.corner_count is None else self.corner_count}")
