"""
Benchmark shear flows alpha(y), their extrema and the critical wave speed
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from ..models.schemas import FlowName
from ..utils.error_handler import SnapshotFormatError
from ..utils.logger import setup_logger

logger = setup_logger(__name__)

DENSE_SAMPLES = 10_000
EXTREMA_TOL = 1e-8
QUADRATURE_PANELS = 10_000

Evaluator = Callable[[np.ndarray], np.ndarray]


def _alpha1(y):
    return 0.5 * np.sin(2.0 * np.pi * np.asarray(y, dtype=np.float64))


def _alpha2(y):
    y = np.mod(np.asarray(y, dtype=np.float64), 1.0)
    return 10.0 * (y * y * (1.0 - y) ** 2 - 1.0 / 30.0)


def _alpha3(y):
    y = np.asarray(y, dtype=np.float64)
    return 0.25 * sum(np.sin(2.0 * k * np.pi * y) for k in range(1, 5))


def _zero(y):
    return np.zeros_like(np.asarray(y, dtype=np.float64))


_BUILTIN: dict = {
    FlowName.ALPHA1: _alpha1,
    FlowName.ALPHA2: _alpha2,
    FlowName.ALPHA3: _alpha3,
    FlowName.ZERO: _zero,
}


@dataclass(frozen=True)
class FlowProfile:
    """A mean-zero, period-1 shear flow and its precomputed extrema"""

    name: FlowName
    evaluator: Evaluator = field(repr=False)
    alpha_min: float
    alpha_max: float
    argmin: float

    @property
    def alpha_sup(self) -> float:
        return max(abs(self.alpha_min), abs(self.alpha_max))

    @property
    def c_star(self) -> float:
        return -self.alpha_min + 0.0

    def __call__(self, y) -> np.ndarray:
        return self.evaluator(y)

    def on_rows(self, y_nodes: np.ndarray) -> np.ndarray:
        """alpha at the stored rows; the solver and the diagnostics both use this"""
        return np.asarray(self.evaluator(y_nodes), dtype=np.float64)

    @classmethod
    def from_evaluator(cls, name: FlowName, evaluator: Evaluator) -> "FlowProfile":
        (alpha_min, argmin), (alpha_max, _) = locate_extrema(evaluator)
        return cls(name=name, evaluator=evaluator, alpha_min=alpha_min, alpha_max=alpha_max, argmin=argmin)

    @classmethod
    def from_samples(cls, y: np.ndarray, alpha: np.ndarray) -> "FlowProfile":
        """Tabulated flow with periodic linear interpolation; the mean is removed"""
        y = np.asarray(y, dtype=np.float64)
        alpha = np.asarray(alpha, dtype=np.float64)
        if y.ndim != 1 or y.shape != alpha.shape or len(y) < 2:
            raise SnapshotFormatError("custom flow needs matching y and alpha columns with at least 2 samples")
        if y[0] < 0.0 or y[-1] >= 1.0 or np.any(np.diff(y) <= 0.0):
            raise SnapshotFormatError("custom flow y must be strictly increasing in [0, 1)")

        def raw(t):
            return np.interp(np.mod(t, 1.0), y, alpha, period=1.0)

        mean = quadrature_mean(raw)

        def evaluator(t):
            return raw(t) - mean

        logger.debug(f"Custom flow with {len(y)} samples, removed mean {mean:.3e}")
        return cls.from_evaluator(FlowName.CUSTOM, evaluator)


def quadrature_mean(evaluator: Evaluator, panels: int = QUADRATURE_PANELS) -> float:
    """Composite Simpson integral of alpha over one period"""
    panels += panels % 2
    y = np.linspace(0.0, 1.0, panels + 1)
    return float(integrate.simpson(evaluator(y), x=y))


def _refine(evaluator: Evaluator, samples: np.ndarray, values: np.ndarray, k: int, sign: float) -> Tuple[float, float]:
    """Golden-section refinement of a sampled extremum; sign=+1 for minima"""
    h = samples[1] - samples[0]
    a, b, c = samples[k] - h, samples[k], samples[k] + h

    def objective(t):
        return sign * float(evaluator(np.array([t]))[0])

    fb = sign * values[k]
    if not (objective(a) > fb and objective(c) > fb):
        # flat neighbourhood: the sample is already extremal to tolerance
        return float(values[k]), float(np.mod(b, 1.0))
    result = optimize.minimize_scalar(objective, bracket=(a, b, c), method="golden", tol=EXTREMA_TOL)
    best = min((result.fun, result.x), (fb, b))
    return sign * best[0], float(np.mod(best[1], 1.0))


def locate_extrema(evaluator: Evaluator, samples: int = DENSE_SAMPLES) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """((min, argmin), (max, argmax)) by dense sampling plus local refinement"""
    y = np.arange(samples) / samples
    values = np.asarray(evaluator(y), dtype=np.float64)
    minimum = _refine(evaluator, y, values, int(np.argmin(values)), 1.0)
    maximum = _refine(evaluator, y, values, int(np.argmax(values)), -1.0)
    return minimum, maximum


def build_flow(name: Union[FlowName, str], flow_file: Union[str, Path, None] = None) -> FlowProfile:
    """Construct a built-in flow, or a custom one from its sample file"""
    name = FlowName(name)
    if name is FlowName.CUSTOM:
        if flow_file is None:
            raise SnapshotFormatError("custom flow requires a flow file")
        return load_custom_flow(flow_file)
    return FlowProfile.from_evaluator(name, _BUILTIN[name])


def load_custom_flow(path: Union[str, Path]) -> FlowProfile:
    """Read ``y,alpha`` lines; an optional header row and ``#`` comments are skipped"""
    frame = pd.read_csv(path, header=None, comment="#", skipinitialspace=True)
    if frame.shape[1] != 2:
        raise SnapshotFormatError(f"custom flow file {path} must have two columns y,alpha")
    frame = frame.apply(pd.to_numeric, errors="coerce").dropna()
    return FlowProfile.from_samples(frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1].to_numpy())


def eval_flow(profile: FlowProfile, y) -> np.ndarray:
    """alpha(y) for a scalar or array of y"""
    value = profile.evaluator(y)
    return float(value) if np.ndim(value) == 0 else value


def critical_speed(profile: FlowProfile) -> float:
    """c_star = -min alpha; admissible wave speeds satisfy c > c_star"""
    c_star = profile.c_star
    if c_star <= 0.0:
        logger.warning(f"Flow {profile.name.value} has min alpha >= 0: no positive critical speed")
    return c_star


def mean_zero_residual(profile: FlowProfile) -> float:
    """|integral of alpha over one period|"""
    return abs(quadrature_mean(profile.evaluator))
