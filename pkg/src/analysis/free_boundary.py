"""
Free-boundary detection, levelset descent and corner classification

The interface x = I(y) is located per row at the curvature spike of P; its
one-sided slope is read a few cells into the hot region. Levelsets
{P = eps} on a decreasing ladder give the limits f(y) and the forcing
g(y) = (c + alpha(y)) / f(y) - 1 of the interface Hamilton-Jacobi equation
|I'(y)|^2 = g(y), whose nonvanishing near a maximum of I forces a corner.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import signal, stats

from ..flows.shear_flows import FlowProfile
from ..grid.grid_core import GridSpec, PressureField, second_xx
from ..models.schemas import EPS_FLOOR_CELLS, AnalysisConfig, CornerVerdict
from ..utils.error_handler import DegenerateSlopeError, EmptyLadderError, StencilRangeError
from ..utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_OFFSET = 5
EPS_MAX = 0.5
EPS_MIN = 0.01
EPS_COUNT = 12
H1_ATOL = 1e-8


@dataclass(frozen=True)
class InterfaceTrace:
    """Per-row interface column I(j) (1-based), its x and the hot-side slope"""
    fb_index: np.ndarray
    fb_x: np.ndarray
    slope_gamma_plus: np.ndarray
    s: int
    y: np.ndarray

    @property
    def min_slope(self) -> float:
        return float(np.nanmin(self.slope_gamma_plus)) if np.isfinite(self.slope_gamma_plus).any() else float("nan")

    def nondegenerate(self, threshold: float) -> bool:
        """Every row has a finite slope of at least ``threshold``"""
        slopes = self.slope_gamma_plus
        return bool(np.isfinite(slopes).all() and (slopes >= threshold).all())


@dataclass(frozen=True)
class LevelsetTrace:
    """I_eps(j) = min{i : P(i, j) >= eps}; index 0 and x = nan mark missing rows"""
    eps: float
    index: np.ndarray
    x: np.ndarray
    missing: np.ndarray

    @property
    def missing_count(self) -> int:
        return int(self.missing.sum())


@dataclass(frozen=True)
class LevelsetDerivatives:
    """Centered px, pxx and cross pxy at a levelset; nan where flagged"""
    px: np.ndarray
    pxx: np.ndarray
    pxy: np.ndarray
    flagged: np.ndarray


@dataclass
class LevelsetReport:
    """Levelset norms along the ladder and the H1/H2 verdicts"""
    eps_ladder: np.ndarray
    traces: List[LevelsetTrace]
    derivatives: List[LevelsetDerivatives]
    sup_eps_pxx: np.ndarray
    sup_eps_pxy: np.ndarray
    min_px: np.ndarray
    f: np.ndarray
    h1_pass: bool
    h2_pass: bool
    h2_exponent: float
    g: Optional[np.ndarray] = None


@dataclass(frozen=True)
class CornerCandidate:
    """One local maximum of I(y) and its classification"""
    j: int
    y: float
    fb_x: float
    prominence: int
    g_min: float
    verdict: CornerVerdict


@dataclass
class CornerReport:
    """Zeros of g and the classified maxima of the interface"""
    zeros_of_g: List[float]
    maxima: List[CornerCandidate]
    g_max: float
    zero_tol: float
    g_vanishes_everywhere: bool = False

    @property
    def corner_count(self) -> int:
        return sum(1 for m in self.maxima if m.verdict is CornerVerdict.CORNER)


@dataclass
class FreeBoundaryAnalysis:
    """Everything the analyses produce for one field"""
    trace: InterfaceTrace
    nondegenerate: bool
    levelsets: LevelsetReport
    g: Optional[np.ndarray] = None
    corners: Optional[CornerReport] = None
    hj_residual: Optional[float] = None
    warnings: List[str] = field(default_factory=list)


# Interface detection

def detect_interface(P: PressureField, s: int = DEFAULT_OFFSET) -> InterfaceTrace:
    """I(j) = argmax over interior columns of the second x-difference, ties to the smallest i"""
    grid = P.grid
    curvature = second_xx(P.values, grid.dx)
    fb_index = np.argmax(curvature, axis=1) + 2

    near = (fb_index - 1 < s + 2) | (grid.n_x - fb_index < s + 2)
    if near.any():
        logger.warning(f"Interface within {s + 2} cells of an x-boundary on {int(near.sum())} rows")

    slopes = np.full(grid.n_rows, np.nan)
    ok = fb_index + s + 1 <= grid.n_x
    if ok.any():
        slopes[ok] = _forward_slope(P, fb_index[ok], np.flatnonzero(ok), s)

    return InterfaceTrace(fb_index=fb_index, fb_x=(fb_index - 1) * grid.dx, slope_gamma_plus=slopes,
                          s=s, y=grid.y_nodes)


def _forward_slope(P: PressureField, fb_index: np.ndarray, rows: np.ndarray, s: int) -> np.ndarray:
    # 1-based column I+s+1 is 0-based I+s
    values = P.values
    return (values[rows, fb_index + s] - values[rows, fb_index + s - 1]) / P.grid.dx


def slope_at_interface(P: PressureField, trace: Union[InterfaceTrace, np.ndarray], s: int = DEFAULT_OFFSET) -> np.ndarray:
    """(P(I+s+1, j) - P(I+s, j)) / dx on every row"""
    fb_index = np.asarray(trace.fb_index if isinstance(trace, InterfaceTrace) else trace)
    if s < 0:
        raise ValueError(f"offset s must be nonnegative, got {s}")
    too_far = fb_index + s + 1 > P.grid.n_x
    if too_far.any():
        raise StencilRangeError(f"interface too close to x_max for offset s={s} on {int(too_far.sum())} rows")
    return _forward_slope(P, fb_index, np.arange(P.grid.n_rows), s)


# Levelsets

def eps_ladder(c: float, dx: float, eps_max: float = EPS_MAX, eps_min: float = EPS_MIN,
               count: int = EPS_COUNT, floor: Optional[float] = None) -> np.ndarray:
    """Geometric decreasing ladder cut at ``floor`` (default 4 c dx)"""
    floor = EPS_FLOOR_CELLS * c * dx if floor is None else floor
    ladder = np.geomspace(eps_max, eps_min, count)
    return ladder[ladder >= floor]


def levelset_trace(P: PressureField, eps: float) -> LevelsetTrace:
    """Smallest column reaching eps on each row"""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    reached = P.values >= eps
    missing = ~reached.any(axis=1)
    index = np.where(missing, 0, np.argmax(reached, axis=1) + 1)
    x = np.where(missing, np.nan, (index - 1) * P.grid.dx)
    if missing.any():
        logger.debug(f"Levelset eps={eps:g} missing on {int(missing.sum())} rows")
    return LevelsetTrace(eps=float(eps), index=index, x=x, missing=missing)


def levelset_derivatives(P: PressureField, levelset: LevelsetTrace) -> LevelsetDerivatives:
    """Stencils at (I_eps(j), j); rows with a missing or boundary-adjacent levelset are flagged"""
    grid = P.grid
    values = P.values
    index = levelset.index
    flagged = levelset.missing | (index < 2) | (index > grid.n_x - 1)

    px = np.full(grid.n_rows, np.nan)
    pxx = np.full(grid.n_rows, np.nan)
    pxy = np.full(grid.n_rows, np.nan)
    rows = np.flatnonzero(~flagged)
    if rows.size:
        col = index[rows] - 1
        north = (rows + 1) % grid.n_rows
        south = (rows - 1) % grid.n_rows
        east, west, centre = values[rows, col + 1], values[rows, col - 1], values[rows, col]
        px[rows] = (east - west) / (2.0 * grid.dx)
        pxx[rows] = (east + west - 2.0 * centre) / (grid.dx * grid.dx)
        cross_east = values[north, col + 1] - values[south, col + 1]
        cross_west = values[north, col - 1] - values[south, col - 1]
        pxy[rows] = (cross_east - cross_west) / (4.0 * grid.dx * grid.dy)

    if flagged.any() and not levelset.missing.all():
        logger.debug(f"Levelset eps={levelset.eps:g} flagged on {int(flagged.sum())} rows")
    return LevelsetDerivatives(px=px, pxx=pxx, pxy=pxy, flagged=flagged)


def _strictly_decreasing(values: np.ndarray, atol: float) -> bool:
    return all(b < a or (a <= atol and b <= atol) for a, b in zip(values, values[1:]))


def _h2_exponent(ladder: np.ndarray, min_px: np.ndarray) -> float:
    """log-log slope of min px against eps over the lower half of the ladder"""
    lower = max(2, (len(ladder) + 1) // 2)
    eps, px = ladder[-lower:], min_px[-lower:]
    if len(eps) < 2 or not (np.isfinite(px).all() and (px > 0).all()):
        return float("nan")
    return float(stats.linregress(np.log(eps), np.log(px)).slope)


def h1_h2_report(P: PressureField, ladder: Sequence[float], c: float, h1_rungs: int = 8,
                 nondegeneracy_factor: float = 0.1, h2_max_exponent: float = 0.4) -> LevelsetReport:
    """Norms along the ladder and the verdicts.

    H1: sup_y eps|pxx| and sup_y eps|pxy| strictly decrease over the upper
    ``h1_rungs`` rungs. H2: min_y px >= factor * c on every rung with no
    missing rows, and min_y px does not vanish like a power of eps.
    """
    ladder = np.asarray(ladder, dtype=np.float64)
    if ladder.size == 0:
        raise EmptyLadderError("empty eps ladder: every rung lies below the floor")
    if np.any(np.diff(ladder) >= 0):
        raise ValueError("eps ladder must be strictly decreasing")

    traces = [levelset_trace(P, eps) for eps in ladder]
    derivatives = [levelset_derivatives(P, trace) for trace in traces]

    def sup(values: np.ndarray, eps: float) -> float:
        finite = values[np.isfinite(values)]
        return float(eps * np.abs(finite).max()) if finite.size else float("nan")

    sup_pxx = np.array([sup(d.pxx, eps) for d, eps in zip(derivatives, ladder)])
    sup_pxy = np.array([sup(d.pxy, eps) for d, eps in zip(derivatives, ladder)])
    min_px = np.array([float(np.nanmin(d.px)) if np.isfinite(d.px).any() else float("nan") for d in derivatives])

    upper = slice(0, min(h1_rungs, len(ladder)))
    h1_pass = bool(len(ladder) >= 2
                   and np.isfinite(sup_pxx[upper]).all() and np.isfinite(sup_pxy[upper]).all()
                   and _strictly_decreasing(sup_pxx[upper], H1_ATOL)
                   and _strictly_decreasing(sup_pxy[upper], H1_ATOL))

    flagged_rows = sum(int(d.flagged.sum()) for d in derivatives)
    exponent = _h2_exponent(ladder, min_px)
    h2_pass = bool(flagged_rows == 0
                   and np.isfinite(min_px).all() and (min_px >= nondegeneracy_factor * c).all()
                   and np.isfinite(exponent) and exponent < h2_max_exponent)
    if flagged_rows:
        logger.warning(f"{flagged_rows} flagged levelset rows along the ladder; H2 cannot pass")

    logger.bind(h1=h1_pass, h2=h2_pass, exponent=exponent).info(
        f"Levelset ladder of {len(ladder)} rungs: H1={'pass' if h1_pass else 'fail'} "
        f"H2={'pass' if h2_pass else 'fail'} (exponent {exponent:.3f})"
    )
    return LevelsetReport(eps_ladder=ladder, traces=traces, derivatives=derivatives, sup_eps_pxx=sup_pxx,
                          sup_eps_pxy=sup_pxy, min_px=min_px, f=derivatives[-1].px.copy(),
                          h1_pass=h1_pass, h2_pass=h2_pass, h2_exponent=exponent)


# Hamilton-Jacobi forcing and corners

def hj_forcing(f: np.ndarray, alpha_rows: np.ndarray, c: float) -> np.ndarray:
    """g = (c + alpha) / f - 1 row by row"""
    f = np.asarray(f, dtype=np.float64)
    bad = ~np.isfinite(f) | (f <= 0.0)
    if bad.any():
        raise DegenerateSlopeError(f"limiting slope f is nonpositive or undefined on {int(bad.sum())} rows")
    return (c + np.asarray(alpha_rows, dtype=np.float64)) / f - 1.0


def interface_maxima(fb_index: np.ndarray, min_prominence: int = 2):
    """Periodic local maxima of I with plateaus merged; returns (rows, prominences)"""
    fb_index = np.asarray(fb_index)
    n = len(fb_index)
    if n < 3 or np.all(fb_index == fb_index[0]):
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    tiled = np.tile(fb_index, 3)
    peaks, props = signal.find_peaks(tiled, prominence=min_prominence)
    keep = (peaks >= n) & (peaks < 2 * n)
    return peaks[keep] - n, props["prominences"][keep].astype(int)


def _window(k: int, width: int, n: int) -> np.ndarray:
    return np.arange(k - width, k + width + 1) % n


def zeros_of_g(g: np.ndarray, y: np.ndarray, tol: float) -> List[float]:
    """Centre y of every periodic run of rows with g <= tol"""
    low = np.asarray(g) <= tol
    n = len(low)
    if not low.any() or low.all():
        return []
    start = int(np.flatnonzero(~low)[0])
    rolled = np.roll(low, -start)
    dy = y[1] - y[0] if n > 1 else 1.0
    centres = []
    k = 0
    while k < n:
        if rolled[k]:
            run_start = k
            while k < n and rolled[k]:
                k += 1
            mid = start + 0.5 * (run_start + k - 1)
            centres.append(float(np.mod(mid * dy, 1.0)))
        else:
            k += 1
    return sorted(centres)


def classify_corners(trace: InterfaceTrace, g: np.ndarray, window: int = 5, kappa: float = 0.1,
                     zero_tol: float = 0.02, min_prominence: int = 2) -> CornerReport:
    """Label each maximum of I as corner, smooth or inconclusive from g around it"""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != trace.fb_index.shape:
        raise ValueError("trace and forcing must cover the same rows")
    n = len(g)
    g_max = float(g.max())
    tol = zero_tol * max(g_max, 0.0)

    maxima = []
    rows, prominences = interface_maxima(trace.fb_index, min_prominence)
    for k, prominence in zip(rows, prominences):
        g_min = float(g[_window(int(k), window, n)].min())
        if g_max > 0.0 and g_min > kappa * g_max:
            verdict = CornerVerdict.CORNER
        elif g_min <= tol:
            verdict = CornerVerdict.SMOOTH
        else:
            verdict = CornerVerdict.INCONCLUSIVE
        maxima.append(CornerCandidate(j=int(k) + 1, y=float(trace.y[k]), fb_x=float(trace.fb_x[k]),
                                      prominence=int(prominence), g_min=g_min, verdict=verdict))

    report = CornerReport(zeros_of_g=zeros_of_g(g, trace.y, tol), maxima=maxima, g_max=g_max, zero_tol=tol,
                          g_vanishes_everywhere=bool((g <= tol).all()))
    logger.info(f"Corner classification: {len(maxima)} maxima, {report.corner_count} corners, "
                f"{len(report.zeros_of_g)} zeros of g")
    return report


def hj_consistency(trace: InterfaceTrace, g: np.ndarray, grid: GridSpec,
                   corners: Optional[CornerReport] = None, exclude: int = 5) -> float:
    """Row-average of |(centered I')^2 - g| away from corner rows"""
    fb_x = trace.fb_x
    slope = (np.roll(fb_x, -1) - np.roll(fb_x, 1)) / (2.0 * grid.dy)
    mismatch = np.abs(slope * slope - np.asarray(g))
    keep = np.ones(len(fb_x), dtype=bool)
    if corners is not None:
        for candidate in corners.maxima:
            if candidate.verdict is CornerVerdict.CORNER:
                keep[_window(candidate.j - 1, exclude, len(fb_x))] = False
    return float(mismatch[keep].mean()) if keep.any() else float("nan")


def analyze_free_boundary(P: PressureField, flow: FlowProfile, c: float, analysis: AnalysisConfig,
                          ladder: Sequence[float]) -> FreeBoundaryAnalysis:
    """Interface, levelset descent, forcing and corners for one field"""
    trace = detect_interface(P, analysis.s)
    nondegenerate = trace.nondegenerate(analysis.nondegeneracy_factor * c)
    levelsets = h1_h2_report(P, ladder, c, analysis.h1_rungs, analysis.nondegeneracy_factor,
                             analysis.h2_max_exponent)
    result = FreeBoundaryAnalysis(trace=trace, nondegenerate=nondegenerate, levelsets=levelsets)

    try:
        g = hj_forcing(levelsets.f, flow.on_rows(P.grid.y_nodes), c)
    except DegenerateSlopeError as e:
        logger.warning(f"Forcing term unavailable: {e}")
        result.warnings.append(str(e))
        return result

    levelsets.g = g
    result.g = g
    result.corners = classify_corners(trace, g, analysis.corner_window, analysis.corner_kappa,
                                      analysis.corner_zero_tol, analysis.corner_min_prominence)
    result.hj_residual = hj_consistency(trace, g, P.grid, result.corners, analysis.corner_window)
    if (g < -0.05).any():
        message = f"forcing term below -0.05 on {int((g < -0.05).sum())} rows (min {g.min():.3g})"
        logger.warning(message)
        result.warnings.append(message)
    return result
