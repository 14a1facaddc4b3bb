"""
Mesh geometry, discrete pressure storage and finite-difference stencils
on the truncated periodic cylinder [0, x_max] x T^1
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..utils.error_handler import ConfigError, GridMismatchError, StencilRangeError


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the truncated cylinder and its mesh increments.

    Node labels are 1-based as on the mesh: x_i = (i-1) dx for i in
    [1, n_x] and y_j = (j-1) dy for j in [1, n_y]. Rows j = 1 and j = n_y
    are the same circle point, so only n_y - 1 rows are stored.
    """

    x_max: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if not self.x_max > 0:
            raise ConfigError(f"x_max must be positive, got {self.x_max}", key="x_max")
        if self.n_x < 3:
            raise ConfigError(f"n_x must be at least 3, got {self.n_x}", key="n_x")
        if self.n_y < 4:
            raise ConfigError(f"n_y must be at least 4, got {self.n_y}", key="n_y")

    @classmethod
    def from_spacing(cls, x_max: float, dx: float, dy: float) -> "GridSpec":
        """Build the grid whose increments are closest to dx, dy"""
        if dx <= 0 or dy <= 0:
            raise ConfigError("mesh increments must be positive")
        return cls(x_max=float(x_max), n_x=int(round(x_max / dx)) + 1, n_y=int(round(1.0 / dy)) + 1)

    @property
    def dx(self) -> float:
        return self.x_max / (self.n_x - 1)

    @property
    def dy(self) -> float:
        return 1.0 / (self.n_y - 1)

    @property
    def n_rows(self) -> int:
        """Number of independent rows"""
        return self.n_y - 1

    @property
    def shape(self) -> tuple:
        """Storage shape: rows first, x contiguous"""
        return (self.n_rows, self.n_x)

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx

    @property
    def y_nodes(self) -> np.ndarray:
        """y of the unique rows j = 1 .. n_y - 1"""
        return np.arange(self.n_rows) * self.dy

    def x(self, i: int) -> float:
        return (i - 1) * self.dx

    def y(self, j: int) -> float:
        return (wrap_row(j, self) - 1) * self.dy


class PressureField:
    """One time slice of the discrete pressure P_{i,j}.

    ``values[j-1, i-1]`` holds P_{i,j}. The array is read-only; solver steps
    produce new fields.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray, copy: bool = True):
        array = np.array(values, dtype=np.float64, copy=True) if copy else np.asarray(values, dtype=np.float64)
        if array.shape != grid.shape:
            raise GridMismatchError(f"values of shape {array.shape} do not fit grid shape {grid.shape}")
        array.flags.writeable = False
        self.grid = grid
        self.values = array

    @classmethod
    def zeros(cls, grid: GridSpec) -> "PressureField":
        return cls(grid, np.zeros(grid.shape), copy=False)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "PressureField":
        """Sample ``func(x, y)`` on every stored node"""
        x, y = np.meshgrid(grid.x_nodes, grid.y_nodes)
        return cls(grid, np.broadcast_to(func(x, y), grid.shape), copy=True)

    @classmethod
    def from_rows(cls, grid: GridSpec, func: Callable[[np.ndarray, int], np.ndarray]) -> "PressureField":
        """Build a field row by row from ``func(x_nodes, j)`` with 1-based j"""
        rows = [np.asarray(func(grid.x_nodes, j), dtype=np.float64) for j in range(1, grid.n_y)]
        return cls(grid, np.vstack(rows), copy=False)

    def at(self, i: int, j: int) -> float:
        """P_{i,j} with 1-based labels; rows wrap periodically"""
        if not 1 <= i <= self.grid.n_x:
            raise StencilRangeError(f"column {i} outside [1, {self.grid.n_x}]")
        return float(self.values[wrap_row(j, self.grid) - 1, i - 1])

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def is_nonnegative(self) -> bool:
        return bool((self.values >= 0.0).all())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def with_seam(self) -> np.ndarray:
        """Values on all n_y rows, the seam row j = n_y repeating j = 1"""
        return np.vstack([self.values, self.values[:1]])

    def same_grid(self, other: "PressureField") -> bool:
        return self.grid == other.grid

    def __eq__(self, other) -> bool:
        if not isinstance(other, PressureField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"PressureField(n_x={self.grid.n_x}, n_y={self.grid.n_y}, max={self.max():.6g})"


def require_same_grid(a: PressureField, b: PressureField) -> None:
    if not a.same_grid(b):
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def wrap_row(j: int, grid: GridSpec) -> int:
    """Map any signed row label to [1, n_y - 1] modulo n_y - 1"""
    return (j - 1) % grid.n_rows + 1


def _check_column(i: int, grid: GridSpec, low: int, high: int, name: str) -> None:
    if not low <= i <= high:
        raise StencilRangeError(f"{name} needs column in [{low}, {high}], got {i}")


# Scalar stencils on 1-based node labels. They share expression order with
# the array kernels below so both give identical floating-point results.

def diff_backward_x(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 2, grid.n_x, "diff_backward_x")
    return (P.at(i, j) - P.at(i - 1, j)) / grid.dx


def diff_centered_x(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 2, grid.n_x - 1, "diff_centered_x")
    return (P.at(i + 1, j) - P.at(i - 1, j)) / (2.0 * grid.dx)


def diff_centered_y(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 1, grid.n_x, "diff_centered_y")
    return (P.at(i, j + 1) - P.at(i, j - 1)) / (2.0 * grid.dy)


def diff2_xx(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 2, grid.n_x - 1, "diff2_xx")
    return (P.at(i + 1, j) + P.at(i - 1, j) - 2.0 * P.at(i, j)) / (grid.dx * grid.dx)


def diff2_yy(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 1, grid.n_x, "diff2_yy")
    return (P.at(i, j + 1) + P.at(i, j - 1) - 2.0 * P.at(i, j)) / (grid.dy * grid.dy)


def diff2_xy(P: PressureField, i: int, j: int) -> float:
    grid = P.grid
    _check_column(i, grid, 2, grid.n_x - 1, "diff2_xy")
    east = P.at(i + 1, j + 1) - P.at(i + 1, j - 1)
    west = P.at(i - 1, j + 1) - P.at(i - 1, j - 1)
    return (east - west) / (4.0 * grid.dx * grid.dy)


# Array kernels on 0-based storage values[j, i]. x-stencils return the
# interior columns i = 2 .. n_x - 1 only.

def rows_shifted(values: np.ndarray, offset: int) -> np.ndarray:
    """values at row j + offset for every row, wrapping periodically"""
    return np.roll(values, -offset, axis=0)


def backward_x(values: np.ndarray, dx: float) -> np.ndarray:
    return (values[:, 1:-1] - values[:, :-2]) / dx


def centered_x(values: np.ndarray, dx: float) -> np.ndarray:
    return (values[:, 2:] - values[:, :-2]) / (2.0 * dx)


def centered_y(values: np.ndarray, dy: float) -> np.ndarray:
    return (rows_shifted(values, 1) - rows_shifted(values, -1)) / (2.0 * dy)


def second_xx(values: np.ndarray, dx: float) -> np.ndarray:
    return (values[:, 2:] + values[:, :-2] - 2.0 * values[:, 1:-1]) / (dx * dx)


def second_yy(values: np.ndarray, dy: float) -> np.ndarray:
    return (rows_shifted(values, 1) + rows_shifted(values, -1) - 2.0 * values) / (dy * dy)


def cross_xy(values: np.ndarray, dx: float, dy: float) -> np.ndarray:
    north = rows_shifted(values, 1)
    south = rows_shifted(values, -1)
    east = north[:, 2:] - south[:, 2:]
    west = north[:, :-2] - south[:, :-2]
    return (east - west) / (4.0 * dx * dy)


def interior_mask(grid: GridSpec, collar: Optional[np.ndarray] = None, width: int = 0) -> np.ndarray:
    """Boolean mask over storage excluding boundary columns and, optionally,
    ``width`` cells on each side of a per-row 1-based column ``collar``."""
    mask = np.zeros(grid.shape, dtype=bool)
    mask[:, 1:-1] = True
    if collar is not None:
        cols = np.arange(1, grid.n_x + 1)
        near = np.abs(cols[None, :] - np.asarray(collar)[:, None]) <= width
        mask &= ~near
    return mask
