"""
Plain-text CSV snapshots of a pressure field
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from .grid_core import GridSpec, PressureField
from ..utils.error_handler import SnapshotFormatError

COLUMNS = ["i", "j", "x", "y", "p"]
_HEADER_KEYS = ("x_max", "n_x", "n_y", "m", "c", "alpha", "t")
_HEADER_PATTERN = re.compile(r"(\w+)=(\S+)")


@dataclass(frozen=True)
class SnapshotMeta:
    """Physics recorded in a snapshot header"""
    m: float
    c: float
    alpha: str
    t: float


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def snapshot_frame(field: PressureField) -> pd.DataFrame:
    """Rows i,j,x,y,p in lexicographic (i, j) order"""
    grid = field.grid
    ii, jj = np.meshgrid(np.arange(1, grid.n_x + 1), np.arange(1, grid.n_y), indexing="ij")
    return pd.DataFrame({
        "i": ii.ravel(),
        "j": jj.ravel(),
        "x": np.repeat(grid.x_nodes, grid.n_rows),
        "y": np.tile(grid.y_nodes, grid.n_x),
        "p": field.values.T.ravel(),
    })


def write_snapshot(path: Union[str, Path], field: PressureField, meta: SnapshotMeta) -> Path:
    """Write the field with its header line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    header = (f"# x_max={_fmt(grid.x_max)} n_x={grid.n_x} n_y={grid.n_y} "
              f"m={_fmt(meta.m)} c={_fmt(meta.c)} alpha={meta.alpha} t={_fmt(meta.t)}\n")
    with open(path, "w", newline="") as handle:
        handle.write(header)
        snapshot_frame(field).to_csv(handle, header=False, index=False, float_format="%.17g")
    return path


def parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise SnapshotFormatError("snapshot must start with a '#' header line")
    found = dict(_HEADER_PATTERN.findall(line))
    missing = [key for key in _HEADER_KEYS if key not in found]
    if missing:
        raise SnapshotFormatError(f"snapshot header lacks {', '.join(missing)}")
    return found


def read_snapshot(path: Union[str, Path]) -> Tuple[PressureField, SnapshotMeta]:
    """Read a snapshot written by :func:`write_snapshot`"""
    path = Path(path)
    with open(path, "r") as handle:
        header = parse_header(handle.readline().strip())

    try:
        grid = GridSpec(x_max=float(header["x_max"]), n_x=int(header["n_x"]), n_y=int(header["n_y"]))
        meta = SnapshotMeta(m=float(header["m"]), c=float(header["c"]),
                            alpha=header["alpha"], t=float(header["t"]))
    except ValueError as e:
        raise SnapshotFormatError(f"unreadable snapshot header: {e}") from e

    frame = pd.read_csv(path, skiprows=1, header=None, names=COLUMNS,
                        dtype={"i": np.int64, "j": np.int64}, float_precision="round_trip")
    expected = grid.n_x * grid.n_rows
    if len(frame) != expected:
        raise SnapshotFormatError(f"expected {expected} nodes, found {len(frame)}")
    if frame["i"].min() < 1 or frame["i"].max() > grid.n_x or frame["j"].min() < 1 or frame["j"].max() > grid.n_rows:
        raise SnapshotFormatError("node labels outside the grid declared in the header")

    values = np.full(grid.shape, np.nan)
    values[frame["j"].to_numpy() - 1, frame["i"].to_numpy() - 1] = frame["p"].to_numpy()
    if np.isnan(values).any():
        raise SnapshotFormatError("snapshot does not cover every node")
    return PressureField(grid, values, copy=False), meta
