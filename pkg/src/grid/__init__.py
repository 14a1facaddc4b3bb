"""
Mesh geometry, pressure storage, stencils and snapshot I/O
"""

from .grid_core import (
    GridSpec,
    PressureField,
    diff2_xx,
    diff2_xy,
    diff2_yy,
    diff_backward_x,
    diff_centered_x,
    diff_centered_y,
    wrap_row,
)
from .snapshots import SnapshotMeta, read_snapshot, write_snapshot

__all__ = [
    "GridSpec",
    "PressureField",
    "SnapshotMeta",
    "diff2_xx",
    "diff2_xy",
    "diff2_yy",
    "diff_backward_x",
    "diff_centered_x",
    "diff_centered_y",
    "read_snapshot",
    "wrap_row",
    "write_snapshot",
]
