"""
Shear flows alpha(y) and the critical wave speed
"""

from .shear_flows import (
    FlowProfile,
    build_flow,
    critical_speed,
    eval_flow,
    load_custom_flow,
    mean_zero_residual,
)

__all__ = [
    "FlowProfile",
    "build_flow",
    "critical_speed",
    "eval_flow",
    "load_custom_flow",
    "mean_zero_residual",
]
