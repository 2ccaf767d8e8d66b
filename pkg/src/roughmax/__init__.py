"""Numerics for maximal operators with rough homogeneous kernels."""

from .asymptotics import (
    DistributionCurve,
    LimitEstimate,
    discrepancy_limit,
    hybrid_distribution,
    limiting_weak_type,
    sandwich_check,
)
from .czd import cz_decompose, cz_level, verify_cz
from .errors import RoughMaxError
from .grid_field import DyadicCube, GridFunction, make_grid
from .maximal_op import RadiusPolicy, domination_gap, eval_maximal, eval_maximal_at, maximal_field
from .sphere_kernel import Kernel, c_omega, l1_norm, llogl_norm, make_sphere_grid
from .zoo import parse_function, parse_kernel

__all__ = [
    "DistributionCurve", "LimitEstimate", "discrepancy_limit", "hybrid_distribution",
    "limiting_weak_type", "sandwich_check", "cz_decompose", "cz_level", "verify_cz",
    "RoughMaxError", "DyadicCube", "GridFunction", "make_grid", "RadiusPolicy",
    "domination_gap", "eval_maximal", "eval_maximal_at", "maximal_field", "Kernel",
    "c_omega", "l1_norm", "llogl_norm", "make_sphere_grid", "parse_function", "parse_kernel",
]
