"""Dyadic Morrey-space norms, bilinear fractional integrals and inequality checks on step functions."""
from .grid import GridFunction, indicator, power_law, zeros
from .lattice import Box, DyadicCube, LatticeError, cubes_at_level_intersecting, dilate3, relation, side_length
from .norms import MorreyExponents, average, lq_norm, maximal, morrey_norm, powered_average
from .operators import (
    MajorantTruncation,
    OperatorParams,
    averaged_majorant,
    dyadic_majorant_I,
    dyadic_majorant_J,
    f_jq,
    hedberg_optimal_L,
    hedberg_split,
    i_alpha,
    j_alpha,
    level_slice,
    powered_averaged_majorant,
    u_powered_cube_sum,
)
from .verifier import (
    InequalityReport,
    RegimeError,
    TheoremParams,
    check_averaging,
    check_boundedness,
    check_pointwise,
    check_u_powered_averaging,
    estimate_constant,
    solve_params,
)

__version__ = "0.1.0"

__all__ = [
    "GridFunction",
    "indicator",
    "power_law",
    "zeros",
    "Box",
    "DyadicCube",
    "LatticeError",
    "cubes_at_level_intersecting",
    "dilate3",
    "relation",
    "side_length",
    "MorreyExponents",
    "average",
    "lq_norm",
    "maximal",
    "morrey_norm",
    "powered_average",
    "MajorantTruncation",
    "OperatorParams",
    "averaged_majorant",
    "dyadic_majorant_I",
    "dyadic_majorant_J",
    "f_jq",
    "hedberg_optimal_L",
    "hedberg_split",
    "i_alpha",
    "j_alpha",
    "level_slice",
    "powered_averaged_majorant",
    "u_powered_cube_sum",
    "InequalityReport",
    "RegimeError",
    "TheoremParams",
    "check_averaging",
    "check_boundedness",
    "check_pointwise",
    "check_u_powered_averaging",
    "estimate_constant",
    "solve_params",
]
