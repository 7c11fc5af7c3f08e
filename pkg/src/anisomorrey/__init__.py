"""Anisotropic maximal operators, Muckenhoupt weights and weighted Morrey norms on grids."""
from .estimators import AnisotropicMaximal, MorreyNorm, SharpMaximal, WeightedMaximal
from .expr import parse_expr, sample
from .families import BoxFamily, ScaleLadder
from .geometry import Anisotropy, Parallelepiped, box_quasi_norm, lebesgue_measure, rho_quasi_norm
from .grid import Box, GridFunction, SummedTable
from .gridio import read_grid, write_grid
from .norms import MorreyParams, lp_norm, morrey_norm, weak_lp_norm
from .operators import family_maximal, maximal, maximal_r, sharp_maximal, weighted_maximal
from .report import CheckReport
from .weights import (
    ConstantWeight,
    GridWeight,
    PowerAbsWeight,
    PowerRhoWeight,
    a1_characteristic,
    ap_characteristic,
    doubling_constants,
    parse_weight,
    power_ap_predicate,
    weight_measure,
)

__version__ = "0.1.0"
