"""Energy density of the critical planar Ising model via discrete fermionic spinors."""
from .contours import ALPHA, BETA_C, oracle_energy_plus, oracle_spinor, partition_functions
from .continuum import continuous_spinor, diagonal_difference, energy_target, frame_disk, hyperbolic_element
from .coupling import CouplingEvaluator, c0, c0_asymptotic, full_plane_spinor
from .lattice import (
    Disk,
    DiscreteDomain,
    Polygon,
    Rectangle,
    discretize,
    nearest_horizontal_midpoint,
    square_domain,
)
from .mc import MCParams, estimate_energy
from .spinor import difference_spinor, discrete_integral, energy_density, solve_spinor

__version__ = "0.1.0"

__all__ = [
    "ALPHA",
    "BETA_C",
    "CouplingEvaluator",
    "Disk",
    "DiscreteDomain",
    "MCParams",
    "Polygon",
    "Rectangle",
    "c0",
    "c0_asymptotic",
    "continuous_spinor",
    "diagonal_difference",
    "difference_spinor",
    "discrete_integral",
    "discretize",
    "energy_density",
    "energy_target",
    "estimate_energy",
    "frame_disk",
    "full_plane_spinor",
    "hyperbolic_element",
    "nearest_horizontal_midpoint",
    "oracle_energy_plus",
    "oracle_spinor",
    "partition_functions",
    "solve_spinor",
    "square_domain",
]
