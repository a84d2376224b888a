"""Multigrid solvers for block-Toeplitz saddle-point systems.

The library assembles Stokes-type saddle systems from matrix-valued
trigonometric symbols, transforms them with a triangular block change
of variables that makes the pressure block elliptic, and solves the
result with symbol-built grid transfers and damped Jacobi or coupled
patch smoothing.
"""

from .analysis import (check_projector, check_zero_structure,
                       coarse_degree_report, growth_ratios, growth_report)
from .experiments import experiment_start, run_table
from .multigrid import Hierarchy, SolveResult, solve, spectral_radius_power
from .smoothers import VankaHierarchy, VankaSmoother, vanka_solve
from .structured import CuttingMatrix, circulant, galerkin_triple, toeplitz
from .symbols import (PointwiseSymbol, SymbolSingularError, TrigPolynomial,
                      read_symbol, write_symbol)
from .system import StokesSystem, grid_size

__version__ = "0.1.0"

__all__ = [
    "CuttingMatrix", "Hierarchy", "PointwiseSymbol", "SolveResult",
    "StokesSystem", "SymbolSingularError", "TrigPolynomial",
    "VankaHierarchy", "VankaSmoother", "check_projector",
    "check_zero_structure", "circulant", "coarse_degree_report",
    "experiment_start", "galerkin_triple", "grid_size", "growth_ratios",
    "growth_report", "read_symbol", "run_table", "solve",
    "spectral_radius_power", "toeplitz", "vanka_solve", "write_symbol",
    "__version__",
]
