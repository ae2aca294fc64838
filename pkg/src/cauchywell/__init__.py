"""Bound states of the Cauchy operator ``sqrt(-Laplacian) + V`` in finite wells."""
from .evolution import EigenResult, SolverParams, solve_multilevel, solve_sector, solve_state
from .grid import RadialGrid, WellPotential, make_grid
from .operators import Sector, SectorState, sector_inner, sector_norm
from .renorm import TailRoute, renormalize, tail_correction
from .spectrum import (
    ThresholdReport,
    Verdict,
    exists_bound_state,
    probability_ratio,
    scan_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "EigenResult", "RadialGrid", "Sector", "SectorState", "SolverParams",
    "TailRoute", "ThresholdReport", "Verdict", "WellPotential",
    "exists_bound_state", "make_grid", "probability_ratio", "renormalize",
    "scan_threshold", "sector_inner", "sector_norm", "solve_multilevel",
    "solve_sector", "solve_state", "tail_correction",
]
