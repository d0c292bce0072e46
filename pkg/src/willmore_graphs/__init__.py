"""Anisotropic Willmore flow of graphs on structured grids."""

from ._backend import BACKEND
from .anisotropy import Isotropic, QuadraticForm, RegularizedAbs, SurfaceEnergy, wulff_boundary
from .config import RunConfig, parse_config
from .energy import EnergyMonitor, willmore_energy
from .grid import Direction, EdgeId, Grid, GridFunction
from .integrator import StepperConfig, integrate
from .spatial import Dirichlet, FlowProblem, NeumannHomogeneous, rhs

__all__ = [
    "BACKEND",
    "Direction",
    "Dirichlet",
    "EdgeId",
    "EnergyMonitor",
    "FlowProblem",
    "Grid",
    "GridFunction",
    "Isotropic",
    "NeumannHomogeneous",
    "QuadraticForm",
    "RegularizedAbs",
    "RunConfig",
    "StepperConfig",
    "SurfaceEnergy",
    "integrate",
    "parse_config",
    "rhs",
    "willmore_energy",
    "wulff_boundary",
]
