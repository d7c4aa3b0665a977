"""Lie point-symmetry analysis and group-invariant solutions of the 1+1
dimensional relativistic heat-conducting fluid (Eckart and Israel-Stewart
closures)."""

from .fluid import FluidParams, FluidState, PDESystem, build_system
from .symmetry import Ansatz, VectorField, solve_determining, verify_symmetry
from .liealg import LieAlgebra, commutator, structure_constants
from .reduction import reduced_system, symbolic_check_reduction
from .odesolve import SolverConfig, Trajectory, integrate

__version__ = "0.1.0"

__all__ = [
    "Ansatz",
    "FluidParams",
    "FluidState",
    "LieAlgebra",
    "PDESystem",
    "SolverConfig",
    "Trajectory",
    "VectorField",
    "build_system",
    "commutator",
    "integrate",
    "reduced_system",
    "solve_determining",
    "structure_constants",
    "symbolic_check_reduction",
    "verify_symmetry",
]
