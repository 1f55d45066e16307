"""Discrete spectrum of an exciton bound to a charged impurity in one dimension.

The three-body operator with contact interactions is reduced to a 3x3 block
integral-operator pencil on the contact lines.  Its singular energies are the
bound states.
"""
from .asymptotics import QuarticFit, asymptotic_energy, beta, beta_limit0, fit_quartic
from .grid import QuadratureGrid, build_grid
from .kernels import CouplingTriple, DomainError, bottom_essential, threshold, two_body_energies
from .oracle import BoxDiscretization, oracle_convergence, oracle_ground_state
from .pencil import PencilMatrix, assemble, diagnostics
from .solver import (
    BoundStateResult,
    CriticalChargeResult,
    GridSpec,
    SolverError,
    bound_state_exists,
    count_bound_states,
    critical_charge,
    ground_state_energy,
    sweep_energy,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BoundStateResult",
    "BoxDiscretization",
    "CouplingTriple",
    "CriticalChargeResult",
    "DomainError",
    "GridSpec",
    "PencilMatrix",
    "QuadratureGrid",
    "QuarticFit",
    "SolverError",
    "assemble",
    "asymptotic_energy",
    "beta",
    "beta_limit0",
    "bottom_essential",
    "bound_state_exists",
    "build_grid",
    "count_bound_states",
    "critical_charge",
    "diagnostics",
    "fit_quartic",
    "ground_state_energy",
    "oracle_convergence",
    "oracle_ground_state",
    "sweep_energy",
    "threshold",
    "two_body_energies",
]
