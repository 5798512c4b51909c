"""Cumulant dynamics of the non-equilibrium spin-boson qubit and reference solvers."""

from .bath import BathParams, CorrelationExpansion, correlation_function
from .cumulant import CumulantOptions, SystemParams, evolve, steady_state
from .rates import RateTable, gamma, rate_table, xi
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "BathParams",
    "CorrelationExpansion",
    "CumulantOptions",
    "RateTable",
    "SystemParams",
    "Trajectory",
    "correlation_function",
    "evolve",
    "gamma",
    "rate_table",
    "steady_state",
    "xi",
]
