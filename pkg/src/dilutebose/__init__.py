"""Bogoliubov variational free energy of the dilute Bose gas.

Units are hbar = 2m = k_B = 1 throughout.
"""
from .errors import ConvergenceError, DomainError, QuadratureError, RegimeError
from .freegas import free_gas_constants

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "QuadratureError",
    "RegimeError",
    "free_gas_constants",
    "__version__",
]
