"""
Wiretap workbench - soft covering, secrecy exponents and wiretap codes.

Exact finite-blocklength computations for the soft-covering lemma, its secrecy
exponents, the semantic-security capacities of the wiretap channels of type I
and II, and a simulator for random wiretap codes.
"""

__version__ = "0.1.0"

from .exceptions import (
    CapExceededError,
    ConvergenceError,
    InvariantViolationError,
    ValidationError,
    WorkbenchError,
)
from .probability_core import Alphabet, Channel, JointPmf, Pmf, make_pmf
from .secrecy_capacity import SecrecyCapacitySolver

__all__ = [
    "Alphabet",
    "Channel",
    "JointPmf",
    "Pmf",
    "make_pmf",
    "SecrecyCapacitySolver",
    "WorkbenchError",
    "ValidationError",
    "CapExceededError",
    "ConvergenceError",
    "InvariantViolationError",
]
