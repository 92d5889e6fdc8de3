"""Quantum walks on a line, clock and time-dependent circuit encodings, and
permutation-chain oracles, with the numerical checks that tie them together."""

from ._kernels import BACKEND
from .errors import CapacityError, ConsistencyError, DomainError, SlotError

__all__ = ["BACKEND", "CapacityError", "ConsistencyError", "DomainError", "SlotError"]
__version__ = "0.1.0"
