"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range an operation accepts."""


class SlotError(DomainError):
    """A sparse-structure slot index does not exist for the queried row."""


class CapacityError(MemoryError):
    """A dense materialization would exceed the configured size cap."""


class ConsistencyError(RuntimeError):
    """An internal numerical invariant was violated."""
