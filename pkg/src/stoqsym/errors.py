"""Exception types shared across the package."""


class StoqsymError(Exception):
    """Base class for all package errors."""


class HamiltonianSyntaxError(StoqsymError):
    """Raised on malformed input text; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class GadgetStructureError(StoqsymError):
    """A term graph does not decode back to a Hamiltonian (dangling cluster,
    inconsistent colors, malformed adjacency)."""


class ConvergenceError(StoqsymError):
    """Power iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class InternalInconsistencyError(StoqsymError):
    """An exact invariant failed (non-integer class sizes, orbit/class size
    mismatch); indicates a bug, never bad user input."""


class CapExceededError(StoqsymError):
    """A configured size cap (dense dimension, export size) was exceeded."""
