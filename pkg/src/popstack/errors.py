class ResourceError(RuntimeError):
    """A computation could not get the memory (or time) it needed."""

    def __init__(self, message: str, N: int | None = None):
        super().__init__(message)
        self.N = N


class PreconditionError(ValueError):
    """Input violates an operation's precondition; the message says how to fix it."""


class ReconstructionError(ValueError):
    """Residue data cannot be combined (length or modulus mismatch)."""
