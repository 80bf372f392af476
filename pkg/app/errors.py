"""Exception hierarchy shared by the services and the CLI."""


class InvalidInput(ValueError):
    """Input violates a documented precondition or type invariant."""


class DegenerateInput(InvalidInput):
    """Input is well-formed but the requested quantity is undefined for it."""


class ResourceLimitExceeded(RuntimeError):
    """A matrix would exceed the configured MAX_DIM."""

    def __init__(self, requested: int, limit: int, what: str = "matrix dimension"):
        self.requested = requested
        self.limit = limit
        super().__init__(f"{what} {requested} exceeds resource limit {limit}")


class ConsistencyError(RuntimeError):
    """An internal cross-check between two computations failed."""
