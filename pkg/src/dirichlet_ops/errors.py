"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An input violates the documented precondition of an operation."""


class NotFoundError(RuntimeError):
    """A search finished without a certified answer."""


class BudgetExhausted(NotFoundError):
    """A search stopped because its time or iteration budget ran out."""


class FlowError(RuntimeError):
    """ODE integration failed; ``trajectory`` holds the partial ``(times, values)``."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NewtonError(RuntimeError):
    """Newton iteration on a Koenigs function did not converge."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
