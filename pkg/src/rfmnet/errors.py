"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget before reaching tolerance.

    Carries the best iterate found so far in ``best`` and its residual in
    ``residual`` so callers can inspect or reuse it.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class StiffnessError(RuntimeError):
    """The adaptive integrator's step size underflowed the configured minimum.

    ``time`` is the integration time at which the step collapsed.
    """

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class NumericalConsistencyError(RuntimeError):
    """A cross-check between two numerically equivalent routes failed."""


class InsufficientStatisticsError(RuntimeError):
    """A measurement window produced no usable samples."""


class DegenerateChannelError(ValueError):
    """The interference-limited channel approximation is outside its validity
    region (nonpositive interference constant)."""
