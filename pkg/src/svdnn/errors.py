"""Exception and warning types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class NumericalFailureError(RuntimeError):
    """Raised when an iterative routine cannot produce a trustworthy result.

    Attributes carry diagnostic context: ``residual`` for decomposition
    sweeps that did not converge, ``iteration`` for optimizer steps that
    produced NaN/Inf.
    """

    def __init__(self, message, residual=None, iteration=None):
        super().__init__(message)
        self.residual = residual
        self.iteration = iteration


class DegenerateFitWarning(UserWarning):
    """Signals that a regression produced an all-zero weight matrix."""
