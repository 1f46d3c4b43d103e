"""Exception hierarchy shared by all gldual modules."""


class GLDualError(Exception):
    """Base class for every error raised by gldual."""


class GridMismatchError(GLDualError, ValueError):
    """A field does not live on the grid it was paired with."""


class IndefiniteOperatorError(GLDualError, ValueError):
    """An operator required to be positive definite is not."""


class ConvergenceError(GLDualError, RuntimeError):
    """An iterative method hit its iteration cap.

    ``residual`` holds the last residual norm and ``iterate`` the last
    iterate (when meaningful) so callers can restart from it.
    """

    def __init__(self, message, residual=None, iterate=None):
        super().__init__(message)
        self.residual = residual
        self.iterate = iterate


class DomainError(GLDualError, ValueError):
    """A dual variable lies outside the domain of a closed-form conjugate."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class HypothesisError(GLDualError, ValueError):
    """The hypotheses of a requested duality check do not hold."""


class FiniteDifferenceError(GLDualError, RuntimeError):
    """An inner solve failed at a finite-difference probe point."""

    def __init__(self, message, probe_index=None):
        super().__init__(message)
        self.probe_index = probe_index
