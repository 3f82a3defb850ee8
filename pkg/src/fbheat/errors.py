"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class ComputationError(ArithmeticError):
    """An iterative computation failed to reach its target accuracy."""


class QuadratureError(ComputationError):
    """Adaptive quadrature hit its subdivision limit.

    ``estimate`` and ``error`` carry the best value reached so far.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RefusalError(ValueError):
    """A kernel evaluation was refused because t is below the policy's floor."""
