"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(ValueError):
    """A run or grid configuration is inconsistent."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    Attributes
    ----------
    best : float
        Best objective value found.
    gap : float
        Estimate of the remaining optimality gap.
    """

    def __init__(self, message, best, gap):
        super().__init__(message)
        self.best = best
        self.gap = gap
