"""Exception types shared across the package."""


class LcdLabError(Exception):
    """Base class for package-specific failures."""


class ConfigError(LcdLabError):
    """A config file or parameter set is structurally invalid."""


class BudgetError(LcdLabError):
    """A computation would exceed its declared size budget.

    ``estimate`` carries a rough census of the aborted enumeration when one
    is available.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ResolutionError(LcdLabError):
    """A scan grid is too coarse for the requested problem."""


class InfeasibleError(LcdLabError):
    """Rejection sampling or an iterative search gave up."""
