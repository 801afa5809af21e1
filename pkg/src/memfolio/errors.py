"""Exception types shared across the package."""


class MemfolioError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MemfolioError):
    """A model configuration file or CLI argument is invalid."""


class SingularVolatilityError(MemfolioError):
    """The volatility matrix is numerically singular at the queried time."""


class BlowUpError(MemfolioError):
    """A backward ODE solution left the admissible range (or went non-finite).

    For the Riccati equations this signals nonexistence of a bounded solution
    for the supplied exponent/memory parameters.
    """


class BranchViolationError(MemfolioError):
    """A solved Riccati grid violates the bound its existence branch guarantees."""


class AdmissibilityError(MemfolioError):
    """The utility exponent lies outside the admissible range for the request."""


class DiscriminantError(MemfolioError):
    """The steady-state quadratic has no real root (discriminant <= 0)."""


class DegenerateGapError(MemfolioError):
    """The linear fixed-point coefficient is not negative (no stable root)."""


class ConvergenceError(MemfolioError):
    """A one-dimensional maximization or root bracket failed to converge."""


class DegenerateLagError(MemfolioError):
    """A requested lag leaves fewer than two return observations."""


class EstimateOverflowError(MemfolioError):
    """A Monte Carlo estimate exceeds the floating-point exponent range."""


class FitConvergenceError(MemfolioError):
    """No least-squares start reached the gradient tolerance within the cap."""
