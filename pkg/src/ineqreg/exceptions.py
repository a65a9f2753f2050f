"""Exception and warning classes raised across the package."""


class ValidationError(ValueError):
    """Input data or parameters violate a precondition."""


class TiesError(ValidationError):
    """Tied responses were passed to a rank-based estimator."""


class ConvergenceWarning(UserWarning):
    """An iterative fit stopped before meeting its tolerance."""


class NumericalWarning(UserWarning):
    """A quantity was clamped or dropped to keep a computation finite."""
