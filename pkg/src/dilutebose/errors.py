"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed; carries whatever estimate was reached."""

    def __init__(self, message, value=float("nan"), error_estimate=float("inf"),
                 evaluations=0, abscissa=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations
        self.abscissa = abscissa


class RegimeError(ValueError):
    """The requested formula is not valid for the given physical point."""


class ConvergenceError(ArithmeticError):
    """A root finder or minimizer could not produce a trustworthy answer."""
