"""Exception hierarchy shared by all modules."""


class WPAError(Exception):
    """Base class for library errors."""


class ConfigurationError(WPAError, ValueError):
    """Invalid family, domain or run configuration."""


class DomainError(WPAError, ValueError):
    """An argument lies outside the set where an operation is defined."""


class DegeneracyError(WPAError, ArithmeticError):
    """A map derivative vanishes or blows up where it must be finite and nonzero."""


class ConditioningError(WPAError, ArithmeticError):
    """A least-squares design system is rank deficient."""


class PrecisionError(WPAError, OverflowError):
    """A floating-point quantity leaves the representable exponent range."""


class InfeasibleError(WPAError, ValueError):
    """No admissible parameter exists for the requested construction."""


class ScaleError(WPAError, RuntimeError):
    """An iteration cap was reached before the requested bounds held."""

    def __init__(self, message, shortfall=None):
        super().__init__(message)
        self.shortfall = shortfall


class UnsupportedError(WPAError, NotImplementedError):
    """The requested method is not available for this family."""
