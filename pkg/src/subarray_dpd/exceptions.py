"""Exception types raised by the package."""


class DpdError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DpdError, ValueError):
    """An invalid parameter combination or malformed configuration."""


class RankDeficientError(DpdError, ValueError):
    """A basis matrix does not have full column rank."""


class SingularScenarioError(DpdError, ZeroDivisionError):
    """A closed-form expression has a vanishing denominator."""


class DivergenceError(DpdError, RuntimeError):
    """Adaptive learning blew up."""


class PopulationError(DpdError, RuntimeError):
    """PA population rejection sampling did not converge."""
