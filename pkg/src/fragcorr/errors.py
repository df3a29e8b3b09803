"""Exception hierarchy shared by the library and the command line."""


class FragcorrError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(FragcorrError, ValueError):
    """A physical parameter lies outside its allowed domain."""


class PreconditionError(FragcorrError, ValueError):
    """An operation was called on inputs that violate its preconditions."""


class RegimeError(PreconditionError):
    """The requested computation is not defined in this dynamical regime."""


class ShapeError(PreconditionError):
    """A grid state is too far from Gaussian to extract a width."""


class NumericalError(FragcorrError, RuntimeError):
    """A numerical propagation or contraction failed its own health checks."""


class ResolutionError(NumericalError):
    """Grid resolution or extent is insufficient for the requested accuracy."""


class DomainTooSmallError(ResolutionError):
    """Probability density reached the edge of the spatial grid."""


class ConfigError(FragcorrError, ValueError):
    """Invalid or inconsistent run configuration."""
