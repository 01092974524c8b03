"""Exception and warning types shared across the package."""


class ShocknetError(Exception):
    """Base class for all package errors."""


class ParseError(ShocknetError, ValueError):
    pass


class SchemaError(ShocknetError, ValueError):
    pass


class MissingDataError(ShocknetError, ValueError):
    pass


class DomainError(ShocknetError, ValueError):
    """An input lies outside the domain where the operation is defined."""


class SingularityError(ShocknetError, ArithmeticError):
    pass


class GraphError(ShocknetError, ValueError):
    pass


class EstimationError(ShocknetError, RuntimeError):
    pass


class IdentificationError(ShocknetError, ValueError):
    """Raised when a graph does not supply enough zero restrictions.

    The offending :class:`~shocknet.planar.IdentificationReport` is kept on
    ``self.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(ShocknetError, ValueError):
    pass


class BoundaryWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass
