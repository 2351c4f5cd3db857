"""Exception hierarchy shared across the package."""


class QntomoError(Exception):
    """Base class for all package errors."""


class InvalidTopologyError(QntomoError, ValueError):
    pass


class NoPredecessorError(QntomoError, KeyError):
    pass


class InvalidParameterError(QntomoError, ValueError):
    pass


class CapacityError(QntomoError, MemoryError):
    pass


class NotDiagonalError(QntomoError, ValueError):
    """A state expected to be diagonal in a basis carries off-diagonal mass."""


class UnsupportedModelError(QntomoError, ValueError):
    pass


class CircuitError(QntomoError, ValueError):
    pass


class WrongSchemeError(QntomoError, ValueError):
    pass


class EstimationError(QntomoError, ArithmeticError):
    """Base for estimator failures (CLI exit code 2)."""


class UninformativePairError(EstimationError):
    pass


class InconsistentStatisticsError(EstimationError):
    pass


class SingularParameterError(EstimationError):
    pass


class EstimationFailedError(EstimationError):
    pass


class UnsupportedSupportError(QntomoError, ValueError):
    """Zero eigenvalue with a nonvanishing gradient: Fisher information diverges."""


class ConfigError(QntomoError, ValueError):
    pass
