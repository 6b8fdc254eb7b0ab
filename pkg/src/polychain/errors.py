"""Exception types shared across the package."""


class PolychainError(Exception):
    """Base class for every error raised by polychain."""


class ParameterRangeError(PolychainError, ValueError):
    pass


class DegenerateCircleError(PolychainError, ValueError):
    pass


class DomainError(PolychainError, ValueError):
    pass


class ConfigurationError(PolychainError, ValueError):
    pass


class EvaluationError(PolychainError, ArithmeticError):
    """A function returned a non-finite value at a sample point."""

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class BandLimitError(PolychainError, ValueError):
    pass


class PoleEvaluationError(PolychainError, ZeroDivisionError):
    pass


class ZeroFunctionError(PolychainError, ValueError):
    pass


class IndeterminateWindingError(PolychainError, ArithmeticError):
    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class ExtendibilityError(PolychainError):
    """Meromorphic extendibility failed at some circle of a chain."""

    def __init__(self, message, t=None, defect=None):
        super().__init__(message)
        self.t = t
        self.defect = defect


class ConditioningError(PolychainError, ArithmeticError):
    pass


class UnreliableQuadratureError(PolychainError, ArithmeticError):
    def __init__(self, message, excluded_fraction=None):
        super().__init__(message)
        self.excluded_fraction = excluded_fraction


class InconsistencyError(PolychainError, ValueError):
    pass


class RegistryError(PolychainError, KeyError):
    pass


class ExtrapolationWarning(UserWarning):
    pass
