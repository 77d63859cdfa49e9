"""Exception hierarchy shared by all modules."""


class CycleMixError(Exception):
    """Base class for library errors."""


class InvalidParameterError(CycleMixError, ValueError):
    pass


class DegenerateModelError(CycleMixError):
    """Model construction produced something unusable (e.g. odd endpoint set)."""


class WrongModelError(CycleMixError, ValueError):
    pass


class EmptyEdgeSetError(CycleMixError, ValueError):
    pass


class NoEndpointsError(CycleMixError):
    """Raised by arc analysis on a graph without long-range edges.

    The whole cycle is the single empty arc; it is attached as ``arc``.
    """

    def __init__(self, message, arc=None):
        super().__init__(message)
        self.arc = arc


class NotEquidistantError(CycleMixError, ValueError):
    pass


class NotDivisibleError(CycleMixError, ValueError):
    pass


class InfeasibleParamsError(CycleMixError, ValueError):
    pass


class PreconditionError(CycleMixError, ValueError):
    pass


class OverlappingSetsError(CycleMixError, ValueError):
    pass


class TooLargeError(CycleMixError):
    pass


class DisconnectedChainError(CycleMixError):
    pass


class NoEmptyArcError(CycleMixError):
    pass


class NotConvergedError(CycleMixError):
    pass


class DegeneratePointsError(CycleMixError, ValueError):
    pass


class EmptyInputError(CycleMixError, ValueError):
    pass


class ConfigError(CycleMixError, ValueError):
    pass
