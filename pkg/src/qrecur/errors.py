"""Exception types raised across the package."""


class QRecurError(Exception):
    """Base class for all package errors."""


class NotHermitian(QRecurError, ValueError):
    pass


class NegativeEigenvalue(QRecurError, ValueError):
    pass


class DimensionMismatch(QRecurError, ValueError):
    pass


class NotNormalized(QRecurError, ValueError):
    pass


class NotTracePreserving(QRecurError, ValueError):
    pass


class RateOutOfRange(QRecurError, ValueError):
    pass


class IndexOutOfRange(QRecurError, ValueError):
    pass


class ZeroHopping(QRecurError, ValueError):
    pass


class NotStochastic(QRecurError, ValueError):
    pass


class NonConvergent(QRecurError, RuntimeError):
    pass


class NonRecurrent(QRecurError, RuntimeError):
    pass


class UndefinedBand(QRecurError, ValueError):
    pass


class TheoremViolation(QRecurError, RuntimeError):
    """A Psi-unital instance whose return time is not its relevant dimension.

    This never happens in exact arithmetic, so it points at a numerical
    problem. The offending analysis and the size of the defect are attached.
    """

    def __init__(self, message, defect, analysis=None):
        super().__init__(message)
        self.defect = defect
        self.analysis = analysis
