"""Exception types raised by the public API."""


class CmiflowError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(CmiflowError):
    pass


class EmptyKeepSet(CmiflowError):
    pass


class NotHermitian(CmiflowError):
    pass


class NoConvergence(CmiflowError):
    pass


class NotDensityMatrix(CmiflowError):
    pass


class DuplicateLabel(CmiflowError):
    pass


class UnknownLabel(CmiflowError):
    pass


class LabelOverlap(CmiflowError):
    pass


class LayoutMismatch(CmiflowError):
    pass


class BadProbabilities(CmiflowError):
    pass


class IndexOutOfRange(CmiflowError):
    pass


class BadPovm(CmiflowError):
    pass


class NonUnitary(CmiflowError):
    pass


class RangeError(CmiflowError):
    pass
