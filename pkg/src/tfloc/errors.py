"""Exception hierarchy.

Input problems derive from :class:`InputError` (a ``ValueError``); numerical
failures derive from :class:`NumericalError`. The CLI maps the first family to
exit code 2 and the second to exit code 3.
"""


class TflocError(Exception):
    pass


class InputError(TflocError, ValueError):
    pass


class NumericalError(TflocError, ArithmeticError):
    pass


class ShapeExceedsGrid(InputError):
    pass


class EmptyRegion(InputError):
    pass


class MalformedHeader(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class TruncatedPayload(InputError):
    pass


class GridMismatch(InputError):
    pass


class MarginTooSmall(InputError):
    pass


class NonFiniteField(InputError):
    pass


class NegativeValue(InputError):
    pass


class KernelEvaluationError(InputError):
    pass


class ParameterConstraint(InputError):
    pass


class CellCapExceeded(InputError):
    pass


class InsufficientSignalSupport(InputError):
    pass


class QuadratureNonconvergence(NumericalError):
    pass


class EigensolveFailure(NumericalError):
    pass


class DegenerateFit(TflocError, ValueError):
    """Fewer than three usable points in a log-log fit."""
