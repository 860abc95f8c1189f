"""Exception hierarchy shared by all idelek modules."""


class IdelekError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(IdelekError, ValueError):
    pass


class IndexDivisorError(IdelekError):
    """The prime divides [O_F : Z[theta]] and no override was supplied."""


class UnsupportedField(IdelekError):
    pass


class UnsupportedComponent(IdelekError):
    pass


class NotAUnit(IdelekError, ValueError):
    pass


class NotRamified(IdelekError, ValueError):
    pass


class CriteriaDisagree(IdelekError):
    """Containment and reduced-norm unit criteria gave different answers."""


class InvalidIdele(IdelekError, ValueError):
    pass


class NonInvertibleComponent(InvalidIdele):
    pass


class NotLocallyFree(IdelekError):
    pass


class PrecisionExhausted(IdelekError):
    pass


class NoLambdaFound(IdelekError):
    pass


class NotInvertible(IdelekError, ValueError):
    pass


class MiddleMismatch(IdelekError, ValueError):
    pass


class ZeroElement(IdelekError, ValueError):
    pass


class NotInKernel(IdelekError, ValueError):
    pass


class ValidationError(IdelekError, ValueError):
    """Malformed input description (JSON or constructor arguments)."""
