"""Exception hierarchy shared by every module."""


class ChoquardError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ChoquardError):
    """Bad input: parameters, grids, symmetry specs, fields."""


class OutOfRange(ValidationError):
    def __init__(self, name, value=None, bound=""):
        self.name = name
        msg = f"parameter {name!r} out of range"
        if value is not None:
            msg += f": {value!r}"
        if bound:
            msg += f" (requires {bound})"
        super().__init__(msg)


class NonPositiveOmegaForPOmega(ValidationError):
    pass


class DimensionTooSmall(ValidationError):
    pass


class BudgetExceeded(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class SingularResolvent(ValidationError):
    pass


class ZeroField(ValidationError):
    pass


class PNotC2(ValidationError):
    pass


class IncompatibleSpec(ValidationError):
    pass


class RegimeUnsupported(ValidationError):
    def __init__(self, regime, message=""):
        self.regime = regime
        super().__init__(message or f"solver does not support regime {regime}")


class RegimeMismatch(ValidationError):
    pass


class NotConverged(ChoquardError):
    pass


class EigensolverStall(ChoquardError):
    pass


class WindowTooNoisy(ChoquardError):
    pass


class FormatError(ChoquardError):
    pass
