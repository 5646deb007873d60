"""Exception hierarchy."""


class QCalcError(Exception):
    """Base class for all errors raised by fqsl."""


class ParameterError(QCalcError, ValueError):
    """Invalid parameter or violated precondition."""


class PoleError(QCalcError, ValueError):
    """Evaluation at a pole or a zero of a denominator product."""


class ConvergenceError(QCalcError, ArithmeticError):
    """A product, series or iteration failed to converge."""


class NonDecayingSummandError(ConvergenceError):
    """A Jackson-type sum whose summands do not decay geometrically."""


class MissingExtensionError(QCalcError):
    """A right-sided difference needs a value at a/q that was not supplied."""


class SingularDeltaError(QCalcError, ZeroDivisionError):
    """The boundary determinant Delta vanishes."""


class SpecError(QCalcError, ValueError):
    """Malformed or schema-violating input specification."""
