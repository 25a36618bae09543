"""Exception types shared across the package.

Every error raised by the library derives from :class:`HttnError` so callers
(and the CLI) can distinguish library failures from programming mistakes.
Most subclasses also derive from ``ValueError`` because they signal invalid
inputs.
"""


class HttnError(Exception):
    """Base class for all library errors."""


class DimensionError(HttnError, ValueError):
    """Operator or state dimensions are incompatible."""


class ShapeError(HttnError, ValueError):
    """An index width, register size, or label length does not fit."""


class NonHermitianError(HttnError, ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class ValidationError(HttnError, ValueError):
    """A tensor, channel, or config violates its structural invariants."""


class TopologyError(HttnError, ValueError):
    """Tree wiring does not form a valid partition of parent qubits."""


class DegenerateNormalizationError(HttnError, ArithmeticError):
    """The normalization denominator vanished (no meaningful expectation)."""


class UnsupportedConstructionError(HttnError, ValueError):
    """The requested construction is not defined for this tensor type."""


class UnderflowError(HttnError, ArithmeticError):
    """A rescaling factor is too small to divide by."""
