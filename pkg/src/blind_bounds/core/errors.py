"""Exception hierarchy for blind-bounds."""

from typing import Any, Dict, Optional


class BlindBoundsError(Exception):
    """Base exception for all blind-bounds errors."""

    def __init__(self, message: str, measured: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.measured: Dict[str, Any] = dict(measured or {})


class ValidationError(BlindBoundsError):
    """Input failed validation against an operation's preconditions."""
    pass


class InvalidDimensionError(ValidationError):
    """Alphabet size is not a positive integer."""
    pass


class DimensionMismatchError(ValidationError):
    """Two operands live on different alphabets."""
    pass


class ParameterRangeError(ValidationError):
    """A numeric parameter lies outside its admissible range."""
    pass


class InvalidInputError(ValidationError):
    """Input is structurally invalid for the requested operation."""
    pass


class UnsupportedInputError(ValidationError):
    """Input is valid in general but not supported by this operation."""
    pass


class DivergenceUndefinedError(ValidationError):
    """Relative entropy requested where supp(p) is not inside supp(q)."""
    pass


class ConstraintViolatedError(ValidationError):
    """A constraint required by the operation does not hold.

    The measured quantities are available in ``measured``.
    """
    pass


class InvariantViolationError(BlindBoundsError):
    """A proved inequality failed numerically."""
    pass


class ProtocolError(BlindBoundsError):
    """The bucketing protocol was driven outside its table."""
    pass
