"""Exception hierarchy shared by every module.

The CLI maps :class:`ValidationError` to exit code 2 and
:class:`CapacityError` to exit code 3.
"""


class AnnealkitError(Exception):
    """Base class for all package errors."""


class ValidationError(AnnealkitError, ValueError):
    """Input violates a documented precondition or invariant."""


class DimensionError(ValidationError):
    """Configuration length does not match the model size."""


class ParameterError(ValidationError):
    """A numeric parameter is outside its admissible range."""


class FormatError(ValidationError):
    """A file or wire payload could not be parsed."""


class CapacityError(AnnealkitError):
    """Problem size exceeds an enumeration or memory guard."""
