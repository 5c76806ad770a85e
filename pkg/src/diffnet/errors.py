"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
InsufficientDensityError -> 3, NetFormatError and OSError -> 4.
"""


class DiffnetError(Exception):
    """Base class for all package errors."""


class ValidationError(DiffnetError):
    """Bad input: non-unitary matrix, dimension mismatch, out-of-range index."""


class FingerprintMismatchError(ValidationError):
    """A net was loaded against a gate set it was not built with."""


class InsufficientDensityError(DiffnetError):
    """A shrink step produced fewer points than the requested net density."""


class EmptyNetError(InsufficientDensityError):
    """A ball selection left no points; the sampling length must be raised."""


class NetFormatError(DiffnetError):
    """Corrupt, truncated or wrong-version net file."""
