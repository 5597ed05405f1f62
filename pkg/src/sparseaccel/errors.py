"""Exception hierarchy shared by every module in the package."""


class SparseAccelError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SparseAccelError):
    """Inconsistent geometry: bad dimensions, strides that do not tile, mismatched shapes."""


class BoundsError(SparseAccelError, IndexError):
    """A coordinate (brick index, window position, lane) is out of range."""


class ValidationError(SparseAccelError, ValueError):
    """A parameter value is outside its legal domain (probabilities, thresholds, ranges)."""


class FormatError(SparseAccelError, ValueError):
    """An encoded store or serialized stream is malformed."""


class BadMagicError(FormatError):
    """A file does not start with the expected magic bytes."""


class VersionError(FormatError):
    """A file carries an unsupported format version."""


class TruncatedError(FormatError):
    """A file or bit stream ends before the declared payload is complete."""
