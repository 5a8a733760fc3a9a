"""Exception hierarchy for dsrkit.

Every error raised on purpose by the toolkit derives from DsrError and from the
builtin exception type a caller would naturally catch, so ``except ValueError``
keeps working for code that does not know about this module.
"""


class DsrError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(DsrError, ValueError):
    """Array shapes do not match what the operation requires."""


class FormatError(DsrError, ValueError):
    """A binary payload has the wrong magic string or version."""


class CorruptionError(DsrError, ValueError):
    """A binary payload is truncated or has trailing garbage."""


class DegenerateDirectionError(DsrError, ValueError):
    """A candidate direction is (numerically) parallel to the reference."""


class DegeneratePlaneError(DsrError, ValueError):
    """A 2D probing plane could not be built around an input."""


class ConfigError(DsrError, ValueError):
    """A configuration value is missing, unknown or out of range."""


class StateError(DsrError, RuntimeError):
    """An operation was called before its inputs were prepared."""


class PreconditionError(DsrError, ValueError):
    """An input violates a documented precondition."""
