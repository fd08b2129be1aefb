"""Exception hierarchy.

Exit-code mapping used by the CLI: :class:`ValidationError` and its
subclasses map to exit code 1, :class:`InputIOError` to 2, and
:class:`InvariantViolation` (or any unexpected exception) to 3.
"""

from __future__ import annotations


class MinesiteError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MinesiteError, ValueError):
    """Invalid input data, parameters, or configuration."""


class ConfigError(ValidationError):
    """Invalid or inconsistent run configuration."""


class DataError(ValidationError):
    """A dataset is missing a value a computation requires."""


class GeoreferenceError(ValidationError):
    """Geo-referencing is missing, singular, or in an unsupported CRS."""


class CoRegistrationError(GeoreferenceError):
    """Two rasters that must share a grid do not align."""


class EmptyExtentError(ValidationError):
    """A clip polygon does not overlap the raster extent."""


class ParseError(ValidationError):
    """A text input file could not be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InputIOError(MinesiteError, OSError):
    """A file is unreadable or in an unsupported format."""


class InvariantViolation(MinesiteError, RuntimeError):
    """An internal consistency check failed; indicates a bug."""
