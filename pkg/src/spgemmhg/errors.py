"""Exception types shared across the package.

Everything deriving from :class:`Error` is a user-facing problem (bad file,
bad parameters, infeasible request) and maps to CLI exit code 2.  Anything
else escaping to the CLI is treated as an internal error (exit code 1).
"""


class Error(Exception):
    """Base class for user-facing errors."""


class ParseError(Error):
    """Malformed input text; the message names a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionError(Error):
    """Incompatible shapes, out-of-range indices, or empty rows/columns."""


class MaskError(Error):
    """Requested output subset is not contained in the computable output."""


class BalanceError(Error):
    """No partition can satisfy the requested load-balance tolerance."""


class GuardError(Error):
    """A brute-force size guard was exceeded."""


class ConfigError(Error):
    """Bad configuration value or parameter combination."""
