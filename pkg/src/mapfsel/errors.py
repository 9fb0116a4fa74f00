"""Exception types shared across the package.

``DataError`` covers everything caused by bad input data (files, records,
coordinates); the CLI maps it to exit code 2. Anything else escaping a
command is treated as an internal invariant violation (exit code 3).
"""


class DataError(Exception):
    """Invalid input data: malformed files, bad records, impossible queries."""


class ParseError(DataError):
    """Malformed benchmark file. Carries 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(DataError):
    """Structurally valid data that violates a domain invariant."""


class NoPathError(DataError):
    """Requested a path between cells in different connected components."""
