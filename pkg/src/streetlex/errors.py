"""Exception types shared across the package."""

from __future__ import annotations


class StreetlexError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(StreetlexError):
    """A byte stream did not conform to its declared file format."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        elif path is not None:
            prefix += " "
        super().__init__(prefix + message)


class ValidationError(StreetlexError):
    """In-memory values violate a documented invariant."""


class KappaUndefinedError(StreetlexError):
    """Expected agreement is 1, so chance-corrected agreement has no value."""
