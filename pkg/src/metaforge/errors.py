"""Exception hierarchy shared by every stage."""

from __future__ import annotations


class MetaforgeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MetaforgeError, ValueError):
    """Input data violates a documented contract (bad class, bad box, unsorted...)."""


class ParseError(ValidationError):
    """A line-oriented input file could not be parsed."""

    def __init__(self, message: str, *, path: str | None = None, lineno: int | None = None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class ContractError(MetaforgeError):
    """An operation was called outside its precondition (e.g. right_parent on the root)."""
