"""Errors raised while parsing or validating DVQ text."""

from __future__ import annotations


class DvqError(ValueError):
    """Base class for all DVQ parse/validation failures."""


class UnknownChartType(DvqError):
    """Chart token is not one of BAR, PIE, LINE, SCATTER."""

    def __init__(self, token: str, offset: int):
        self.token = token
        self.offset = offset
        super().__init__(f"unknown chart type {token!r} (at byte {offset})")


class MalformedClause(DvqError):
    """Generic syntax error, reported with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


class UnbalancedParens(DvqError):
    """Parenthesis nesting does not balance."""

    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"unbalanced parentheses (at byte {offset})")


class DanglingAlias(DvqError):
    """A column qualifier does not name any table or alias declared in FROM/JOIN."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"alias {name!r} is not declared in the FROM clause")
