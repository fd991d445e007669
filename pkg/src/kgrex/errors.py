"""Exception hierarchy shared by all kgrex modules.

Three failure classes cross the CLI/API boundary and map to distinct
exit codes / HTTP payloads: malformed input files, domain-rule
violations, and the one reason-against scheme that is deliberately
not implemented.
"""

from __future__ import annotations


class KgrexError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(KgrexError):
    """A text input (TSV graph, path config, objective file) is malformed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(KgrexError):
    """An argument violates a documented precondition or references an
    unregistered entity/relation."""


class UnsupportedSchemeError(KgrexError):
    """Raised for reason-against scheme s2, which has no concrete semantics
    in this toolkit (negation of an item is undefined)."""


class UndefinedSupportError(DomainError):
    """Support statistics were requested for an explanation type with zero
    explained recommendation slots; reports render this as "-"."""
