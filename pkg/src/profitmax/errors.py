"""Exception types shared across the package.

The CLI maps these onto process exit codes; see ``profitmax.cli``.
"""


class ProfitMaxError(Exception):
    """Base class for all package errors."""


class ParseError(ProfitMaxError):
    """An input file is syntactically malformed (message carries the line number)."""


class DomainError(ProfitMaxError):
    """A value or argument is outside its valid domain."""


class CapacityError(ProfitMaxError):
    """An exact-computation size cap would be exceeded."""


class ConfigError(ProfitMaxError):
    """A run configuration is invalid."""


class InternalError(ProfitMaxError):
    """An internal invariant was violated, e.g. by an inconsistent evaluator."""
