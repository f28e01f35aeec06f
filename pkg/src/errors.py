# src/errors.py
"""
Exception hierarchy for the secure alignment lab.

Every error raised on purpose by the library derives from AlignmentError,
so the CLI can turn it into a machine-readable error document.
"""


class AlignmentError(Exception):
    """Base class for all library errors."""


class InvalidConfiguration(AlignmentError, ValueError):
    """Parameters that cannot describe a valid system (K < 2, m < 1, P <= 0, ...)."""


class InvalidArgument(AlignmentError, ValueError):
    """Arguments inconsistent with each other (lengths, index clashes, missing symbols)."""


class CorruptedInput(AlignmentError, ValueError):
    """A received coefficient that no valid transmission could have produced."""


class Infeasible(AlignmentError, RuntimeError):
    """An exhaustive enumeration would exceed its budget."""
