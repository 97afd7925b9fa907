"""Exception types shared across the package.

The CLI maps these onto process exit codes: parameter problems exit 2,
verification failures exit 3, blown resource budgets exit 4.
"""

from __future__ import annotations


class CrosspeaksError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CrosspeaksError):
    """Invalid argument: out-of-range parameter, dimension mismatch, bad format."""


class VerificationError(CrosspeaksError):
    """An invariant that the construction guarantees was found violated."""


class BudgetExceededError(CrosspeaksError):
    """A computation would exceed a configured resource budget."""
