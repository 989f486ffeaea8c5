"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetError(RuntimeError):
    """A computation would exceed a configured resource budget.

    The message names the budget knob (and its QC_* environment override
    where one exists) so callers can raise the limit deliberately.
    """


class FitError(RuntimeError):
    """A least-squares fit could not be performed (e.g. rank deficiency)."""
