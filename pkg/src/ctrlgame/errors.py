"""Exception types shared across the package."""

from __future__ import annotations


class CtrlGameError(Exception):
    """Base class for all domain errors raised by this package."""


class DuplicateControl(CtrlGameError):
    """A control id occurs more than once where ids must be distinct."""


class UnknownControl(CtrlGameError):
    """A control id does not resolve in the active catalogue."""


class UnknownControlInDependency(CtrlGameError):
    """A requirement rule references a control id absent from the catalogue."""


class ParseError(CtrlGameError):
    """A catalogue or profile document is malformed.

    Carries enough position information (row/column or JSON path) to point
    the author at the offending cell.
    """

    def __init__(self, reason: str, *, row: int | None = None, column: str | None = None):
        self.reason = reason
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{reason}{suffix}")


class UnknownRating(ParseError):
    """An effectiveness label is not one of the recognised ratings."""


class ExpansionLimitExceeded(CtrlGameError):
    """Normalizing a term would materialize more combinations than allowed.

    Large families should go through the implicit solver instead of being
    expanded to a normal form.
    """


class CaseLimitExceeded(CtrlGameError):
    """The uncertainty cells generate more cases than the configured limit."""


class UnresolvedUncertainCell(CtrlGameError):
    """An effectiveness lookup hit an uncertain cell the case does not resolve."""


class NoFeasibleCombination(CtrlGameError):
    """The mandatory controls and their requirement closure exceed the budget."""


class TooLargeForOracle(CtrlGameError):
    """The instance is too large for exhaustive enumeration."""
