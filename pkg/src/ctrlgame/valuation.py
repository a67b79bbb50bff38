"""Exact valuation of combinations: cost, budget validity, effectiveness.

Cost adds up over the controls of a combination. Effectiveness combines
like independent layers of defence: each control leaves a residual gap of
``1 - rating`` on a target, and a combination's gap is the product of its
members' gaps. Both are computed exactly (decimal cost, rational
effectiveness); nothing on a decision path touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Mapping

from .algebra import Combination, NormalFamily
from .catalogue import Case, ControlCatalogue, ObjectiveRef, Rating
from .errors import UnresolvedUncertainCell

ZERO_COST = Decimal(0)


@dataclass(frozen=True, slots=True)
class Budget:
    """Spending cap a combination must not exceed."""

    limit: Decimal

    def __post_init__(self) -> None:
        if self.limit < 0:
            raise ValueError("budget must be non-negative")


@dataclass(frozen=True)
class GameMatrixRow:
    """One analyst strategy: a combination and its payoff per target."""

    combo: Combination
    payoffs: Mapping[ObjectiveRef, Fraction]


def cost(combo: Combination, cat: ControlCatalogue) -> Decimal:
    """Total cost of a combination; the empty combination costs nothing."""
    total = ZERO_COST
    for control_id in combo:
        total += cat.entry(control_id).cost
    return total


def is_valid(combo: Combination, cat: ControlCatalogue, budget: Budget) -> bool:
    return cost(combo, cat) <= budget.limit


def resolved_rating(
    cat: ControlCatalogue, control_id: str, target: ObjectiveRef, case: Case
) -> Rating:
    """The single rating of a control on a target under a case.

    Missing cells count as ``None``; uncertain cells must be resolved by
    the case.
    """
    cell = cat.entry(control_id).effectiveness.get(target)
    if cell is None:
        return Rating.NONE
    if not cell.is_uncertain:
        return cell.sole
    rating = case.rating_for(control_id, target)
    if rating is None:
        raise UnresolvedUncertainCell(f"{control_id} @ {target}")
    if rating not in cell.options:
        raise ValueError(
            f"case assigns {rating.label} to {control_id} @ {target}, "
            "which is not among the cell's options"
        )
    return rating


def eff(
    combo: Combination, target: ObjectiveRef, case: Case, cat: ControlCatalogue
) -> Fraction:
    """Effectiveness of a combination toward one target, in [0, 1).

    The empty combination scores 0. Each member multiplies the remaining
    gap by ``1 - rating``; a set never counts a control twice.
    """
    gap = Fraction(1)
    for control_id in combo:
        gap *= 1 - resolved_rating(cat, control_id, target, case).score
    return 1 - gap


def game_matrix(
    family: NormalFamily, case: Case, cat: ControlCatalogue, budget: Budget
) -> tuple[GameMatrixRow, ...]:
    """Payoff rows for every budget-valid combination of the family.

    Callers are expected to have filtered the family by requirement rules
    already. Rows come out in canonical combination order.
    """
    from .catalogue import combo_sort_key  # local import to avoid a cycle

    rows = []
    for combo in sorted(family.combos, key=combo_sort_key):
        if not is_valid(combo, cat, budget):
            continue
        payoffs = {
            ref: eff(combo, ref, case, cat) for ref in cat.objective_refs
        }
        rows.append(GameMatrixRow(combo=combo, payoffs=payoffs))
    return tuple(rows)
