"""Turns a solve outcome into the suggested-controls report.

Cases that produced identical results (same combinations, same scores,
same cost) are folded into one group, ordered by their lowest case id.
Scores appear both as exact fractions and rounded to six significant
digits; every tie was already decided on the exact values.
"""

from __future__ import annotations

import decimal
import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Any

from .catalogue import (
    ControlCatalogue,
    ObjectiveRef,
    Rating,
    combo_sort_key,
    format_decimal,
    rating_from_label,
    sorted_ids,
)
from .errors import ParseError
from .solver import (
    AttackerProfile,
    CaseResult,
    CaseSolution,
    SolveOutcome,
    profile_from_json_obj,
    profile_to_json_obj,
)

NO_FEASIBLE_TEXT = "No feasible combination within budget"


def approx_str(value: Fraction, digits: int = 6) -> str:
    """Decimal rendering of a fraction at the given significant digits."""
    ctx = decimal.Context(prec=digits)
    return str(ctx.divide(Decimal(value.numerator), Decimal(value.denominator)))


def exact_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _parse_exact(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or "1"))


@dataclass(frozen=True)
class ReportGroup:
    """Cases sharing one result, with the uncertainty values they agree on."""

    cases: tuple[int, ...]
    assignments: tuple[tuple[str, ObjectiveRef, Rating], ...]
    combos: tuple[tuple[str, ...], ...]
    cost: Decimal | None
    tier_scores: tuple[Fraction, ...] | None

    @property
    def feasible(self) -> bool:
        return self.cost is not None


@dataclass(frozen=True)
class ReportDocument:
    budget: Decimal
    profile: AttackerProfile
    catalogue_digest: str
    case_count: int
    groups: tuple[ReportGroup, ...]
    generated_at: str | None = None


def _canonical_combos(result: CaseSolution) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted((sorted_ids(c) for c in set(result.combos)), key=combo_sort_key))


def _result_key(result: CaseResult) -> tuple:
    if isinstance(result, CaseSolution):
        return (_canonical_combos(result), result.tier_scores, result.cost)
    return ("infeasible",)


def build_report(
    outcome: SolveOutcome,
    cat: ControlCatalogue,
    budget,
    profile: AttackerProfile,
    *,
    generated_at: str | None = None,
) -> ReportDocument:
    """Group identical case results into a report document."""
    budget_limit = budget.limit if hasattr(budget, "limit") else Decimal(budget)
    grouped: dict[tuple, list[CaseResult]] = {}
    for result in outcome.results:
        grouped.setdefault(_result_key(result), []).append(result)

    groups = []
    for members in grouped.values():
        cases = tuple(sorted(r.case.index for r in members))
        # Keep only the uncertainty resolutions every member case shares;
        # those are what characterize the group.
        shared = None
        for r in members:
            triples = set(r.case.assignment)
            shared = triples if shared is None else shared & triples
        first = members[0].case.assignment
        assignments = tuple(t for t in first if t in (shared or set()))
        head = members[0]
        if isinstance(head, CaseSolution):
            groups.append(
                ReportGroup(
                    cases=cases,
                    assignments=assignments,
                    combos=_canonical_combos(head),
                    cost=head.cost,
                    tier_scores=head.tier_scores,
                )
            )
        else:
            groups.append(
                ReportGroup(
                    cases=cases,
                    assignments=assignments,
                    combos=(),
                    cost=None,
                    tier_scores=None,
                )
            )
    groups.sort(key=lambda g: g.cases[0])
    return ReportDocument(
        budget=budget_limit,
        profile=profile,
        catalogue_digest=cat.digest(),
        case_count=len(outcome.results),
        groups=tuple(groups),
        generated_at=generated_at,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def report_to_json_obj(doc: ReportDocument) -> dict[str, Any]:
    return {
        "metadata": {
            "budget": format_decimal(doc.budget),
            "profile": profile_to_json_obj(doc.profile),
            "catalogue_digest": doc.catalogue_digest,
            "case_count": doc.case_count,
            "generated_at": doc.generated_at,
        },
        "groups": [
            {
                "cases": list(g.cases),
                "assignments": [
                    {
                        "control": cid,
                        "asset": ref.asset,
                        "objective": ref.objective,
                        "rating": rating.label,
                    }
                    for cid, ref, rating in g.assignments
                ],
                "combos": [list(c) for c in g.combos],
                "cost": format_decimal(g.cost) if g.cost is not None else None,
                "tier_scores": (
                    [
                        {"exact": exact_str(s), "approx": approx_str(s)}
                        for s in g.tier_scores
                    ]
                    if g.tier_scores is not None
                    else None
                ),
            }
            for g in doc.groups
        ],
    }


def parse_report(source: str | bytes) -> ReportDocument:
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid report JSON: {exc}") from None
    try:
        meta = obj["metadata"]
        groups = tuple(
            ReportGroup(
                cases=tuple(int(i) for i in g["cases"]),
                assignments=tuple(
                    (
                        a["control"],
                        ObjectiveRef(a["asset"], a["objective"]),
                        rating_from_label(a["rating"]),
                    )
                    for a in g["assignments"]
                ),
                combos=tuple(tuple(c) for c in g["combos"]),
                cost=Decimal(g["cost"]) if g["cost"] is not None else None,
                tier_scores=(
                    tuple(_parse_exact(s["exact"]) for s in g["tier_scores"])
                    if g["tier_scores"] is not None
                    else None
                ),
            )
            for g in obj["groups"]
        )
        return ReportDocument(
            budget=Decimal(meta["budget"]),
            profile=profile_from_json_obj(meta["profile"]),
            catalogue_digest=meta["catalogue_digest"],
            case_count=int(meta["case_count"]),
            groups=groups,
            generated_at=meta.get("generated_at"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed report document: {exc}") from None


def render_text(doc: ReportDocument) -> str:
    lines = ["Suggested security control combinations", ""]
    lines.append(f"Budget: {format_decimal(doc.budget)}")
    lines.append(f"Catalogue digest: {doc.catalogue_digest}")
    if doc.generated_at:
        lines.append(f"Generated: {doc.generated_at}")
    for i, t in enumerate(doc.profile.tiers, start=1):
        targets = ", ".join(str(ref) for ref in sorted(t.targets))
        lines.append(f"Tier {i}: {targets}")
    lines.append(f"Cases: {doc.case_count}")
    for g in doc.groups:
        lines.append("")
        lines.append(f"Case(s): {', '.join(str(c) for c in g.cases)}")
        for cid, ref, rating in g.assignments:
            lines.append(f"  Resolved: {cid} @ {ref} = {rating.label}")
        if not g.feasible:
            lines.append(f"  {NO_FEASIBLE_TEXT}")
            continue
        for combo in g.combos:
            lines.append(f"  Combo: {', '.join(combo)}")
        lines.append(f"  Cost: {format_decimal(g.cost)}")
        assert g.tier_scores is not None
        for i, score in enumerate(g.tier_scores, start=1):
            lines.append(
                f"  Tier {i} score: {approx_str(score)} ({exact_str(score)})"
            )
    lines.append("")
    return "\n".join(lines)


def render(doc: ReportDocument, format: str) -> bytes:
    """Serialize a report; ``format`` is ``"text"`` or ``"json"``."""
    fmt = format.lower()
    if fmt == "text":
        return render_text(doc).encode("utf-8")
    if fmt == "json":
        return (json.dumps(report_to_json_obj(doc), indent=2) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")
