"""Budget-constrained security control selection as a lexicographic game.

Build a catalogue of atomic controls (costs, dependencies, per-objective
effectiveness), describe the expected attacker as ordered tiers of
targets, and solve for the cheapest combinations that lexicographically
maximize total effectiveness tier by tier, one solution set per
uncertainty case.
"""

from .algebra import (
    Atom,
    Choice,
    Combination,
    Composition,
    FamilyTerm,
    NormalFamily,
    ONE,
    One,
    RequirementRule,
    ZERO,
    Zero,
    choice,
    compose,
    filter_requirements,
    leq,
    normalize,
    opt,
    refines,
    requirement_closure,
    satisfies_requirements,
)
from .catalogue import (
    Case,
    ControlCatalogue,
    ControlEntry,
    EffectivenessCell,
    ObjectiveRef,
    Rating,
    enumerate_cases,
    family_of,
    parse_catalogue,
    serialize_catalogue,
)
from .errors import (
    CaseLimitExceeded,
    CtrlGameError,
    DuplicateControl,
    ExpansionLimitExceeded,
    NoFeasibleCombination,
    ParseError,
    TooLargeForOracle,
    UnknownControl,
    UnknownControlInDependency,
    UnknownRating,
    UnresolvedUncertainCell,
)
from .report import ReportDocument, ReportGroup, build_report, parse_report, render
from .solver import (
    AttackerProfile,
    AttackerTier,
    CaseSolution,
    InfeasibleCase,
    SolveOutcome,
    brute_force_solve_case,
    parse_profile,
    profile,
    solve,
    solve_case,
    tier,
    tier_score,
)
from .valuation import Budget, GameMatrixRow, cost, eff, game_matrix, is_valid

__all__ = [
    "Atom",
    "AttackerProfile",
    "AttackerTier",
    "Budget",
    "Case",
    "CaseLimitExceeded",
    "CaseSolution",
    "Choice",
    "Combination",
    "Composition",
    "ControlCatalogue",
    "ControlEntry",
    "CtrlGameError",
    "DuplicateControl",
    "EffectivenessCell",
    "ExpansionLimitExceeded",
    "FamilyTerm",
    "GameMatrixRow",
    "InfeasibleCase",
    "NoFeasibleCombination",
    "NormalFamily",
    "ONE",
    "ObjectiveRef",
    "One",
    "ParseError",
    "Rating",
    "ReportDocument",
    "ReportGroup",
    "RequirementRule",
    "SolveOutcome",
    "TooLargeForOracle",
    "UnknownControl",
    "UnknownControlInDependency",
    "UnknownRating",
    "UnresolvedUncertainCell",
    "ZERO",
    "Zero",
    "brute_force_solve_case",
    "build_report",
    "choice",
    "compose",
    "cost",
    "eff",
    "enumerate_cases",
    "family_of",
    "filter_requirements",
    "game_matrix",
    "is_valid",
    "leq",
    "normalize",
    "opt",
    "parse_catalogue",
    "parse_profile",
    "parse_report",
    "profile",
    "refines",
    "render",
    "requirement_closure",
    "satisfies_requirements",
    "serialize_catalogue",
    "solve",
    "solve_case",
    "tier",
    "tier_score",
    "tier_score",
]
