"""Terms over security control families and their set normal form.

A family is built from atomic controls with two operators: ``choice``
(pick one of the alternatives) and ``compose`` (install both sides).
Together with the annihilating element ``ZERO`` and the empty combination
``ONE`` these form a commutative idempotent semiring, so every finite term
flattens to a set of combinations, each combination a set of control ids.
All relations below (ordering, refinement, requirements) are decided on
that normal form by plain set inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DuplicateControl, ExpansionLimitExceeded

# A combination of atomic controls; frozenset() is the empty combination.
Combination = frozenset[str]

DEFAULT_EXPANSION_LIMIT = 2**20

_FORBIDDEN_ID_CHARS = set(",;+")


def is_valid_control_id(control_id: str) -> bool:
    """Ids must be non-empty tokens free of whitespace and ``, ; +``.

    Those characters are reserved by the catalogue file format.
    """
    if not control_id:
        return False
    if any(ch.isspace() for ch in control_id):
        return False
    return not (_FORBIDDEN_ID_CHARS & set(control_id))


def _check_id(control_id: str) -> str:
    if not is_valid_control_id(control_id):
        raise ValueError(f"invalid control id: {control_id!r}")
    return control_id


class FamilyTerm:
    """Base class for family terms; use the module constructors."""

    __slots__ = ()

    def __or__(self, other: "FamilyTerm") -> "FamilyTerm":
        return choice(self, other)

    def __and__(self, other: "FamilyTerm") -> "FamilyTerm":
        return compose(self, other)


@dataclass(frozen=True, slots=True)
class Zero(FamilyTerm):
    """The non-implementable family: no combination at all."""


@dataclass(frozen=True, slots=True)
class One(FamilyTerm):
    """The empty combination: install nothing."""


@dataclass(frozen=True, slots=True)
class Atom(FamilyTerm):
    id: str

    def __post_init__(self) -> None:
        _check_id(self.id)


@dataclass(frozen=True, slots=True)
class Choice(FamilyTerm):
    left: FamilyTerm
    right: FamilyTerm


@dataclass(frozen=True, slots=True)
class Composition(FamilyTerm):
    left: FamilyTerm
    right: FamilyTerm


ZERO = Zero()
ONE = One()


def atom(control_id: str) -> Atom:
    return Atom(control_id)


def choice(a: FamilyTerm, b: FamilyTerm) -> FamilyTerm:
    """Alternative between two families (the additive operator)."""
    return Choice(a, b)


def compose(a: FamilyTerm, b: FamilyTerm) -> FamilyTerm:
    """Mandatory composition of two families (the multiplicative operator)."""
    return Composition(a, b)


def opt(ids: Sequence[str]) -> FamilyTerm:
    """Family of every subset of the given optional controls.

    ``opt([c1, .., cn])`` composes one ``(ci or nothing)`` factor per
    control, so its normal form has exactly ``2**n`` combinations.
    """
    seen: set[str] = set()
    for control_id in ids:
        _check_id(control_id)
        if control_id in seen:
            raise DuplicateControl(control_id)
        seen.add(control_id)
    term: FamilyTerm = ONE
    for control_id in ids:
        term = compose(term, choice(Atom(control_id), ONE))
    return term


def combination_bound(term: FamilyTerm) -> int:
    """Upper bound on the number of combinations ``normalize`` would build.

    Exact when no duplicates collapse; idempotence can only shrink the
    real count, never grow it.
    """
    match term:
        case Zero():
            return 0
        case One() | Atom():
            return 1
        case Choice(left, right):
            return combination_bound(left) + combination_bound(right)
        case Composition(left, right):
            return combination_bound(left) * combination_bound(right)
    raise TypeError(f"not a family term: {term!r}")


@dataclass(frozen=True, slots=True)
class NormalFamily:
    """Sum-of-products form: a set of combinations."""

    combos: frozenset[Combination]

    def __len__(self) -> int:
        return len(self.combos)

    def __iter__(self) -> Iterator[Combination]:
        return iter(self.combos)

    def __contains__(self, combo: Combination) -> bool:
        return combo in self.combos

    def restrict(self, keep: "Iterable[Combination]") -> "NormalFamily":
        kept = frozenset(keep)
        return NormalFamily(self.combos & kept)


EMPTY_FAMILY = NormalFamily(frozenset())
UNIT_FAMILY = NormalFamily(frozenset({frozenset()}))


def _expand(term: FamilyTerm) -> frozenset[Combination]:
    match term:
        case Zero():
            return frozenset()
        case One():
            return frozenset({frozenset()})
        case Atom(control_id):
            return frozenset({frozenset({control_id})})
        case Choice(left, right):
            return _expand(left) | _expand(right)
        case Composition(left, right):
            lhs = _expand(left)
            rhs = _expand(right)
            return frozenset(a | b for a in lhs for b in rhs)
    raise TypeError(f"not a family term: {term!r}")


def normalize(term: FamilyTerm, limit: int = DEFAULT_EXPANSION_LIMIT) -> NormalFamily:
    """Flatten a term to its set of combinations.

    Choice maps to set union, composition to pairwise union of the
    member combinations. Refuses terms whose expansion bound exceeds
    ``limit``; such families must stay implicit (see the solver).
    """
    bound = combination_bound(term)
    if bound > limit:
        raise ExpansionLimitExceeded(
            f"term may expand to {bound} combinations (limit {limit}); "
            "use the implicit solver instead of normalizing"
        )
    return NormalFamily(_expand(term))


def leq(a: NormalFamily, b: NormalFamily) -> bool:
    """Natural semiring order: ``a + b == b``, i.e. set inclusion."""
    return a.combos <= b.combos


def refines(c1: Combination, c2: Combination) -> bool:
    """True when ``c1`` contains everything ``c2`` mandates.

    For products of atoms, the existence of a complement factor reduces
    to superset of atom sets; every combination refines the empty one.
    """
    return c1 >= c2


@dataclass(frozen=True, slots=True)
class RequirementRule:
    """Selecting ``antecedent`` forces selecting all of ``consequent``."""

    antecedent: str
    consequent: frozenset[str]

    def __post_init__(self) -> None:
        _check_id(self.antecedent)
        if not self.consequent:
            raise ValueError("requirement consequent must be non-empty")
        for control_id in self.consequent:
            _check_id(control_id)
        if self.antecedent in self.consequent:
            raise ValueError(
                f"requirement for {self.antecedent!r} lists itself as consequent"
            )


def satisfies_requirements(
    combo: Combination, rules: Iterable[RequirementRule]
) -> bool:
    """Check every rule on a single combination.

    A family satisfies a rule when each of its combinations does, so
    callers filter normal forms combination by combination.
    """
    return all(
        rule.antecedent not in combo or rule.consequent <= combo for rule in rules
    )


def filter_requirements(
    family: NormalFamily, rules: Sequence[RequirementRule]
) -> NormalFamily:
    """Drop combinations that violate any requirement rule."""
    return NormalFamily(
        frozenset(c for c in family.combos if satisfies_requirements(c, rules))
    )


def consequent_index(
    rules: Iterable[RequirementRule],
) -> Mapping[str, tuple[frozenset[str], ...]]:
    """Group rule consequents by antecedent for fast closure walks."""
    index: dict[str, list[frozenset[str]]] = {}
    for rule in rules:
        index.setdefault(rule.antecedent, []).append(rule.consequent)
    return {k: tuple(v) for k, v in index.items()}


def requirement_closure(
    atoms: Iterable[str],
    rules: Iterable[RequirementRule] | Mapping[str, tuple[frozenset[str], ...]],
) -> Combination:
    """Smallest superset of ``atoms`` closed under the requirement rules."""
    index = rules if isinstance(rules, Mapping) else consequent_index(rules)
    closed = set(atoms)
    frontier = list(closed)
    while frontier:
        control_id = frontier.pop()
        for consequent in index.get(control_id, ()):
            for required in consequent:
                if required not in closed:
                    closed.add(required)
                    frontier.append(required)
    return frozenset(closed)
