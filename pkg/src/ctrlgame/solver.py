"""Plays the selection game per uncertainty case.

The attacker profile orders tiers of targets; among all affordable,
requirement-satisfying combinations that include every mandatory control,
the game keeps those whose tier-score vector is lexicographically maximal
and, among those, the cheapest. The search never materializes the full
space of optional subsets: a depth-first branch and bound walks optional
controls in order of their contribution to the first tier, keeping every
node closed under the requirement rules and pruning with an optimistic
per-tier bound. An exhaustive oracle with the same contract backs the
solver in tests.

Optional controls rated ``None`` on every profiled target never improve a
score, so they enter a solution only through requirement closure; the
zero-cost ones among them (which would otherwise pad optima with
cost-neutral noise) are reported in the solver statistics instead.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import (
    Combination,
    consequent_index,
    requirement_closure,
    satisfies_requirements,
)
from .catalogue import (
    Case,
    ControlCatalogue,
    ObjectiveRef,
    OBJECTIVES,
    combo_sort_key,
    control_sort_key,
    enumerate_cases,
)
from .errors import NoFeasibleCombination, ParseError, TooLargeForOracle
from .valuation import Budget, cost, eff, resolved_rating

ORACLE_MAX_OPTIONAL = 20


@dataclass(frozen=True)
class AttackerTier:
    """Targets the attacker pursues with equal priority."""

    targets: frozenset[ObjectiveRef]

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("attacker tier must target at least one objective")


@dataclass(frozen=True)
class AttackerProfile:
    """Ordered tiers, most likely first. Targets may repeat across tiers."""

    tiers: tuple[AttackerTier, ...]

    def __post_init__(self) -> None:
        if not self.tiers:
            raise ValueError("attacker profile needs at least one tier")


def tier(*targets: tuple[str, str] | ObjectiveRef) -> AttackerTier:
    """Convenience constructor: ``tier(("Sensors", "C"), ...)``."""
    refs = frozenset(
        t if isinstance(t, ObjectiveRef) else ObjectiveRef(*t) for t in targets
    )
    return AttackerTier(refs)


def profile(*tiers_: AttackerTier | Iterable[tuple[str, str]]) -> AttackerProfile:
    built = tuple(
        t if isinstance(t, AttackerTier) else tier(*t) for t in tiers_
    )
    return AttackerProfile(built)


def validate_profile(p: AttackerProfile, cat: ControlCatalogue) -> None:
    """Raise ``ValueError`` if any target is unknown to the catalogue."""
    assets = set(cat.assets)
    for i, t in enumerate(p.tiers, start=1):
        for ref in t.targets:
            if ref.asset not in assets:
                raise ValueError(f"tier {i}: unknown asset {ref.asset!r}")
            if ref.objective not in OBJECTIVES:
                raise ValueError(f"tier {i}: unknown objective {ref.objective!r}")


def parse_profile(source: str | bytes) -> AttackerProfile:
    """Parse the profile document: ``{"tiers": [[{asset, objective}]]}``."""
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid profile JSON: {exc}") from None
    return profile_from_json_obj(doc)


def profile_from_json_obj(doc) -> AttackerProfile:
    if not isinstance(doc, dict) or not isinstance(doc.get("tiers"), list):
        raise ParseError("profile must be an object with a 'tiers' list")
    tiers_ = []
    for i, raw in enumerate(doc["tiers"], start=1):
        if not isinstance(raw, list) or not raw:
            raise ParseError(f"tier {i} must be a non-empty list", column=f"tiers[{i - 1}]")
        targets = set()
        for item in raw:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("asset"), str)
                or not isinstance(item.get("objective"), str)
            ):
                raise ParseError(
                    "each target needs string 'asset' and 'objective' fields",
                    column=f"tiers[{i - 1}]",
                )
            targets.add(ObjectiveRef(item["asset"], item["objective"]))
        tiers_.append(AttackerTier(frozenset(targets)))
    return AttackerProfile(tuple(tiers_))


def profile_to_json_obj(p: AttackerProfile) -> dict:
    return {
        "tiers": [
            [
                {"asset": ref.asset, "objective": ref.objective}
                for ref in sorted(t.targets)
            ]
            for t in p.tiers
        ]
    }


def tier_score(
    combo: Combination, t: AttackerTier, case: Case, cat: ControlCatalogue
) -> Fraction:
    """Total effectiveness of a combination across one tier's targets."""
    return sum((eff(combo, ref, case, cat) for ref in t.targets), Fraction(0))


@dataclass(frozen=True)
class CaseSolution:
    """Every optimal combination for one case, with the shared valuation."""

    case: Case
    combos: tuple[Combination, ...]
    tier_scores: tuple[Fraction, ...]
    cost: Decimal


@dataclass(frozen=True)
class InfeasibleCase:
    """Marker for a case whose mandatory closure exceeds the budget."""

    case: Case
    reason: str


CaseResult = CaseSolution | InfeasibleCase


@dataclass(frozen=True)
class SolverStats:
    nodes_explored: int
    wall_time_s: float
    zero_cost_excluded: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolveOutcome:
    """One result per case, in case order, plus solver statistics."""

    results: tuple[CaseResult, ...]
    stats: SolverStats

    @property
    def solutions(self) -> tuple[CaseSolution, ...]:
        return tuple(r for r in self.results if isinstance(r, CaseSolution))


# ---------------------------------------------------------------------------
# Shared per-case precomputation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _CaseContext:
    cat: ControlCatalogue
    budget: Budget
    case: Case
    tiers: tuple[tuple[ObjectiveRef, ...], ...]
    targets: tuple[ObjectiveRef, ...]          # flattened, tier by tier
    tier_slices: tuple[tuple[int, int], ...]   # [start, end) into targets
    rules_index: Mapping[str, tuple[frozenset[str], ...]]
    base: Combination                          # closure of the mandatory set
    base_cost: Decimal
    values: Mapping[str, tuple[Fraction, ...]]  # per control: value per target
    relevant_optional: frozenset[str]
    zero_cost_excluded: tuple[str, ...]


def _target_order_key(cat: ControlCatalogue) -> Callable[[ObjectiveRef], tuple[int, int]]:
    asset_idx = {a: i for i, a in enumerate(cat.assets)}
    obj_idx = {o: i for i, o in enumerate(OBJECTIVES)}

    def key(ref: ObjectiveRef) -> tuple[int, int]:
        return (asset_idx[ref.asset], obj_idx[ref.objective])

    return key


def _build_context(
    cat: ControlCatalogue, budget: Budget, p: AttackerProfile, case: Case
) -> _CaseContext:
    validate_profile(p, cat)
    key = _target_order_key(cat)
    tiers = tuple(tuple(sorted(t.targets, key=key)) for t in p.tiers)
    targets: list[ObjectiveRef] = []
    tier_slices = []
    for t in tiers:
        start = len(targets)
        targets.extend(t)
        tier_slices.append((start, len(targets)))

    rules_index = consequent_index(cat.rules)
    base = requirement_closure(cat.mandatory_ids, rules_index)
    base_cost = cost(base, cat)

    values: dict[str, tuple[Fraction, ...]] = {}
    for entry in cat.controls:
        values[entry.id] = tuple(
            resolved_rating(cat, entry.id, ref, case).score for ref in targets
        )

    relevant = frozenset(
        cid for cid in cat.optional_ids
        if cid not in base and any(v > 0 for v in values[cid])
    )
    zero_cost_excluded = tuple(
        cid for cid in cat.optional_ids
        if cid not in base
        and cid not in relevant
        and cat.entry(cid).cost == 0
    )
    return _CaseContext(
        cat=cat,
        budget=budget,
        case=case,
        tiers=tiers,
        targets=tuple(targets),
        tier_slices=tuple(tier_slices),
        rules_index=rules_index,
        base=base,
        base_cost=base_cost,
        values=values,
        relevant_optional=relevant,
        zero_cost_excluded=zero_cost_excluded,
    )


def _vector_from_gaps(ctx: _CaseContext, gaps: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(
        sum((1 - gaps[i] for i in range(start, end)), Fraction(0))
        for start, end in ctx.tier_slices
    )


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------


class _Search:
    def __init__(self, ctx: _CaseContext):
        self.ctx = ctx
        self.nodes = 0
        self.best_vector: tuple[Fraction, ...] | None = None
        self.best_cost: Decimal | None = None
        self.best_combos: list[Combination] = []
        # Decision order: strongest first-tier contribution first, then
        # overall contribution, then cheaper, then stable id order.
        t1_start, t1_end = ctx.tier_slices[0]

        def order(cid: str) -> tuple:
            vals = ctx.values[cid]
            tier1 = sum(vals[t1_start:t1_end], Fraction(0))
            total = sum(vals, Fraction(0))
            return (-tier1, -total, ctx.cat.entry(cid).cost, control_sort_key(cid))

        self.decisions = sorted(ctx.relevant_optional, key=order)
        self.excluded: set[str] = set()
        # Static per-tier items for the capacity-aware bound: additive
        # contribution caps the true noisy-or gain, so a fractional
        # knapsack over (contribution, own cost) bounds any affordable
        # completion from above. Zero-cost items sort first.
        self.knap_items: list[list[tuple[str, Fraction, Decimal]]] = []

        def dantzig_order(item: tuple[str, Fraction, Decimal]) -> tuple:
            _, contrib, own_cost = item
            if own_cost == 0:
                return (0, Fraction(0))
            return (1, -contrib / Fraction(own_cost))

        for start, end in ctx.tier_slices:
            items = []
            for cid in self.decisions:
                contrib = sum(ctx.values[cid][start:end], Fraction(0))
                if contrib > 0:
                    items.append((cid, contrib, ctx.cat.entry(cid).cost))
            # Zero-cost items always fit, so they must precede the
            # ratio-ordered rest or the fractional cutoff could drop them
            # and the bound would stop being an upper bound.
            items.sort(key=dantzig_order)
            self.knap_items.append(items)

    def _knapsack_bound(
        self, tier_idx: int, included: Combination, budget_left: Decimal
    ) -> Fraction:
        """Upper bound on the tier score any descendant can still add."""
        gain = Fraction(0)
        left = budget_left
        for cid, contrib, own_cost in self.knap_items[tier_idx]:
            if cid in included or cid in self.excluded:
                continue
            if own_cost <= left:
                gain += contrib
                left -= own_cost
            else:
                if left > 0:
                    gain += contrib * Fraction(left) / Fraction(own_cost)
                break
        return gain

    def run(self) -> None:
        ctx = self.ctx
        gaps_inc = [Fraction(1)] * len(ctx.targets)
        for cid in ctx.base:
            for i, v in enumerate(ctx.values[cid]):
                if v:
                    gaps_inc[i] *= 1 - v
        gaps_pot = list(gaps_inc)
        for cid in self.decisions:
            for i, v in enumerate(ctx.values[cid]):
                if v:
                    gaps_pot[i] *= 1 - v
        self._dfs(0, ctx.base, ctx.base_cost, gaps_inc, gaps_pot)

    def _offer(self, combo: Combination, vector: tuple[Fraction, ...], combo_cost: Decimal) -> None:
        if self.best_vector is None or vector > self.best_vector:
            self.best_vector = vector
            self.best_cost = combo_cost
            self.best_combos = [combo]
        elif vector == self.best_vector:
            assert self.best_cost is not None
            if combo_cost < self.best_cost:
                self.best_cost = combo_cost
                self.best_combos = [combo]
            elif combo_cost == self.best_cost:
                self.best_combos.append(combo)

    def _dfs(
        self,
        i: int,
        included: Combination,
        cost_now: Decimal,
        gaps_inc: list[Fraction],
        gaps_pot: list[Fraction],
    ) -> None:
        ctx = self.ctx
        self.nodes += 1
        decisions = self.decisions
        n = len(decisions)
        while i < n and decisions[i] in included:
            i += 1
        if self.best_vector is not None:
            # Two upper bounds per tier: the saturation bound (everything
            # undecided added, budget ignored) and the capacity bound
            # (fractional knapsack over the remaining budget). Their
            # minimum still dominates every descendant tier by tier, so
            # equal bound plus higher cost cannot beat or tie the
            # incumbent.
            pot = _vector_from_gaps(ctx, gaps_pot)
            have = _vector_from_gaps(ctx, gaps_inc)
            budget_left = ctx.budget.limit - cost_now
            bound = tuple(
                min(pot[k], have[k] + self._knapsack_bound(k, included, budget_left))
                for k in range(len(pot))
            )
            if bound < self.best_vector:
                return
            if bound == self.best_vector and cost_now > self.best_cost:
                return
        if i == n:
            self._offer(included, _vector_from_gaps(ctx, gaps_inc), cost_now)
            return

        cid = decisions[i]
        # Include branch first: it reaches strong incumbents early.
        closed = requirement_closure(included | {cid}, ctx.rules_index)
        added = closed - included
        if not (added & self.excluded):
            add_cost = sum(
                (ctx.cat.entry(a).cost for a in added), Decimal(0)
            )
            new_cost = cost_now + add_cost
            if new_cost <= ctx.budget.limit:
                new_inc = list(gaps_inc)
                for a in added:
                    for t, v in enumerate(ctx.values[a]):
                        if v:
                            new_inc[t] *= 1 - v
                # Added controls are either undecided decisions (already in
                # the potential product) or contribute nothing to it.
                self._dfs(i + 1, closed, new_cost, new_inc, gaps_pot)

        self.excluded.add(cid)
        new_pot = list(gaps_pot)
        for t, v in enumerate(ctx.values[cid]):
            if v:
                new_pot[t] /= 1 - v
        self._dfs(i + 1, included, cost_now, gaps_inc, new_pot)
        self.excluded.remove(cid)


def _solve_case_impl(
    cat: ControlCatalogue, budget: Budget, p: AttackerProfile, case: Case
) -> tuple[CaseSolution, int, tuple[str, ...]]:
    ctx = _build_context(cat, budget, p, case)
    if ctx.base_cost > budget.limit:
        raise NoFeasibleCombination(
            f"mandatory controls cost {ctx.base_cost} which exceeds "
            f"the budget {budget.limit}"
        )
    search = _Search(ctx)
    search.run()
    assert search.best_vector is not None and search.best_cost is not None
    combos = tuple(sorted(search.best_combos, key=combo_sort_key))
    solution = CaseSolution(
        case=case,
        combos=combos,
        tier_scores=search.best_vector,
        cost=search.best_cost,
    )
    return solution, search.nodes, ctx.zero_cost_excluded


def solve_case(
    cat: ControlCatalogue, budget: Budget, p: AttackerProfile, case: Case
) -> CaseSolution:
    """All lexicographically optimal, minimum-cost combinations for a case."""
    solution, _, _ = _solve_case_impl(cat, budget, p, case)
    return solution


def solve(
    cat: ControlCatalogue,
    budget: Budget,
    p: AttackerProfile,
    *,
    case_limit: int | None = None,
    threads: int = 1,
    on_case_done: Callable[[int, int], None] | None = None,
) -> SolveOutcome:
    """Solve every uncertainty case in order.

    Cases are independent; with ``threads > 1`` they run on a thread pool.
    The outcome is identical for any thread count.
    """
    validate_profile(p, cat)
    cases = (
        enumerate_cases(cat, case_limit) if case_limit is not None else enumerate_cases(cat)
    )
    started = time.perf_counter()
    done = 0
    total = len(cases)

    def run_one(case: Case) -> tuple[CaseResult, int, tuple[str, ...]]:
        try:
            return _solve_case_impl(cat, budget, p, case)
        except NoFeasibleCombination as exc:
            return InfeasibleCase(case=case, reason=str(exc)), 0, ()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_one, case) for case in cases]
            gathered = []
            for fut in futures:
                gathered.append(fut.result())
                done += 1
                if on_case_done is not None:
                    on_case_done(done, total)
    else:
        gathered = []
        for case in cases:
            gathered.append(run_one(case))
            done += 1
            if on_case_done is not None:
                on_case_done(done, total)

    results = tuple(r for r, _, _ in gathered)
    nodes = sum(n for _, n, _ in gathered)
    excluded = sorted({cid for _, _, zs in gathered for cid in zs}, key=control_sort_key)
    stats = SolverStats(
        nodes_explored=nodes,
        wall_time_s=time.perf_counter() - started,
        zero_cost_excluded=tuple(excluded),
    )
    return SolveOutcome(results=results, stats=stats)


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def brute_force_solve_case(
    cat: ControlCatalogue, budget: Budget, p: AttackerProfile, case: Case
) -> CaseSolution:
    """Reference implementation by full enumeration of optional subsets.

    Same contract as ``solve_case``; practical only for small instances.
    """
    optional = cat.optional_ids
    if len(optional) > ORACLE_MAX_OPTIONAL:
        raise TooLargeForOracle(
            f"{len(optional)} optional controls exceed the oracle limit "
            f"of {ORACLE_MAX_OPTIONAL}"
        )
    ctx = _build_context(cat, budget, p, case)
    if ctx.base_cost > budget.limit:
        raise NoFeasibleCombination(
            f"mandatory controls cost {ctx.base_cost} which exceeds "
            f"the budget {budget.limit}"
        )

    mandatory = frozenset(cat.mandatory_ids)
    rules = cat.rules
    n = len(optional)
    limit = budget.limit

    # Complement factors per target for every control with a nonzero value.
    factors: dict[str, tuple[tuple[int, Fraction], ...]] = {
        cid: tuple((t, 1 - v) for t, v in enumerate(ctx.values[cid]) if v)
        for cid in cat._by_id
    }
    base_gaps = [Fraction(1)] * len(ctx.targets)
    for cid in mandatory:
        for t, f in factors[cid]:
            base_gaps[t] *= f

    costs = [cat.entry(cid).cost for cid in optional]
    mandatory_cost = sum((cat.entry(cid).cost for cid in mandatory), Decimal(0))

    best_vector: tuple[Fraction, ...] | None = None
    best_cost: Decimal | None = None
    best: list[Combination] = []

    for mask in range(1 << n):
        subset = [optional[b] for b in range(n) if mask >> b & 1]
        combo = mandatory | frozenset(subset)
        if not satisfies_requirements(combo, rules):
            continue
        combo_cost = mandatory_cost + sum(
            (costs[b] for b in range(n) if mask >> b & 1), Decimal(0)
        )
        if combo_cost > limit:
            continue
        gaps = list(base_gaps)
        for cid in subset:
            for t, f in factors[cid]:
                gaps[t] *= f
        vector = _vector_from_gaps(ctx, gaps)
        if best_vector is None or vector > best_vector:
            best_vector, best_cost, best = vector, combo_cost, [combo]
        elif vector == best_vector:
            if combo_cost < best_cost:
                best_cost, best = combo_cost, [combo]
            elif combo_cost == best_cost:
                best.append(combo)

    # Canonical results never carry optional controls that contribute to no
    # profiled target unless the requirement rules force them in.
    canonical = [
        combo
        for combo in best
        if combo
        == requirement_closure(
            mandatory | (combo & ctx.relevant_optional), ctx.rules_index
        )
    ]
    assert canonical, "every optimum set contains its canonical core"
    return CaseSolution(
        case=case,
        combos=tuple(sorted(canonical, key=combo_sort_key)),
        tier_scores=best_vector,
        cost=best_cost,
    )
