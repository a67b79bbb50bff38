"""The lexicographic game solver against hand-derived and oracle results."""

import itertools
import random
from decimal import Decimal
from fractions import Fraction

import pytest

from ctrlgame.catalogue import ObjectiveRef, enumerate_cases
from ctrlgame.errors import NoFeasibleCombination, ParseError, TooLargeForOracle
from ctrlgame.solver import (
    AttackerProfile,
    AttackerTier,
    InfeasibleCase,
    brute_force_solve_case,
    parse_profile,
    profile,
    profile_to_json_obj,
    solve,
    solve_case,
    tier,
    tier_score,
)
from ctrlgame.valuation import Budget, cost

from _helpers import catalogue, entry, random_instance


def ids(solution):
    return sorted(sorted(c) for c in solution.combos)


def one_case(cat):
    (case,) = enumerate_cases(cat)
    return case


class TestProfileTypes:
    def test_tier_must_be_non_empty(self):
        with pytest.raises(ValueError):
            AttackerTier(frozenset())

    def test_profile_needs_tiers(self):
        with pytest.raises(ValueError):
            AttackerProfile(())

    def test_targets_may_repeat_across_tiers(self):
        p = profile([("S", "C"), ("S", "I")], [("S", "C")])
        assert p.tiers[0].targets >= p.tiers[1].targets

    def test_parse_round_trip(self):
        p = profile([("A1", "C"), ("A2", "I")], [("A1", "A")])
        import json

        again = parse_profile(json.dumps(profile_to_json_obj(p)))
        assert again == p

    def test_parse_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_profile("{}")
        with pytest.raises(ParseError):
            parse_profile('{"tiers": [[]]}')
        with pytest.raises(ParseError):
            parse_profile('{"tiers": [[{"asset": "A"}]]}')


class TestTierScore:
    def test_sums_over_targets(self):
        cat = catalogue(
            ["A1"],
            entry("x", 1, eff={("A1", "C"): "Medium", ("A1", "I"): "High"}),
        )
        t = tier(("A1", "C"), ("A1", "I"))
        got = tier_score(frozenset({"x"}), t, one_case(cat), cat)
        assert got == Fraction(1, 2) + Fraction(4, 5) == Fraction(13, 10)

    def test_empty_combination_scores_zero(self):
        cat = catalogue(["A1"], entry("x", 1, eff={("A1", "C"): "High"}))
        t = tier(("A1", "C"))
        assert tier_score(frozenset(), t, one_case(cat), cat) == 0

    def test_published_sample_row(self, sensors_catalogue):
        combo = frozenset(
            "AC-1 AC-2 AC-3 AC-4 AC-5 AC-6 AC-7 AC-12 AC-17 AC-18 AC-23 AC-24 "
            "AU-1 AU-2 AU-3 AU-6 AU-8 AU-10 AU-12 IA-1 IA-2 IA-3 PE-1 PE-3 "
            "SC-5 SC-8 SC-40 SI-4 SI-7".split()
        )
        t = tier(("Sensors", "C"), ("Sensors", "A"))
        case = enumerate_cases(sensors_catalogue)[0]
        got = tier_score(combo, t, case, sensors_catalogue)
        assert got == Fraction(249, 250) + Fraction(23, 25)
        assert float(got) == 1.916


class TestSolveCaseBasics:
    """Hand-derived desk instances (brute force over all subsets)."""

    def prof(self):
        return profile([("A", "C")])

    def cat(self):
        return catalogue(
            ["A"],
            entry("x", 1, eff={("A", "C"): "Medium"}),
            entry("y", 2, eff={("A", "C"): "High"}),
        )

    def test_budget_two_picks_stronger_alone(self):
        cat = self.cat()
        s = solve_case(cat, Budget(Decimal(2)), self.prof(), one_case(cat))
        assert ids(s) == [["y"]]
        assert s.tier_scores == (Fraction(4, 5),)
        assert s.cost == 2

    def test_budget_three_takes_both(self):
        cat = self.cat()
        s = solve_case(cat, Budget(Decimal(3)), self.prof(), one_case(cat))
        assert ids(s) == [["x", "y"]]
        assert s.tier_scores == (1 - Fraction(1, 2) * Fraction(1, 5),)
        assert s.tier_scores == (Fraction(9, 10),)

    def test_equal_effect_breaks_tie_by_cost(self):
        cat = catalogue(
            ["A"],
            entry("cheap", 1, eff={("A", "C"): "Medium"}),
            entry("dear", 2, eff={("A", "C"): "Medium"}),
        )
        s = solve_case(cat, Budget(Decimal(2)), self.prof(), one_case(cat))
        assert ids(s) == [["cheap"]]
        assert s.cost == 1

    def test_equal_cost_ties_are_all_returned(self):
        cat = catalogue(
            ["A"],
            entry("left", 1, eff={("A", "C"): "Medium"}),
            entry("right", 1, eff={("A", "C"): "Medium"}),
        )
        s = solve_case(cat, Budget(Decimal(1)), self.prof(), one_case(cat))
        assert ids(s) == [["left"], ["right"]]

    def test_mandatory_always_included(self):
        cat = catalogue(
            ["A"],
            entry("m", 5, True),
            entry("x", 1, eff={("A", "C"): "Low"}),
        )
        s = solve_case(cat, Budget(Decimal(6)), self.prof(), one_case(cat))
        assert ids(s) == [["m", "x"]]

    def test_infeasible_mandatory_closure(self):
        cat = catalogue(
            ["A"],
            entry("m", 5, True, requires=(("dep",),)),
            entry("dep", 3),
        )
        with pytest.raises(NoFeasibleCombination):
            solve_case(cat, Budget(Decimal(7)), self.prof(), one_case(cat))
        s = solve_case(cat, Budget(Decimal(8)), self.prof(), one_case(cat))
        assert ids(s) == [["dep", "m"]]

    def test_requirement_closure_is_paid_for(self):
        cat = catalogue(
            ["A"],
            entry("good", 2, requires=(("tax",),), eff={("A", "C"): "High"}),
            entry("tax", 2),
            entry("meh", 3, eff={("A", "C"): "Medium"}),
        )
        # within 3: good+tax costs 4, unaffordable; meh wins
        s = solve_case(cat, Budget(Decimal(3)), self.prof(), one_case(cat))
        assert ids(s) == [["meh"]]
        # within 4: good+tax beats meh
        s = solve_case(cat, Budget(Decimal(4)), self.prof(), one_case(cat))
        assert ids(s) == [["good", "tax"]]

    def test_zero_cost_irrelevant_control_excluded_and_noted(self):
        cat = catalogue(
            ["A"],
            entry("x", 1, eff={("A", "C"): "Medium"}),
            entry("noise", 0),
        )
        outcome = solve(cat, Budget(Decimal(5)), self.prof())
        (solution,) = outcome.results
        assert ids(solution) == [["x"]]
        assert outcome.stats.zero_cost_excluded == ("noise",)

    def test_deep_requirement_chain(self):
        cat = catalogue(
            ["A"],
            entry("a", 1, requires=(("b",),), eff={("A", "C"): "High"}),
            entry("b", 1, requires=(("c",),)),
            entry("c", 1),
        )
        s = solve_case(cat, Budget(Decimal(3)), self.prof(), one_case(cat))
        assert ids(s) == [["a", "b", "c"]]

    def test_lex_order_prefers_earlier_tier(self):
        # t wins tier 1 but loses tier 2; the lexicographic order must
        # still prefer it.
        cat = catalogue(
            ["A"],
            entry("t", 2, eff={("A", "C"): "High"}),
            entry("u", 2, eff={("A", "C"): "Medium", ("A", "I"): "VeryHigh"}),
        )
        p = profile([("A", "C")], [("A", "I")])
        s = solve_case(cat, Budget(Decimal(2)), p, one_case(cat))
        assert ids(s) == [["t"]]
        assert s.tier_scores == (Fraction(4, 5), Fraction(0))


class TestFigureTwoShape:
    """Frozen instance reproducing the tiered filtering cascade 8 -> 4 -> 2."""

    def build(self):
        cat = catalogue(
            ["Sensor", "Actuator"],
            entry("X", 1, eff={("Sensor", "I"): "High"}),
            entry("U", 2, eff={("Sensor", "C"): "Medium"}),
            entry("V", 2, eff={("Actuator", "C"): "Medium"}),
            entry("D", 4, eff={("Sensor", "I"): "High"}),
        )
        p = profile(
            [("Sensor", "I"), ("Actuator", "I")],
            [("Sensor", "C"), ("Actuator", "C")],
        )
        return cat, Budget(Decimal(4)), p

    def derive(self, cat, budget, p, case):
        """Independent enumeration of the cascade."""
        all_ids = [c.id for c in cat.controls]
        valid = [
            frozenset(combo)
            for r in range(len(all_ids) + 1)
            for combo in itertools.combinations(all_ids, r)
            if cost(frozenset(combo), cat) <= budget.limit
        ]
        stages = [valid]
        for t in p.tiers:
            current = stages[-1]
            best = max(tier_score(c, t, case, cat) for c in current)
            stages.append([c for c in current if tier_score(c, t, case, cat) == best])
        return stages

    def test_cascade_counts_and_ties(self):
        cat, budget, p = self.build()
        case = one_case(cat)
        stages = self.derive(cat, budget, p, case)
        assert [len(s) for s in stages] == [8, 4, 2]

        s = solve_case(cat, budget, p, case)
        assert set(s.combos) == set(stages[-1])
        assert ids(s) == [["U", "X"], ["V", "X"]]
        assert s.tier_scores == (Fraction(4, 5), Fraction(1, 2))
        assert s.cost == 3
        o = brute_force_solve_case(cat, budget, p, case)
        assert set(o.combos) == set(s.combos)


class TestUncertaintyAcrossCases:
    def test_flip_between_cases_differs_by_one_control(self):
        # A binary uncertain cell on the targeted objective swaps the
        # optimum between two combinations that differ by one control.
        cat = catalogue(
            ["A"],
            entry("g", 3, eff={("A", "I"): "High|Low"}),
            entry("h", 3, eff={("A", "I"): "Medium"}),
        )
        p = profile([("A", "I")])
        outcome = solve(cat, Budget(Decimal(3)), p)
        first, second = outcome.results
        assert ids(first) == [["g"]]      # High beats Medium
        assert ids(second) == [["h"]]     # Low loses to Medium
        sym_diff = set(first.combos[0]) ^ set(second.combos[0])
        assert sym_diff == {"g", "h"}

    def test_irrelevant_uncertainty_gives_identical_solutions(self):
        cat = catalogue(
            ["A"],
            entry("x", 1, eff={("A", "C"): "Medium"}),
            entry("odd", 1, eff={("A", "I"): "Low|High"}),
        )
        p = profile([("A", "C")])
        outcome = solve(cat, Budget(Decimal(5)), p)
        assert len(outcome.results) == 2
        a, b = outcome.results
        assert (a.combos, a.tier_scores, a.cost) == (b.combos, b.tier_scores, b.cost)

    def test_no_uncertainty_single_case(self):
        cat = catalogue(["A"], entry("x", 1, eff={("A", "C"): "Low"}))
        outcome = solve(cat, Budget(Decimal(1)), profile([("A", "C")]))
        assert len(outcome.results) == 1

    def test_infeasible_recorded_per_case(self):
        cat = catalogue(
            ["A"],
            entry("m", 9, True),
            entry("odd", 1, eff={("A", "I"): "Low|High"}),
        )
        outcome = solve(cat, Budget(Decimal(5)), profile([("A", "C")]))
        assert len(outcome.results) == 2
        assert all(isinstance(r, InfeasibleCase) for r in outcome.results)


class TestDeterminismAndThreads:
    def test_thread_counts_agree(self):
        rng = random.Random(77)
        cat, budget, p = random_instance(rng, max_optional=9)
        serial = solve(cat, budget, p, threads=1)
        threaded = solve(cat, budget, p, threads=4)
        assert serial.results == threaded.results

    def test_repeat_runs_identical(self):
        rng = random.Random(78)
        cat, budget, p = random_instance(rng, max_optional=9)
        assert solve(cat, budget, p).results == solve(cat, budget, p).results


class TestOracle:
    def test_too_large(self):
        entries = [entry(f"c{i}", 1, eff={("A", "C"): "Low"}) for i in range(21)]
        cat = catalogue(["A"], *entries)
        with pytest.raises(TooLargeForOracle):
            brute_force_solve_case(cat, Budget(Decimal(5)), profile([("A", "C")]), one_case(cat))

    def test_zero_optional_returns_mandatory_closure(self):
        cat = catalogue(["A"], entry("m", 2, True, requires=(("n",),)), entry("n", 1, True))
        s = brute_force_solve_case(cat, Budget(Decimal(3)), profile([("A", "C")]), one_case(cat))
        assert ids(s) == [["m", "n"]]

    def test_matches_solver_on_random_instances(self):
        rng = random.Random(424242)
        checked = 0
        for _ in range(60):
            cat, budget, p = random_instance(rng)
            for case in enumerate_cases(cat):
                solver_exc = oracle_exc = None
                solver_sol = oracle_sol = None
                try:
                    solver_sol = solve_case(cat, budget, p, case)
                except NoFeasibleCombination as exc:
                    solver_exc = exc
                try:
                    oracle_sol = brute_force_solve_case(cat, budget, p, case)
                except NoFeasibleCombination as exc:
                    oracle_exc = exc
                assert (solver_exc is None) == (oracle_exc is None)
                if solver_sol is not None:
                    assert set(solver_sol.combos) == set(oracle_sol.combos)
                    assert solver_sol.tier_scores == oracle_sol.tier_scores
                    assert solver_sol.cost == oracle_sol.cost
                checked += 1
        assert checked >= 60


class TestSoundness:
    def test_returned_combos_satisfy_all_constraints(self):
        from ctrlgame.algebra import satisfies_requirements

        rng = random.Random(99)
        for _ in range(40):
            cat, budget, p = random_instance(rng, max_optional=8)
            mandatory = set(cat.mandatory_ids)
            for case in enumerate_cases(cat):
                try:
                    s = solve_case(cat, budget, p, case)
                except NoFeasibleCombination:
                    continue
                for combo in s.combos:
                    assert mandatory <= combo
                    assert satisfies_requirements(combo, cat.rules)
                    assert cost(combo, cat) <= budget.limit
                    assert cost(combo, cat) == s.cost
                    for t, expected in zip(p.tiers, s.tier_scores):
                        assert tier_score(combo, t, case, cat) == expected

    def test_root_bound_dominates_true_best_tier_one(self):
        # Optimistic bound safety: adding every remaining control can only
        # overestimate the best achievable first-tier score.
        from ctrlgame.solver import _build_context, _Search, _vector_from_gaps

        rng = random.Random(100)
        for _ in range(25):
            cat, budget, p = random_instance(rng, max_optional=7)
            case = enumerate_cases(cat)[0]
            ctx = _build_context(cat, budget, p, case)
            if ctx.base_cost > budget.limit:
                continue
            search = _Search(ctx)
            gaps = [Fraction(1)] * len(ctx.targets)
            for cid in ctx.base | ctx.relevant_optional:
                for i, v in enumerate(ctx.values[cid]):
                    if v:
                        gaps[i] *= 1 - v
            root_bound = _vector_from_gaps(ctx, gaps)[0]
            best = brute_force_solve_case(cat, budget, p, case)
            assert root_bound >= best.tier_scores[0]


class TestValidateProfile:
    def test_unknown_asset(self):
        cat = catalogue(["A"], entry("x", 1))
        with pytest.raises(ValueError):
            solve(cat, Budget(Decimal(1)), profile([("B", "C")]))

    def test_unknown_objective(self):
        cat = catalogue(["A"], entry("x", 1))
        with pytest.raises(ValueError):
            solve(cat, Budget(Decimal(1)), AttackerProfile((tier(ObjectiveRef("A", "Z")),)))
