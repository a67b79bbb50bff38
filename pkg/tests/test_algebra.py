"""Algebraic structure of control family terms and their normal forms."""

import random

import pytest
from hypothesis import given, strategies as st

from ctrlgame.algebra import (
    Atom,
    DEFAULT_EXPANSION_LIMIT,
    NormalFamily,
    ONE,
    RequirementRule,
    ZERO,
    choice,
    combination_bound,
    compose,
    filter_requirements,
    leq,
    normalize,
    opt,
    refines,
    requirement_closure,
    satisfies_requirements,
)
from ctrlgame.errors import DuplicateControl, ExpansionLimitExceeded

from _helpers import random_term


def combos(term):
    return {frozenset(c) for c in normalize(term).combos}


class TestChoice:
    def test_zero_is_identity(self):
        assert combos(choice(Atom("x"), ZERO)) == {frozenset({"x"})}

    def test_idempotent(self):
        assert combos(choice(Atom("x"), Atom("x"))) == {frozenset({"x"})}

    def test_choice_with_one_makes_optional(self):
        assert combos(choice(Atom("x"), ONE)) == {frozenset(), frozenset({"x"})}


class TestCompose:
    def test_one_is_identity(self):
        assert combos(compose(Atom("x"), ONE)) == {frozenset({"x"})}

    def test_zero_annihilates(self):
        assert combos(compose(Atom("x"), ZERO)) == set()

    def test_distributes_over_choice(self):
        term = compose(Atom("a"), choice(Atom("b"), Atom("c")))
        assert combos(term) == {frozenset({"a", "b"}), frozenset({"a", "c"})}


class TestOpt:
    def test_empty_is_one(self):
        assert combos(opt([])) == {frozenset()}

    def test_single(self):
        assert combos(opt(["x"])) == {frozenset(), frozenset({"x"})}

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateControl):
            opt(["x", "x"])

    def test_bound_counts_without_materializing(self):
        term = opt([f"c{i}" for i in range(39)])
        assert combination_bound(term) == 2**39

    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
    def test_power_set_cardinality(self, n):
        ids = [f"c{i}" for i in range(n)]
        assert len(normalize(opt(ids))) == 2**n


class TestNormalize:
    def test_zero(self):
        assert combos(ZERO) == set()

    def test_atom_with_optional(self):
        term = compose(Atom("a"), opt(["b"]))
        assert combos(term) == {frozenset({"a"}), frozenset({"a", "b"})}

    def test_two_opts_expand_to_eight(self):
        # Subsets of {a, b} crossed with subsets of {c}: all 8 subsets of
        # {a, b, c}, enumerated by hand.
        term = compose(opt(["a", "b"]), opt(["c"]))
        expected = {
            frozenset(), frozenset("a"), frozenset("b"), frozenset("c"),
            frozenset("ab"), frozenset("ac"), frozenset("bc"), frozenset("abc"),
        }
        assert combos(term) == expected

    def test_expansion_limit(self):
        big = opt([f"c{i}" for i in range(21)])
        with pytest.raises(ExpansionLimitExceeded):
            normalize(big)
        assert combination_bound(big) == 2**21 > DEFAULT_EXPANSION_LIMIT

    def test_custom_limit(self):
        with pytest.raises(ExpansionLimitExceeded):
            normalize(opt(["a", "b", "c"]), limit=7)


class TestOrdering:
    def test_empty_family_below_everything(self):
        rng = random.Random(0)
        for _ in range(25):
            fam = normalize(random_term(rng))
            assert leq(NormalFamily(frozenset()), fam)

    def test_subset(self):
        fa = NormalFamily(frozenset({frozenset("a")}))
        fab = NormalFamily(frozenset({frozenset("a"), frozenset("b")}))
        assert leq(fa, fab)
        assert not leq(fab, fa)

    def test_not_leq(self):
        f1 = NormalFamily(frozenset({frozenset("ab")}))
        f2 = NormalFamily(frozenset({frozenset("a")}))
        assert not leq(f1, f2)

    def test_antisymmetry(self):
        rng = random.Random(1)
        for _ in range(50):
            a = normalize(random_term(rng))
            b = normalize(random_term(rng))
            if leq(a, b) and leq(b, a):
                assert a == b


class TestRefines:
    def test_superset_refines(self):
        assert refines(frozenset("ab"), frozenset("a"))
        assert not refines(frozenset("a"), frozenset("ab"))

    def test_everything_refines_empty(self):
        assert refines(frozenset("xyz"), frozenset())
        assert refines(frozenset(), frozenset())

    @given(
        st.frozensets(st.sampled_from("abcde")),
        st.frozensets(st.sampled_from("abcde")),
        st.frozensets(st.sampled_from("abcde")),
    )
    def test_preorder(self, c1, c2, c3):
        assert refines(c1, c1)
        if refines(c1, c2) and refines(c2, c3):
            assert refines(c1, c3)


AUDIT_RULE = RequirementRule("AU-12", frozenset({"AU-1", "AU-2", "AU-3"}))


class TestRequirements:
    def test_missing_consequent_fails(self):
        combo = frozenset({"AU-12", "AU-1", "AU-2"})
        assert not satisfies_requirements(combo, [AUDIT_RULE])

    def test_vacuous_when_antecedent_absent(self):
        assert satisfies_requirements(frozenset({"AU-1"}), [AUDIT_RULE])

    def test_full_consequent_passes(self):
        combo = frozenset({"AU-12", "AU-1", "AU-2", "AU-3"})
        assert satisfies_requirements(combo, [AUDIT_RULE])

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            RequirementRule("a", frozenset())
        with pytest.raises(ValueError):
            RequirementRule("a", frozenset({"a", "b"}))

    def test_cyclic_rules_are_legal(self):
        rules = [
            RequirementRule("a", frozenset({"b"})),
            RequirementRule("b", frozenset({"a"})),
        ]
        assert satisfies_requirements(frozenset("ab"), rules)
        assert not satisfies_requirements(frozenset("a"), rules)
        assert requirement_closure({"a"}, rules) == frozenset("ab")

    def test_closure_transitive(self):
        rules = [
            RequirementRule("a", frozenset({"b"})),
            RequirementRule("b", frozenset({"c", "d"})),
        ]
        assert requirement_closure({"a"}, rules) == frozenset("abcd")

    def test_filter_idempotent_and_monotone(self):
        rng = random.Random(2)
        atoms = list("abcd")
        for _ in range(50):
            fam = normalize(random_term(rng))
            rules = []
            for _ in range(rng.randint(0, 3)):
                ant = rng.choice(atoms)
                cons = frozenset(rng.sample([x for x in atoms if x != ant], rng.randint(1, 2)))
                rules.append(RequirementRule(ant, cons))
            once = filter_requirements(fam, rules)
            twice = filter_requirements(once, rules)
            assert once == twice
            # Dropping combos never un-satisfies a survivor.
            assert once.combos <= fam.combos
            for combo in once.combos:
                assert satisfies_requirements(combo, rules)


class TestSemiringLaws:
    """Spot checks; the acceptance suite runs the full randomized sweep."""

    def test_laws_on_random_triples(self):
        rng = random.Random(3)
        for _ in range(150):
            a, b, c = (random_term(rng) for _ in range(3))
            na, nb, nc = (normalize(t).combos for t in (a, b, c))
            assert normalize(choice(a, b)).combos == normalize(choice(b, a)).combos
            assert (
                normalize(choice(choice(a, b), c)).combos
                == normalize(choice(a, choice(b, c))).combos
            )
            assert normalize(choice(a, a)).combos == na
            assert normalize(compose(a, b)).combos == normalize(compose(b, a)).combos
            assert (
                normalize(compose(compose(a, b), c)).combos
                == normalize(compose(a, compose(b, c))).combos
            )
            assert (
                normalize(compose(a, choice(b, c))).combos
                == normalize(choice(compose(a, b), compose(a, c))).combos
            )
            assert normalize(choice(a, ZERO)).combos == na
            assert normalize(compose(a, ZERO)).combos == frozenset()
            assert normalize(compose(a, ONE)).combos == na
