"""Control family terms: build them, flatten them, relate them.

A family term describes a whole space of control combinations. ``choice``
offers alternatives, ``compose`` joins sides, ``opt`` makes controls
optional. Normalization flattens any term into a set of combinations
(each a set of control ids), where every algebraic question becomes a
set question.
"""

from ctrlgame import (
    Atom,
    RequirementRule,
    choice,
    compose,
    normalize,
    opt,
    refines,
    satisfies_requirements,
)
from ctrlgame.algebra import combination_bound


def show(label, term):
    combos = sorted(sorted(c) for c in normalize(term).combos)
    print(f"{label:>28}: {combos}")


print("-- building blocks --")
show("a single control", Atom("AC-7"))
show("either of two", choice(Atom("AC-7"), Atom("SC-8")))
show("both together", compose(Atom("AC-7"), Atom("SC-8")))
show("one optional control", opt(["AU-2"]))
show("mandatory plus optionals", compose(Atom("SC-8"), opt(["AU-2", "AU-3"])))

print()
print("-- the space grows fast --")
big = opt([f"C-{i}" for i in range(39)])
print(f"39 optional controls expand to {combination_bound(big):,} combinations,")
print("which is why the solver never materializes them.")

print()
print("-- refinement and requirements --")
audit = RequirementRule("AU-12", frozenset({"AU-1", "AU-2", "AU-3"}))
print("{AC-7, SC-8} refines {SC-8}:", refines(frozenset({"AC-7", "SC-8"}), frozenset({"SC-8"})))
print(
    "{AU-12, AU-1} satisfies the audit rule:",
    satisfies_requirements(frozenset({"AU-12", "AU-1"}), [audit]),
)
print(
    "{AU-12, AU-1, AU-2, AU-3} satisfies it:",
    satisfies_requirements(frozenset({"AU-12", "AU-1", "AU-2", "AU-3"}), [audit]),
)
