"""Exact costs, layered effectiveness, and game-matrix rows.

Effectiveness combines like independent layers: each control covers part
of the remaining gap on a target. Everything is exact rational
arithmetic, so printed values like 0.996 are equalities, not rounding
luck.
"""

from decimal import Decimal
from pathlib import Path

from ctrlgame import Budget, ObjectiveRef, cost, eff, enumerate_cases, game_matrix, parse_catalogue
from ctrlgame.algebra import NormalFamily
from ctrlgame.report import approx_str, exact_str

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "ravenclaw_sensors.csv"
cat = parse_catalogue(FIXTURE.read_text(), "csv")
case_low, case_medium = enumerate_cases(cat)

sample = frozenset(
    "AC-1 AC-2 AC-3 AC-4 AC-5 AC-6 AC-7 AC-12 AC-17 AC-18 AC-23 AC-24 "
    "AU-1 AU-2 AU-3 AU-6 AU-8 AU-10 AU-12 IA-1 IA-2 IA-3 PE-1 PE-3 "
    "SC-5 SC-8 SC-40 SI-4 SI-7".split()
)

print(f"combination of {len(sample)} controls")
print(f"cost: {cost(sample, cat)}")
for obj in ("C", "I", "A"):
    ref = ObjectiveRef("Sensors", obj)
    value = eff(sample, ref, case_medium, cat)
    print(f"eff toward {ref}: {approx_str(value)}  (exactly {exact_str(value)})")

print()
print("same combination in a game matrix next to a smaller one:")
tiny = frozenset({"AC-7", "SC-8"})
family = NormalFamily(frozenset({sample, tiny}))
rows = game_matrix(family, case_medium, cat, Budget(Decimal(10**6)))
refs = cat.objective_refs
print("controls".ljust(12), *(str(r).rjust(11) for r in refs))
for row in rows:
    name = f"{len(row.combo)} controls"
    print(name.ljust(12), *(approx_str(row.payoffs[r]).rjust(11) for r in refs))
