"""Load a control catalogue and inspect its uncertainty cases.

The sensors fixture carries 47 controls (8 mandatory), their costs and
dependencies, and one cell where the analyst could not decide between
two ratings. Every resolution of the undecided cells is a case, and the
game is played once per case.
"""

from pathlib import Path

from ctrlgame import enumerate_cases, family_of, parse_catalogue
from ctrlgame.algebra import combination_bound

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "ravenclaw_sensors.csv"

cat = parse_catalogue(FIXTURE.read_text(), "csv")
print(f"assets:     {', '.join(cat.assets)}")
print(f"controls:   {len(cat.controls)} ({len(cat.mandatory_ids)} mandatory)")
print(f"rules:      {len(cat.rules)} dependency rules")
print(f"family:     {combination_bound(family_of(cat)):,} possible combinations")
print(f"digest:     {cat.digest()[:16]}…")

print()
print("uncertain cells and the cases they induce:")
for control_id, ref, cell in cat.uncertain_cells():
    options = " or ".join(r.label for r in cell.options)
    print(f"  {control_id} @ {ref}: {options}")
for case in enumerate_cases(cat):
    picks = ", ".join(f"{cid}@{ref}={r.label}" for cid, ref, r in case.assignment)
    print(f"  case {case.index}: {picks}")
