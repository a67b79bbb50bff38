"""Play the full game on the sensors fixture and print the report.

The attacker profile below goes after sensor confidentiality and
integrity first, availability second. The solver finds the cheapest
combinations with the lexicographically best tier scores, once per
uncertainty case, and the report groups cases that agree.
"""

from decimal import Decimal
from pathlib import Path

from ctrlgame import Budget, build_report, parse_catalogue, profile, render, solve

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "ravenclaw_sensors.csv"
cat = parse_catalogue(FIXTURE.read_text(), "csv")

attacker = profile(
    [("Sensors", "C"), ("Sensors", "I")],
    [("Sensors", "A")],
)
budget = Budget(Decimal(950_000))

outcome = solve(cat, budget, attacker)
print(
    f"solved {len(outcome.results)} case(s) in {outcome.stats.wall_time_s:.2f}s, "
    f"exploring {outcome.stats.nodes_explored} nodes"
)
print()
doc = build_report(outcome, cat, budget, attacker)
print(render(doc, "text").decode())
