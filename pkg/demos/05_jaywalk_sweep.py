"""How much should the filter trust the street?

The jaywalk weight is the likelihood given to particles standing on the
roadway. At 0 a walker who crosses mid-block is lost; at 1 the street is as
plausible as the sidewalk and the map stops helping. This sweep shows the
sweet spot in between on a walk that crosses once.

    python demos/05_jaywalk_sweep.py
"""

from canyonpf import RunConfig, SweepSpec, sweep

base = RunConfig(mode="ronin_pf", scenario="jaywalk_cross")
table = sweep(SweepSpec("jaywalk_weight", (0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0), replications=10), base)

print(f"{'weight':>7}{'sidewalk':>10}{'median':>9}")
for agg in table.aggregates:
    bar = "#" * round(40 * agg["correct_sidewalk_proportion"])
    print(f"{agg['jaywalk_weight']:>7.1f}{agg['correct_sidewalk_proportion']:>10.3f}"
          f"{agg['euclidean_median']:>8.1f}m  {bar}")
