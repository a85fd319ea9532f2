"""GNSS alone, inertial plus map, and the full fusion on the same walk.

Runs the three tracking configurations over the block loop for a handful of
seeds and prints the headline metrics side by side: median and 90th
percentile position error and the share of footsteps placed on the right
sidewalk.

    python demos/04_three_configurations.py
"""

import numpy as np

from canyonpf import FilterConfig, run_session, scenario_session
from canyonpf.runner import MODES

SEEDS = range(5)

rows = {m: [] for m in MODES}
for seed in SEEDS:
    session = scenario_session("block_loop", seed)
    for mode in MODES:
        rows[mode].append(run_session(session, mode, FilterConfig(seed=seed)).summary)

print(f"block_loop, seeds {SEEDS.start}..{SEEDS.stop - 1}")
print(f"{'mode':<16}{'median':>9}{'p90':>9}{'across':>9}{'sidewalk':>10}")
for mode, summaries in rows.items():
    med = np.mean([s.euclidean_median for s in summaries])
    p90 = np.mean([s.euclidean_p90 for s in summaries])
    across = np.mean([s.across_median for s in summaries])
    csa = np.mean([s.correct_sidewalk_proportion for s in summaries])
    print(f"{mode:<16}{med:>8.1f}m{p90:>8.1f}m{across:>8.1f}m{csa:>10.3f}")
