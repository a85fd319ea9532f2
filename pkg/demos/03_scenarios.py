"""The built-in scenarios and the synthetic data they produce.

Each scenario bundles a local map, a waypoint walk, an inertial drift model
and a GNSS error model. This script prints a one-line profile of each.

    python demos/03_scenarios.py
"""

import numpy as np

from canyonpf.simulate import SCENARIOS, builtin_scenario, outage_fraction, simulate

print(f"{'scenario':<16}{'length':>9}{'steps':>7}{'fixes':>7}{'outage':>8}{'raw GNSS median':>17}")
for name in sorted(SCENARIOS):
    sc = builtin_scenario(name, seed=0)
    tr = simulate(sc)
    t = np.array([f.timestamp for f in tr.fixes])
    if len(t):
        pos = np.array([f.position for f in tr.fixes])
        truth = np.column_stack([np.interp(t, tr.times, tr.truth[:, k]) for k in (0, 1)])
        med = f"{np.median(np.hypot(*(pos - truth).T)):.1f} m"
    else:
        med = "n/a"
    share = outage_fraction(sc.gnss, tr.times[0], tr.times[-1])
    print(f"{name:<16}{sc.path.length:>8.0f}m{len(tr.times):>7}{len(tr.fixes):>7}{share:>8.0%}{med:>17}")
