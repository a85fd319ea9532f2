"""One particle filter, stepped by hand.

A walker heads east along the south sidewalk of a canyon while the inertial
velocity carries a slow heading drift. The map keeps particles out of
buildings; every few steps a noisy GNSS fix nudges the population.

    python demos/02_filter_step.py
"""

import numpy as np

from canyonpf import FilterConfig, GnssFix, ParticleFilter, builtin_scenario, simulate

sc = builtin_scenario("straight_canyon", seed=1)
trace = simulate(sc)
pf = ParticleFilter(sc.map, trace.truth[0], config=FilterConfig(seed=1), timestamp=trace.times[0])

fixes = {round(f.timestamp, 6): f for f in trace.fixes}
fix_times = np.array(sorted(fixes))
for i in range(1, len(trace.times)):
    t = trace.times[i]
    # hand the filter the most recent fix that arrived since the last footstep
    new = fix_times[(fix_times > trace.times[i - 1]) & (fix_times <= t)]
    fix: GnssFix | None = fixes[new[-1]] if len(new) else None
    est = pf.update(trace.velocities[i], t, fix)
    if i % 40 == 0:
        err = np.hypot(*(est.position - trace.truth[i]))
        print(f"t = {t:6.1f} s  error {err:5.2f} m  drift estimate {np.degrees(est.mean_theta):6.2f} deg  "
              f"ESS {est.effective_sample_size:5.1f}  fix {'yes' if fix else 'no'}")

inside = sc.map.inside_obstacle(pf.particles.xy).sum()
print(f"particles inside buildings after the last step: {inside}")
