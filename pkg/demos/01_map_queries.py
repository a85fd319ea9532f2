"""Map queries: surface labels, nearest sidewalk and street direction.

Builds the straight urban canyon used elsewhere in the demos, then asks the
map a few questions a particle filter would ask thousands of times a second.

    python demos/01_map_queries.py
"""

import numpy as np

from canyonpf import builtin_scenario, classify, nearest_sidewalk, street_direction_at

gmap = builtin_scenario("straight_canyon").map
print(f"map: {len(gmap.obstacles)} buildings, {len(gmap.streets)} street, sidewalks {gmap.sidewalk_ids}")
xmin, ymin, xmax, ymax = gmap.bounds
print(f"local extent: x {xmin:.0f}..{xmax:.0f} m, y {ymin:.0f}..{ymax:.0f} m")

# Walk a vertical probe across the canyon and report what lies underneath.
x = 0.5 * (xmin + xmax)
for y in np.linspace(ymin + 1, ymax - 1, 9):
    label = classify(gmap, (x, y))
    sid, foot, dist = nearest_sidewalk(gmap, (x, y))
    print(f"  y = {y:7.2f}  {label.name:<13} nearest sidewalk {sid} at {dist:5.2f} m")

# The along-street direction is what the metrics use to split error in two.
print("street direction at the probe:", street_direction_at(gmap, (x, 0.0)))

# Vectorized classification is the hot path inside the filter.
pts = np.random.default_rng(0).uniform([xmin, ymin], [xmax, ymax], size=(100_000, 2))
counts = np.bincount(gmap.classify_points(pts), minlength=3)
print("labels for 1e5 random points:", dict(zip(["traversable", "street", "impenetrable"], counts.tolist())))
