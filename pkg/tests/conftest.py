import numpy as np
import pytest

from canyonpf.geomap import (GeoSegmentMap, LabeledPolygon, LocalProjection, SidewalkSegment,
                             SurfaceLabel, bearing_vector)
from canyonpf.simulate import SF_ORIGIN, rect

PROJ = LocalProjection.at(*SF_ORIGIN)


def local_map(obstacles=(), streets=(), sidewalks=(), cell_size=0.5):
    """Map straight from local-frame rings.

    ``obstacles``/``streets`` hold rings (or tuples of rings for holes);
    ``sidewalks`` holds ``(id, ring, bearing_deg)`` triples.
    """

    def poly(r, label):
        rings = r if isinstance(r, tuple) else (r,)
        return LabeledPolygon(rings, label)

    return GeoSegmentMap(
        PROJ,
        [poly(r, SurfaceLabel.IMPENETRABLE) for r in obstacles],
        [poly(r, SurfaceLabel.STREET) for r in streets],
        [SidewalkSegment(i, r, bearing_vector(b)) for i, r, b in sidewalks],
        cell_size=cell_size,
    )


def geo_feature(label, ring_xy, proj=PROJ, **props):
    lon, lat = proj.to_geo(np.asarray(ring_xy, dtype=float))
    return {
        "type": "Feature",
        "properties": {"label": label, **props},
        "geometry": {"type": "Polygon", "coordinates": [[[float(a), float(b)] for a, b in zip(lon, lat)]]},
    }


def collection(*features, origin=SF_ORIGIN):
    doc = {"type": "FeatureCollection", "features": list(features)}
    if origin is not None:
        doc["origin"] = list(origin)
    return doc


def make_corridor_map():
    """Two building rows, a street between sidewalks (the straight-canyon layout in miniature)."""
    return local_map(
        obstacles=[rect(0, -10, 100, 0), rect(0, 26, 100, 36)],
        streets=[rect(0, 4, 100, 22)],
        sidewalks=[("S", rect(0, 0, 100, 4), 0.0), ("N", rect(0, 22, 100, 26), 0.0)],
    )


@pytest.fixture(scope="session")
def corridor_map():
    return make_corridor_map()


# acceptance criteria register one line each; printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
