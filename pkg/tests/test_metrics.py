import csv
import io
import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canyonpf.geomap import GeoSegmentMap, LabeledPolygon, SidewalkSegment
from canyonpf.metrics import (FootstepEval, along_across_error, cdf_csv, cdf_points, euclidean_error,
                              evals_csv, evaluate_track, pooled_proportion, quantile_from_cdf,
                              sidewalk_assignment, summarize, summary_json)
from canyonpf.simulate import rect

from conftest import PROJ, local_map, make_corridor_map

CORRIDOR = make_corridor_map()


def fake_evals(errors, correct=None):
    correct = correct if correct is not None else [True] * len(errors)
    return [FootstepEval(float(i), (0.0, 0.0), (float(e), 0.0), float(e), float(e), 0.0, "a",
                         "a" if c else "b", bool(c)) for i, (e, c) in enumerate(zip(errors, correct))]


def test_euclidean_examples():
    assert euclidean_error([0, 0], [0, 0]) == 0.0
    assert euclidean_error([0, 0], [3, 4]) == 5.0
    assert euclidean_error([1.5, -2], [-0.5, 1]) == pytest.approx(math.sqrt(13))
    assert euclidean_error([1.5, -2], [-0.5, 1]) == pytest.approx(3.6056, abs=1e-4)


@pytest.mark.parametrize("e,d,want", [
    ((3, 4), (1, 0), (3, 4)),
    ((5, 0), (0, 1), (0, 5)),
    ((1, 1), (math.sqrt(2) / 2, math.sqrt(2) / 2), (math.sqrt(2), 0)),
])
def test_along_across_examples(e, d, want):
    along, across = along_across_error(e, (0, 0), d)
    assert along == pytest.approx(want[0], abs=1e-12)
    assert across == pytest.approx(want[1], abs=1e-12)


def test_near_unit_direction_warns_and_far_raises():
    with pytest.warns(RuntimeWarning):
        along, _ = along_across_error((2, 0), (0, 0), (1.0005, 0))
    assert along == pytest.approx(2.0)
    with pytest.raises(ValueError):
        along_across_error((2, 0), (0, 0), (1.1, 0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        along_across_error((2, 0), (0, 0), (1.0, 0))


@settings(max_examples=300)
@given(ex=st.floats(-1e3, 1e3), ey=st.floats(-1e3, 1e3), a=st.floats(0, 2 * math.pi))
def test_pythagorean_identity(ex, ey, a):
    along, across = along_across_error((ex, ey), (0, 0), (math.cos(a), math.sin(a)))
    euc = euclidean_error((ex, ey), (0, 0))
    assert math.isclose(along**2 + across**2, euc**2, rel_tol=1e-6, abs_tol=1e-12)


def test_sidewalk_assignment_cases(corridor_map):
    assert sidewalk_assignment([20, 1], [30, 3], corridor_map) == ("S", "S", True)
    # truth north, estimate across the street nearer the south sidewalk
    a, t, ok = sidewalk_assignment([40, 6], [40, 24], corridor_map)
    assert (a, t, ok) == ("S", "N", False)
    # mid-street but nearer the truth's sidewalk
    assert sidewalk_assignment([40, 19], [40, 24], corridor_map)[2]


def test_summarize_examples():
    s = summarize(fake_evals(range(1, 101)))
    assert s.euclidean_median == pytest.approx(50.5)
    assert s.euclidean_p90 == pytest.approx(90.1)
    assert s.correct_sidewalk_proportion == 1.0
    one = summarize(fake_evals([4.2]))
    assert one.euclidean_mean == one.euclidean_median == one.euclidean_p90 == 4.2
    with pytest.raises(ValueError):
        summarize([])


@settings(max_examples=100)
@given(errs=st.lists(st.floats(0, 500), min_size=1, max_size=200), flags=st.data())
def test_summary_invariants(errs, flags):
    correct = flags.draw(st.lists(st.booleans(), min_size=len(errs), max_size=len(errs)))
    s = summarize(fake_evals(errs, correct))
    assert 0.0 <= s.correct_sidewalk_proportion <= 1.0
    assert s.euclidean_median <= s.euclidean_p90 + 1e-12
    x, f = cdf_points(s)
    assert np.all(np.diff(x) >= 0) and np.all(np.diff(f) > 0) and f[-1] == 1.0
    assert quantile_from_cdf(s, 0.9) == pytest.approx(s.euclidean_p90, rel=1e-12, abs=1e-12)


def _transform_map(gmap, R, t):
    def tf(r):
        return r @ R.T + t

    obs = [LabeledPolygon(tuple(tf(r) for r in p.rings), p.label) for p in gmap.obstacles]
    sts = [LabeledPolygon(tuple(tf(r) for r in p.rings), p.label) for p in gmap.streets]
    sws = [SidewalkSegment(s.id, tf(s.ring), R @ s.street_bearing) for s in gmap.sidewalks]
    return GeoSegmentMap(PROJ, obs, sts, sws)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0, 2 * math.pi), tx=st.floats(-500, 500), ty=st.floats(-500, 500),
       seed=st.integers(0, 1000))
def test_metrics_rigid_invariance(a, tx, ty, seed):
    corridor_map = CORRIDOR
    rng = np.random.default_rng(seed)
    truth = np.column_stack([rng.uniform(0, 100, 50), rng.choice([2.0, 24.0], 50)])
    est = truth + rng.normal(scale=6, size=truth.shape)
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    t = np.array([tx, ty])
    base = summarize(evaluate_track(np.arange(50.0), est, truth, corridor_map))
    moved = summarize(evaluate_track(np.arange(50.0), est @ R.T + t, truth @ R.T + t,
                                     _transform_map(corridor_map, R, t)))
    for k in ("correct_sidewalk_proportion", "euclidean_median", "along_median", "across_median",
              "euclidean_p90", "along_p90", "across_p90"):
        assert getattr(moved, k) == pytest.approx(getattr(base, k), abs=1e-6)


def test_perfect_estimate_gives_full_assignment(corridor_map):
    truth = np.column_stack([np.linspace(1, 99, 30), np.full(30, 2.0)])
    s = summarize(evaluate_track(np.arange(30.0), truth, truth, corridor_map))
    assert s.correct_sidewalk_proportion == 1.0 and s.euclidean_p90 == 0.0


def test_along_direction_uses_truth_sidewalk():
    m = local_map(sidewalks=[("EW", rect(0, 0, 50, 4), 0.0), ("NS", rect(60, 0, 64, 50), 90.0)])
    ev = evaluate_track([0.0], [[62, 40]], [[62, 30]], m)[0]  # truth on NS sidewalk
    assert ev.along == pytest.approx(10.0) and ev.across == pytest.approx(0.0)


def test_pooled_versus_per_path():
    a = fake_evals([1] * 10, [True] * 10)
    b = fake_evals([1] * 2, [False, False])
    assert pooled_proportion([a, b]) == pytest.approx(10 / 12)
    assert pooled_proportion([a, b], per_path=True) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        pooled_proportion([[]])


def test_serialization_formats():
    evals = fake_evals([1.0, 2.0, 3.0], [True, False, True])
    rows = list(csv.DictReader(io.StringIO(evals_csv(evals))))
    assert len(rows) == 3 and rows[1]["correct"] == "0" and float(rows[2]["euclidean"]) == 3.0
    s = summarize(evals)
    lines = cdf_csv(s).strip().splitlines()
    assert lines[0] == "euclidean_error,cdf" and lines[-1].endswith(",1.0")
    doc = json.loads(summary_json(s, mode="x"))
    assert doc["mode"] == "x" and doc["metrics"]["n_footsteps"] == 3
    assert "cdf" not in doc["metrics"]
