import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canyonpf.geomap import SurfaceLabel, street_directions
from canyonpf.metrics import along_across_error
from canyonpf.simulate import (SCENARIOS, GnssNoiseModel, ImuDriftModel, WaypointPath, builtin_scenario,
                               generate_ground_truth, outage_fraction, simulate, synthesize_gnss,
                               synthesize_velocity, with_overrides)

QUIET = ImuDriftModel(heading_drift_rate=0.0, velocity_noise_sigma=0.0)


def test_ground_truth_straight():
    t, xy, taps = generate_ground_truth(WaypointPath([[0, 0], [10, 0]], step_length=1.0))
    assert len(xy) == 11
    np.testing.assert_allclose(xy[:, 0], np.arange(11))
    np.testing.assert_allclose(taps, [0.0, t[-1]])


def test_ground_truth_partial_step_snaps():
    _, xy, _ = generate_ground_truth(WaypointPath([[0, 0], [0, 3]], step_length=2.0))
    np.testing.assert_allclose(xy, [[0, 0], [0, 2], [0, 3]])


def test_ground_truth_l_path_counts_and_taps():
    t, xy, taps = generate_ground_truth(WaypointPath([[0, 0], [4, 0], [4, 4]], step_length=1.0, cadence=2.0))
    assert len(xy) == 9
    np.testing.assert_allclose(taps, [0.0, 2.0, 4.0])
    np.testing.assert_allclose(xy[[0, 4, 8]], [[0, 0], [4, 0], [4, 4]])
    np.testing.assert_allclose(np.diff(t), 0.5)


@pytest.mark.parametrize("bad", [dict(waypoints=[[0, 0]]), dict(waypoints=[[0, 0], [0, 0]]),
                                 dict(waypoints=[[0, 0], [1, 0]], step_length=0.0)])
def test_waypoint_path_validation(bad):
    with pytest.raises(ValueError):
        WaypointPath(**bad)


@settings(max_examples=50, deadline=None)
@given(pts=st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=2, max_size=6),
       step=st.floats(0.3, 2.0))
def test_zero_drift_velocity_integrates_to_truth(pts, step):
    wp = np.array(pts)
    if (np.hypot(*np.diff(wp, axis=0).T) < 1e-3).any():
        return
    times, truth, _ = generate_ground_truth(WaypointPath(wp, step_length=step))
    vel = synthesize_velocity(times, truth, QUIET)
    assert np.all(vel[0] == 0)
    rebuilt = truth[0] + np.vstack([[0, 0], np.cumsum(vel[1:] * np.diff(times)[:, None], axis=0)])
    np.testing.assert_allclose(rebuilt, truth, atol=1e-9)


def test_drift_rotation_quarter_turn():
    times = np.array([0.0, 1.0, 2.0])
    truth = np.array([[0, 0], [1, 0], [2, 0]], dtype=float)
    rate = (math.pi / 2) / 2.0  # 90 degrees at t = 2
    vel = synthesize_velocity(times, truth, ImuDriftModel(rate, 0.0))
    np.testing.assert_allclose(vel[2], [0, 1], atol=1e-12)


def test_drift_rotation_oracle():
    times = np.array([9.0, 10.0])
    truth = np.array([[0, 0], [1.4, 0]])
    vel = synthesize_velocity(times, truth, ImuDriftModel(0.01, 0.0))
    np.testing.assert_allclose(vel[1], [1.4 * math.cos(0.1), 1.4 * math.sin(0.1)], atol=1e-12)
    np.testing.assert_allclose(vel[1], [1.3930, 0.1398], atol=1e-4)


def test_speed_scale_multiplies_speed():
    times = np.array([0.0, 1.0])
    truth = np.array([[0, 0], [1.0, 0]])
    vel = synthesize_velocity(times, truth, ImuDriftModel(0.0, 0.0, speed_scale=1.1))
    np.testing.assert_allclose(vel[1], [1.1, 0])


def _straight(across_bias=0.0, **kw):
    sc = builtin_scenario("straight_canyon")
    return sc, GnssNoiseModel(along_sigma=0.0, across_sigma=0.0, across_bias=across_bias, **kw)


def test_noiseless_gnss_equals_truth_at_ticks():
    sc, model = _straight()
    times, truth, _ = generate_ground_truth(sc.path)
    fixes = synthesize_gnss(times, truth, sc.map, model)
    assert len(fixes) == int(times[-1] // 1.0) + 1
    for f in fixes:
        want = [np.interp(f.timestamp, times, truth[:, 0]), np.interp(f.timestamp, times, truth[:, 1])]
        np.testing.assert_allclose(f.position, want, atol=1e-12)


def test_total_outage_gives_no_fixes():
    sc, model = _straight(outage_intervals=((0.0, math.inf),))
    times, truth, _ = generate_ground_truth(sc.path)
    assert synthesize_gnss(times, truth, sc.map, model) == []


def test_across_bias_on_east_west_street():
    sc, model = _straight(across_bias=15.0)
    times, truth, _ = generate_ground_truth(sc.path)
    for f in synthesize_gnss(times, truth, sc.map, model):
        true = [np.interp(f.timestamp, times, truth[:, 0]), np.interp(f.timestamp, times, truth[:, 1])]
        np.testing.assert_allclose(f.position - true, [0, 15], atol=1e-9)


def test_gnss_noise_statistics_in_street_frame():
    sc = builtin_scenario("l_corner")
    times, truth, _ = generate_ground_truth(sc.path)
    model = GnssNoiseModel(along_sigma=3.0, across_sigma=7.0, across_bias=0.0, fix_period=0.02, seed=4)
    fixes = synthesize_gnss(times, truth, sc.map, model)
    assert len(fixes) >= 10_000
    t = np.array([f.timestamp for f in fixes])
    true = np.column_stack([np.interp(t, times, truth[:, 0]), np.interp(t, times, truth[:, 1])])
    est = np.array([f.position for f in fixes])
    dirs = street_directions(sc.map, true)
    # signed components via the metrics module's magnitudes plus the sign of the dot products
    along, across = along_across_error(est, true, dirs)
    e = est - true
    s_along = np.sign(np.einsum("ij,ij->i", e, dirs)) * along
    s_across = np.sign(e[:, 1] * dirs[:, 0] - e[:, 0] * dirs[:, 1]) * across
    assert np.std(s_along) == pytest.approx(3.0, rel=0.05)
    assert np.std(s_across) == pytest.approx(7.0, rel=0.05)
    radii = np.array([f.uncertainty_radius for f in fixes])
    assert radii.min() >= 8.0 and radii.max() <= 20.0


def test_gnss_needs_sidewalks():
    from conftest import local_map
    from canyonpf.simulate import rect

    m = local_map(obstacles=[rect(0, 0, 1, 1)])
    with pytest.raises(ValueError):
        synthesize_gnss(np.array([0.0, 1.0]), np.zeros((2, 2)), m, GnssNoiseModel())


def test_straight_canyon_layout():
    sc = builtin_scenario("straight_canyon")
    assert len(sc.map.obstacles) == 2 and len(sc.map.streets) == 1 and len(sc.map.sidewalks) == 2
    assert sc.path.length == pytest.approx(300.0)


def test_covered_hub_outage_share():
    sc = builtin_scenario("covered_hub")
    times, _, _ = generate_ground_truth(sc.path)
    assert outage_fraction(sc.gnss, times[0], times[-1]) >= 0.6


def test_jaywalk_truth_crosses_street():
    sc = builtin_scenario("jaywalk_cross")
    _, truth, _ = generate_ground_truth(sc.path)
    labels = sc.map.classify_points(truth)
    assert (labels == SurfaceLabel.STREET).sum() >= 1


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_truth_stays_on_walkable_ground(name):
    sc = builtin_scenario(name)
    _, truth, _ = generate_ground_truth(sc.path)
    labels = sc.map.classify_points(truth)
    assert not (labels == SurfaceLabel.IMPENETRABLE).any()
    if name != "jaywalk_cross":
        assert (labels == SurfaceLabel.TRAVERSABLE).all()


def test_unknown_scenario():
    with pytest.raises(ValueError, match="unknown scenario"):
        builtin_scenario("downtown")


def test_simulate_is_reproducible():
    a = simulate(builtin_scenario("block_loop", seed=3))
    b = simulate(builtin_scenario("block_loop", seed=3))
    assert np.array_equal(a.velocities, b.velocities)
    assert all(np.array_equal(f.position, g.position) for f, g in zip(a.fixes, b.fixes))
    c = simulate(builtin_scenario("block_loop", seed=4))
    assert not np.array_equal(a.velocities, c.velocities)


def test_trace_shape_invariants():
    tr = simulate(builtin_scenario("covered_hub", seed=1))
    assert len(tr.velocities) == len(tr.times) == len(tr.truth)
    assert np.all(np.diff(tr.times) > 0)
    sc = builtin_scenario("covered_hub", seed=1)
    assert not any(sc.gnss.in_outage(np.array([f.timestamp]))[0] for f in tr.fixes)


def test_overrides_replace_fields():
    sc = with_overrides(builtin_scenario("straight_canyon"), {"heading_drift_rate": 0.005}, {"across_bias": 1.0})
    assert sc.drift.heading_drift_rate == 0.005 and sc.gnss.across_bias == 1.0
