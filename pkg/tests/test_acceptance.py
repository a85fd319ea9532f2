"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Scenario-level criteria use 20 seeds (0..19). Seed ``s`` drives both the
scenario noise and the filter. Medians over several runs are pooled: all
footsteps of all runs go into one sample.
"""

import gc
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy import stats

from canyonpf import filter as pf
from canyonpf.filter import FilterConfig, GnssFix, VelocitySample
from canyonpf.metrics import along_across_error, euclidean_error
from canyonpf.runner import (RunConfig, SweepSpec, dead_reckoning_track, export_scenario, filter_track,
                             load_session, run_session, scenario_session, sweep)
from canyonpf.simulate import SCENARIOS, CityGrid, _make_map, builtin_scenario, outage_fraction, rect

from conftest import ACCEPTANCE_LINES, local_map

SEEDS = range(20)
TARGET_GNSS_MEDIAN = 13.6
CALIBRATION_TOL = 0.15  # relative band around the target gnss_only median


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@lru_cache(maxsize=None)
def session(name, seed, drift=None, gnss=None):
    return scenario_session(name, seed, dict(drift) if drift else None, dict(gnss) if gnss else None)


@lru_cache(maxsize=None)
def result(name, seed, mode, drift=None, gnss=None):
    return run_session(session(name, seed, drift, gnss), mode, FilterConfig(seed=seed))


def pooled(name, mode, field, drift=None, gnss=None):
    return np.concatenate([[getattr(e, field) for e in result(name, s, mode, drift, gnss).evals]
                           for s in SEEDS])


def test_criterion_01_pythagorean_identity():
    rng = np.random.default_rng(2024)
    n = 100_000
    est = rng.uniform(-500, 500, size=(n, 2))
    truth = rng.uniform(-500, 500, size=(n, 2))
    ang = rng.uniform(0, 2 * np.pi, n)
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    t0 = time.perf_counter()
    along, across = along_across_error(est, truth, dirs)
    euc = euclidean_error(est, truth)
    elapsed = time.perf_counter() - t0
    rel = np.abs(along**2 + across**2 - euc**2) / np.maximum(euc**2, 1e-300)
    ok = rel.max() < 1e-6 and elapsed < 1.0
    report(1, "along^2 + across^2 = euclidean^2", ok, f"max rel err {rel.max():.2e}, {elapsed * 1e3:.1f} ms")


def test_criterion_02_resampler_correctness():
    rng = np.random.default_rng(7)
    n, runs = 10, 10_000
    w = rng.dirichlet(np.ones(n))
    w[[3, 7]] = 0.0
    w /= w.sum()
    counts = np.zeros(n)
    for _ in range(runs):
        counts += np.bincount(pf.systematic_resample(w, rng), minlength=n)
    live = w > 0
    p = stats.chisquare(counts[live], runs * n * w[live]).pvalue
    zero_hits = int(counts[~live].sum())
    report(2, "systematic resampler chi-square and zero-weight exclusion", p > 0.01 and zero_hits == 0,
           f"p = {p:.3f}, zero-weight selections {zero_hits}")


def test_criterion_03_building_exclusion():
    bad, steps = 0, 0
    for name in SCENARIOS:
        s = session(name, 0)
        for use_gnss in (False, True):
            _, _, _, hist = filter_track(s, FilterConfig(seed=0), use_gnss, keep_particles=True)
            for xy in hist[1:]:  # every post-resample set
                assert len(xy) == 500
                bad += int(s.map.inside_obstacle(xy).sum())
                steps += 1
    report(3, "no particle inside a building after any resample", bad == 0,
           f"{bad} violations over {steps} steps, 5 scenarios x 2 filter modes")


def test_criterion_04_dead_reckoning_reduction():
    cfg = FilterConfig(pos_noise_sigma=0.0, theta_noise_sigma=0.0, init_pos_sigma=0.0, init_theta_sigma=0.0)
    m = local_map(sidewalks=[("S", rect(-1, -1, 1, 1), 0.0)])
    rng = np.random.default_rng(3)
    pset = pf.init([0.0, 0.0], 0.0, cfg)
    total = np.zeros(2)
    worst = 0.0
    for k in range(1000):
        v, dt = rng.normal(0, 1.5, size=2), float(rng.uniform(0.3, 0.9))
        pset, est = pf.step(pset, VelocitySample(v, float(k)), dt, None, m, cfg)
        total = total + v * dt
        worst = max(worst, float(np.hypot(*(est.position - total))))
    report(4, "zero-noise filter equals cumulative v*dt", worst <= 1e-9, f"max deviation {worst:.2e} m over 1000 steps")


def test_criterion_05_drift_recovery():
    drift = (("heading_drift_rate", 0.005),)
    theta_err, ratios = [], []
    for seed in SEEDS:
        s = session("straight_canyon", seed, drift)
        r = result("straight_canyon", seed, "ronin_pf", drift)
        injected = 0.005 * s.footstep_times[-1]
        theta_err.append(abs(r.thetas[-1] + injected) / injected)
        dr = np.median(euclidean_error(dead_reckoning_track(s), r.truth))
        ratios.append(r.summary.euclidean_median / dr)
    ok = max(theta_err) <= 0.2 and max(ratios) < 0.25
    report(5, "drift recovery on straight_canyon at 0.005 rad/s", ok,
           f"worst |theta_end + drift| / drift {max(theta_err):.3f}, worst median/DR-median {max(ratios):.3f}")


def test_criterion_06_configuration_ordering():
    gnss_med = float(np.median(pooled("block_loop", "gnss_only", "euclidean")))
    csa = {m: float(np.mean([result("block_loop", s, m).summary.correct_sidewalk_proportion for s in SEEDS]))
           for m in ("gnss_only", "ronin_pf", "gnss_ronin_pf")}
    calibrated = abs(gnss_med - TARGET_GNSS_MEDIAN) <= CALIBRATION_TOL * TARGET_GNSS_MEDIAN
    ordered = csa["gnss_only"] < csa["ronin_pf"] < csa["gnss_ronin_pf"]
    gap = csa["gnss_ronin_pf"] - csa["gnss_only"]
    report(6, "sidewalk assignment ordering on block_loop", calibrated and ordered and gap >= 0.15,
           f"gnss_only median {gnss_med:.1f} m; CSA {csa['gnss_only']:.3f} < {csa['ronin_pf']:.3f} "
           f"< {csa['gnss_ronin_pf']:.3f}, gap {gap:.3f}")


def test_criterion_07_jaywalk_non_monotone():
    base = RunConfig(mode="ronin_pf", scenario="jaywalk_cross")
    table = sweep(SweepSpec("jaywalk_weight", (0.0, 0.4, 1.0), replications=20), base)
    csa = {a["jaywalk_weight"]: a["correct_sidewalk_proportion"] for a in table.aggregates}
    ok = csa[0.4] > csa[0.0] and csa[0.4] > csa[1.0]
    report(7, "jaywalk weight 0.4 beats 0 and 1", ok,
           f"w=0: {csa[0.0]:.3f}, w=0.4: {csa[0.4]:.3f}, w=1: {csa[1.0]:.3f}")


def test_criterion_08_across_along_asymmetry():
    g = builtin_scenario("straight_canyon").gnss
    assert g.across_sigma == 2 * g.along_sigma and g.across_bias > 0
    gnss_across = float(np.median(pooled("straight_canyon", "gnss_only", "across")))
    gnss_along = float(np.median(pooled("straight_canyon", "gnss_only", "along")))
    fused_across = float(np.median(pooled("straight_canyon", "gnss_ronin_pf", "across")))
    ok = fused_across < 0.5 * gnss_across and gnss_across > gnss_along
    report(8, "fusion halves across-street error; GNSS worse across than along", ok,
           f"fusion across {fused_across:.2f} m vs GNSS across {gnss_across:.2f} m, GNSS along {gnss_along:.2f} m")


def test_criterion_09_outage_robustness():
    sc = builtin_scenario("covered_hub")
    s = session("covered_hub", 0)
    share = outage_fraction(sc.gnss, s.footstep_times[0], s.footstep_times[-1])
    gnss = float(np.median(pooled("covered_hub", "gnss_only", "euclidean")))
    fused = float(np.median(pooled("covered_hub", "gnss_ronin_pf", "euclidean")))
    report(9, "fusion beats GNSS through a long outage", share >= 0.6 and fused < gnss,
           f"outage {share:.0%}, fusion median {fused:.1f} m vs GNSS {gnss:.1f} m")


def test_criterion_10_determinism_round_trip(tmp_path):
    mismatches = []
    for name in ("block_loop", "covered_hub"):
        seed = 5
        trace, gmap = export_scenario(name, tmp_path / name, seed)
        disk = load_session(RunConfig(trace=str(trace), map=str(gmap)))
        mem = scenario_session(name, seed)
        for mode in ("gnss_only", "ronin_pf", "gnss_ronin_pf"):
            a = run_session(mem, mode, FilterConfig(seed=seed)).summary_json()
            b = run_session(disk, mode, FilterConfig(seed=seed)).summary_json()
            if a != b:
                mismatches.append(f"{name}/{mode}")
    report(10, "export -> replay gives bit-identical summary JSON", not mismatches,
           "6 of 6 identical" if not mismatches else "mismatch: " + ", ".join(mismatches))


def _fifty_polygon_map():
    obs, streets, sws = CityGrid(4, 4, 40.0, 40.0).build()
    from canyonpf.geomap import LabeledPolygon, SurfaceLabel

    obs = obs + [LabeledPolygon((rect(-30, -30, -25, -25),), SurfaceLabel.IMPENETRABLE, "kiosk")]
    gmap = _make_map(obs, streets, sws)
    return gmap, CityGrid(4, 4, 40.0, 40.0)


def test_criterion_11_performance():
    gmap, grid = _fifty_polygon_map()
    n_poly = len(gmap.obstacles) + len(gmap.streets)
    assert n_poly == 50
    corners = grid.loop_corners(1, 1)
    cfg = FilterConfig(seed=0)
    pset = pf.init(corners[0], 0.0, cfg)
    legs = np.diff(np.vstack([corners, corners[:1]]), axis=0)
    dirs = legs / np.linalg.norm(legs, axis=1, keepdims=True)
    dt = 1 / 1.75
    leg_steps = (np.linalg.norm(legs, axis=1) / 0.8).astype(int)
    schedule = np.repeat(np.arange(4), leg_steps)
    # warm up allocator and caches
    for k in range(20):
        pset, _ = pf.step(pset, VelocitySample(dirs[0] * 1.4, k * dt), dt, None, gmap, cfg)
    pset = pf.init(corners[0], 0.0, cfg)
    times = []
    gc.disable()  # as timeit does
    t_run = time.perf_counter()
    for k in range(1000):
        v = dirs[schedule[k % len(schedule)]] * 1.4
        fix = GnssFix(pset.anchor + 3.0, 12.0, k * dt) if k % 2 else None
        t0 = time.perf_counter()
        pset, _ = pf.step(pset, VelocitySample(v, k * dt), dt, fix, gmap, cfg)
        times.append(time.perf_counter() - t0)
    run_s = time.perf_counter() - t_run
    gc.enable()
    med_ms = float(np.median(times)) * 1e3
    report(11, "filter step speed at N = 500 on a 50-polygon map", med_ms < 1.0 and run_s < 1.0,
           f"median step {med_ms:.3f} ms, 1000 steps {run_s:.3f} s")
