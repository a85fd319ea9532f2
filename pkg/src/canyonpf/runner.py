"""Tracking configurations, evaluation runs and parameter sweeps.

Three tracking modes are supported:

``gnss_only``
    the most recent GNSS fix at each footstep (zero-order hold; footsteps
    before the first fix use the first fix)
``ronin_pf``
    inertial velocities through the map-constrained particle filter
``gnss_ronin_pf``
    the same filter with GNSS reweighting
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from . import filter as pf
from . import metrics
from .filter import FilterConfig, GnssFix, VelocitySample
from .geomap import GeoSegmentMap, load_map, validate_map_document
from .simulate import builtin_scenario, simulate, with_overrides
from .trace_io import ReplaySession, read_trace, trace_records, write_trace

MODES = ("gnss_only", "ronin_pf", "gnss_ronin_pf")


@dataclass(frozen=True)
class RunConfig:
    """One evaluation run.

    Exactly one input source: ``scenario`` or both ``trace`` and ``map``.
    ``seed`` seeds the scenario noise and the filter; ``None`` keeps
    ``filter.seed`` and seed 0 for the scenario.
    """

    mode: str = "gnss_ronin_pf"
    filter: FilterConfig = field(default_factory=FilterConfig)
    scenario: str | None = None
    trace: str | None = None
    map: str | None = None
    output_dir: str | None = None
    seed: int | None = None
    drift_overrides: dict | None = None
    gnss_overrides: dict | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        has_scenario = self.scenario is not None
        has_files = self.trace is not None or self.map is not None
        if has_scenario == has_files:
            raise ValueError("give either a scenario or a trace + map pair")
        if has_files and (self.trace is None or self.map is None):
            raise ValueError("replay needs both a trace and a map")

    @property
    def filter_config(self) -> FilterConfig:
        if self.seed is None:
            return self.filter
        return replace(self.filter, seed=int(self.seed))


@dataclass
class RunResult:
    mode: str
    times: NDArray[np.float64]
    truth: NDArray[np.float64]
    estimates: NDArray[np.float64]
    evals: list[metrics.FootstepEval]
    summary: metrics.MetricSummary
    fixes_used: int
    filter_config: FilterConfig | None = None
    thetas: NDArray[np.float64] | None = None
    particle_history: list[NDArray[np.float64]] | None = None

    def summary_json(self) -> str:
        extra = {"mode": self.mode, "fixes_used": self.fixes_used}
        if self.filter_config is not None:
            extra["filter_config"] = self.filter_config.to_dict()
        return metrics.summary_json(self.summary, **extra)


def gnss_hold_track(session: ReplaySession) -> tuple[NDArray[np.float64], int]:
    """Most recent fix at every footstep; returns the track and how many fixes were used."""
    if not session.fixes:
        raise ValueError("gnss_only needs at least one GNSS fix")
    fix_t = np.array([f.timestamp for f in session.fixes])
    fix_xy = np.array([f.position for f in session.fixes])
    k = np.searchsorted(fix_t, session.footstep_times, side="right") - 1
    k = np.maximum(k, 0)
    return fix_xy[k], int(len(np.unique(k)))


def dead_reckoning_track(session: ReplaySession) -> NDArray[np.float64]:
    """Unfiltered integration of the velocity stream from the start tap."""
    times = session.footstep_times
    v = np.array([session.velocity_at(t) for t in times[1:]]).reshape(-1, 2)
    steps = v * np.diff(times)[:, None]
    return session.start + np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])


def filter_track(session: ReplaySession, config: FilterConfig, use_gnss: bool,
                 keep_particles: bool = False):
    """Run the particle filter over a session, one update per footstep.

    Returns ``(estimates, thetas, fixes_used, particle_history)``; the
    history holds the post-resample positions for every step when requested.
    """
    times = session.footstep_times
    gmap = session.map
    pset = pf.init(session.start, session.heading_hint, config)
    first = pf.estimate(pset, times[0])
    pset.anchor = first.position
    est = np.empty((len(times), 2))
    thetas = np.empty(len(times))
    est[0], thetas[0] = first.position, first.mean_theta
    history = [pset.xy.copy()] if keep_particles else None
    fix_t = np.array([f.timestamp for f in session.fixes])
    used = 0
    for i in range(1, len(times)):
        t0, t1 = times[i - 1], times[i]
        fix: GnssFix | None = None
        if use_gnss and len(fix_t):
            lo = np.searchsorted(fix_t, t0, side="right")
            hi = np.searchsorted(fix_t, t1, side="right")
            if hi > lo:
                fix = session.fixes[hi - 1]
                used += pf.gnss_applies(fix, config)
        v = VelocitySample(session.velocity_at(t1), float(t1))
        pset, e = pf.step(pset, v, float(t1 - t0), fix, gmap, config)
        est[i], thetas[i] = e.position, e.mean_theta
        if keep_particles:
            history.append(pset.xy.copy())
    return est, thetas, used, history


def run_session(session: ReplaySession, mode: str, config: FilterConfig | None = None,
                keep_particles: bool = False) -> RunResult:
    """Track and evaluate one session in one of the three modes."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    truth = session.ground_truth()
    times = session.footstep_times
    if mode == "gnss_only":
        est, used = gnss_hold_track(session)
        thetas, history, cfg = None, None, None
    else:
        cfg = config or FilterConfig()
        est, thetas, used, history = filter_track(session, cfg, mode == "gnss_ronin_pf", keep_particles)
    evals = metrics.evaluate_track(times, est, truth, session.map)
    return RunResult(mode, times, truth, est, evals, metrics.summarize(evals), used, cfg, thetas, history)


def scenario_session(name: str, seed: int = 0, drift: dict | None = None,
                     gnss: dict | None = None) -> ReplaySession:
    """Simulate a built-in scenario and wrap it as a replay session (no disk I/O)."""
    sc = with_overrides(builtin_scenario(name, seed), drift, gnss)
    trace = simulate(sc)
    return ReplaySession(trace_records(trace, sc.map, scenario=name, seed=seed), sc.map)


def load_session(config: RunConfig) -> ReplaySession:
    if config.scenario is not None:
        return scenario_session(config.scenario, config.seed or 0,
                                config.drift_overrides, config.gnss_overrides)
    for p in (config.trace, config.map):
        if not Path(p).exists():
            raise FileNotFoundError(f"no such file: {p}")
    return ReplaySession(read_trace(config.trace), load_map(config.map))


def track_geojson(result: RunResult, gmap: GeoSegmentMap) -> dict:
    """Estimated and true tracks as LineStrings tagged with a ``mode`` property."""

    def line(xy, mode):
        lon, lat = gmap.projection.to_geo(xy)
        return {
            "type": "Feature",
            "properties": {"mode": mode},
            "geometry": {"type": "LineString", "coordinates": [[float(a), float(b)] for a, b in zip(lon, lat)]},
        }

    return {"type": "FeatureCollection",
            "features": [line(result.truth, "ground_truth"), line(result.estimates, result.mode)]}


def write_outputs(result: RunResult, gmap: GeoSegmentMap, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": out / f"summary_{result.mode}.json",
        "evals": out / f"evals_{result.mode}.csv",
        "cdf": out / f"cdf_{result.mode}.csv",
        "track": out / f"track_{result.mode}.geojson",
    }
    paths["summary"].write_text(result.summary_json())
    paths["evals"].write_text(metrics.evals_csv(result.evals))
    paths["cdf"].write_text(metrics.cdf_csv(result.summary))
    paths["track"].write_text(json.dumps(track_geojson(result, gmap), indent=1))
    return paths


def run(config: RunConfig) -> RunResult:
    """Load the input, track, evaluate and (if ``output_dir`` is set) write artifacts."""
    session = load_session(config)
    result = run_session(session, config.mode, config.filter_config)
    if config.output_dir:
        write_outputs(result, session.map, config.output_dir)
    return result


def export_scenario(name: str, out_dir, seed: int = 0, drift: dict | None = None,
                    gnss: dict | None = None) -> tuple[Path, Path]:
    """Write a simulated scenario as ``trace.jsonl`` + ``map.geojson`` for later replay."""
    sc = with_overrides(builtin_scenario(name, seed), drift, gnss)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace_path, map_path = out / "trace.jsonl", out / "map.geojson"
    write_trace(trace_records(simulate(sc), sc.map, scenario=name, seed=seed), trace_path)
    sc.map.save(map_path)
    return trace_path, map_path


# -- sweeps ------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    replications: int = 1
    seed0: int = 0

    def __post_init__(self):
        if self.parameter not in {f.name for f in fields(FilterConfig)}:
            raise ValueError(f"unknown filter parameter {self.parameter!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def seeds(self) -> list[int]:
        return [self.seed0 + k for k in range(self.replications)]


SWEEP_METRICS = ("correct_sidewalk_proportion", "euclidean_mean", "euclidean_median", "euclidean_p90",
                 "along_median", "across_median")


@dataclass
class SweepTable:
    spec: SweepSpec
    mode: str
    rows: list[dict]
    aggregates: list[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["row", self.spec.parameter, "replication", "seed", "n_footsteps", *SWEEP_METRICS]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows + self.aggregates:
            w.writerow({k: r.get(k, "") for k in cols})
        return buf.getvalue()

    def aggregate(self, value: float) -> dict:
        for a in self.aggregates:
            if a[self.spec.parameter] == value:
                return a
        raise KeyError(value)


def sweep(spec: SweepSpec, base: RunConfig, pooling: str = "pooled", workers: int = 1) -> SweepTable:
    """Evaluate ``base`` for every (value, replication); aggregate per value.

    Replication ``k`` uses seed ``spec.seed0 + k`` for both the scenario noise
    and the filter, so every value sees the same set of walks.
    """
    if pooling not in ("pooled", "per_path"):
        raise ValueError("pooling must be 'pooled' or 'per_path'")
    seeds = spec.seeds()
    sessions = {s: load_session(replace(base, seed=s)) for s in seeds} if base.scenario else None
    shared = None if sessions else load_session(base)
    jobs = [(v, k, s) for v in spec.values for k, s in enumerate(seeds)]

    def one(job):
        v, k, s = job
        cfg = replace(base.filter, **{spec.parameter: type(getattr(base.filter, spec.parameter))(v)}, seed=s)
        session = sessions[s] if sessions else shared
        return v, k, s, run_session(session, base.mode, cfg)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, jobs))
    else:
        results = [one(j) for j in jobs]

    rows, aggregates = [], []
    for v, k, s, res in results:
        rows.append({"row": "run", spec.parameter: v, "replication": k, "seed": s,
                     "n_footsteps": res.summary.n_footsteps,
                     **{m: getattr(res.summary, m) for m in SWEEP_METRICS}})
    for v in spec.values:
        group = [r for r in results if r[0] == v]
        agg = {"row": "aggregate", spec.parameter: v, "replication": "", "seed": "",
               "n_footsteps": sum(r[3].summary.n_footsteps for r in group)}
        for m in SWEEP_METRICS:
            agg[m] = float(np.mean([getattr(r[3].summary, m) for r in group]))
        agg["correct_sidewalk_proportion"] = metrics.pooled_proportion(
            [r[3].evals for r in group], per_path=(pooling == "per_path"))
        aggregates.append(agg)
    return SweepTable(spec, base.mode, rows, aggregates)


# -- map validation --------------------------------------------------------------------

def map_validate(path) -> dict:
    """Validation report for a map file (see :func:`canyonpf.geomap.validate_map_document`)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return {"label_counts": {}, "errors": [f"cannot parse JSON: {exc}"], "warnings": [], "valid": False}
    try:
        return validate_map_document(doc)
    except Exception as exc:  # document-level problems (not a FeatureCollection, ...)
        return {"label_counts": {}, "errors": [str(exc)], "warnings": [], "valid": False}

