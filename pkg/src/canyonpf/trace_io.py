"""JSON-lines trace format and waypoint-based ground truth.

One JSON object per line, discriminated by ``type``::

    {"type": "Meta", "key": "format_version", "value": 1}
    {"type": "WaypointTap", "t": 0.0, "lon": -122.39, "lat": 37.78}
    {"type": "Footstep", "t": 0.0}
    {"type": "Velocity", "t": 0.571, "vx": 1.4, "vy": 0.0}
    {"type": "Gnss", "t": 1.0, "lon": -122.39, "lat": 37.78, "uncertainty_radius": 12.5}

Times are seconds since the session start, velocities m/s east/north in the
map frame, positions WGS84. Lines of an unknown ``type`` are kept as
``Meta`` records so nothing is silently dropped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np
from numpy.typing import NDArray

from .filter import GnssFix
from .geomap import GeoSegmentMap

FORMAT_VERSION = 1


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class Footstep:
    t: float


@dataclass(frozen=True)
class Velocity:
    t: float
    vx: float
    vy: float


@dataclass(frozen=True)
class Gnss:
    t: float
    lon: float
    lat: float
    uncertainty_radius: float


@dataclass(frozen=True)
class WaypointTap:
    t: float
    lon: float
    lat: float


@dataclass(frozen=True)
class Meta:
    key: str
    value: Any


TraceRecord = Union[Footstep, Velocity, Gnss, WaypointTap, Meta]

_TYPES = {cls.__name__: cls for cls in (Footstep, Velocity, Gnss, WaypointTap)}
_FIELDS = {
    "Footstep": ("t",),
    "Velocity": ("t", "vx", "vy"),
    "Gnss": ("t", "lon", "lat", "uncertainty_radius"),
    "WaypointTap": ("t", "lon", "lat"),
}


def record_to_dict(rec: TraceRecord) -> dict:
    if isinstance(rec, Meta):
        return {"type": "Meta", "key": rec.key, "value": rec.value}
    name = type(rec).__name__
    return {"type": name, **{f: getattr(rec, f) for f in _FIELDS[name]}}


def record_from_dict(obj: dict) -> TraceRecord:
    if not isinstance(obj, dict) or not isinstance(obj.get("type"), str):
        raise TraceError("record needs a string 'type'")
    kind = obj["type"]
    if kind == "Meta":
        if "key" not in obj:
            raise TraceError("Meta record missing 'key'")
        return Meta(str(obj["key"]), obj.get("value"))
    if kind not in _TYPES:
        return Meta(kind, {k: v for k, v in obj.items() if k != "type"})
    vals = []
    for f in _FIELDS[kind]:
        if f not in obj:
            raise TraceError(f"{kind} record missing '{f}'")
        v = obj[f]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise TraceError(f"{kind} field '{f}' must be a finite number")
        vals.append(float(v))
    if kind == "Gnss" and not vals[3] > 0:
        raise TraceError("Gnss uncertainty_radius must be positive")
    return _TYPES[kind](*vals)


def _check_order(records: Iterable[TraceRecord], where=lambda i: f"record {i}"):
    last = -math.inf
    for i, rec in enumerate(records):
        t = getattr(rec, "t", None)
        if t is None:
            continue
        if t < last:
            raise TraceError(f"timestamp regression ({t} < {last}) at {where(i)}")
        last = t


def write_trace(records: Iterable[TraceRecord], path) -> None:
    records = list(records)
    _check_order(records)
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_dict(rec)) + "\n")


def read_trace(path) -> list[TraceRecord]:
    """Parse a JSONL trace; errors name the 1-based line number."""
    records: list[TraceRecord] = []
    last = -math.inf
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = record_from_dict(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TraceError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            except TraceError as exc:
                raise TraceError(f"line {lineno}: {exc}") from None
            t = getattr(rec, "t", None)
            if t is not None:
                if t < last:
                    raise TraceError(f"line {lineno}: timestamp regression ({t} < {last})")
                last = t
            records.append(rec)
    return records


class ReplaySession:
    """A trace bound to a map, with everything projected into the map frame."""

    def __init__(self, records: Iterable[TraceRecord], gmap: GeoSegmentMap):
        self.records = list(records)
        self.map = gmap
        _check_order(self.records)
        proj = gmap.projection
        self.meta = {r.key: r.value for r in self.records if isinstance(r, Meta)}
        self.footstep_times = np.array([r.t for r in self.records if isinstance(r, Footstep)])
        vel = [r for r in self.records if isinstance(r, Velocity)]
        self.velocity_times = np.array([r.t for r in vel])
        self.velocities = np.array([[r.vx, r.vy] for r in vel]).reshape(-1, 2)
        taps = [r for r in self.records if isinstance(r, WaypointTap)]
        self.tap_times = np.array([r.t for r in taps])
        self.tap_positions = proj.to_local([r.lon for r in taps], [r.lat for r in taps]).reshape(-1, 2)
        self.fixes = [
            GnssFix(proj.to_local(r.lon, r.lat), r.uncertainty_radius, r.t)
            for r in self.records if isinstance(r, Gnss)
        ]
        if len(taps) < 2:
            raise TraceError("a replay session needs at least two waypoint taps")
        if len(self.footstep_times) == 0:
            raise TraceError("trace has no footsteps")
        if self.footstep_times[0] < self.tap_times[0] or self.footstep_times[-1] > self.tap_times[-1]:
            raise TraceError("footsteps must lie between the first and last waypoint tap")

    @property
    def start(self) -> NDArray[np.float64]:
        return self.tap_positions[0]

    @property
    def heading_hint(self) -> float:
        return float(self.meta.get("heading_hint", 0.0))

    def velocity_at(self, t: float) -> NDArray[np.float64]:
        """Most recent velocity sample at or before ``t`` (zero before the first)."""
        k = int(np.searchsorted(self.velocity_times, t, side="right")) - 1
        return self.velocities[k] if k >= 0 else np.zeros(2)

    def ground_truth(self) -> NDArray[np.float64]:
        return derive_ground_truth(self)


def derive_ground_truth(session: ReplaySession) -> NDArray[np.float64]:
    """Footstep positions interpolated between waypoint taps.

    Footsteps strictly inside a tap interval are spaced evenly by count along
    the straight segment joining the two tap positions (k footsteps split it
    into k + 1 equal gaps). Footsteps that coincide with a tap sit on it.
    """
    return place_footsteps(session.footstep_times, session.tap_times, session.tap_positions)


def place_footsteps(times, tap_times, tap_positions) -> NDArray[np.float64]:
    times = np.asarray(times, dtype=float)
    tap_times = np.asarray(tap_times, dtype=float)
    taps = np.asarray(tap_positions, dtype=float)
    if len(tap_times) < 2:
        raise TraceError("need at least two waypoint taps")
    if (times < tap_times[0]).any() or (times > tap_times[-1]).any():
        raise TraceError("footstep outside every waypoint interval")
    out = np.empty((len(times), 2))
    on_tap = np.zeros(len(times), dtype=bool)
    for t_tap, p in zip(tap_times, taps):
        hit = times == t_tap
        out[hit] = p
        on_tap |= hit
    for k in range(len(tap_times) - 1):
        t0, t1 = tap_times[k], tap_times[k + 1]
        idx = np.flatnonzero((times > t0) & (times < t1) & ~on_tap)
        if not len(idx):
            continue
        frac = np.arange(1, len(idx) + 1) / (len(idx) + 1)
        out[idx] = taps[k] + frac[:, None] * (taps[k + 1] - taps[k])
    return out


def trace_records(trace, gmap: GeoSegmentMap, **meta) -> list[TraceRecord]:
    """Serialize a :class:`~canyonpf.simulate.SyntheticTrace` into time-ordered records."""
    proj = gmap.projection
    recs: list[tuple[float, int, TraceRecord]] = []
    lon, lat = proj.to_geo(trace.waypoints)
    for t, a, b in zip(trace.tap_times, lon, lat):
        recs.append((float(t), 0, WaypointTap(float(t), float(a), float(b))))
    for t, v in zip(trace.times, trace.velocities):
        recs.append((float(t), 1, Footstep(float(t))))
        recs.append((float(t), 2, Velocity(float(t), float(v[0]), float(v[1]))))
    for fix in trace.fixes:
        a, b = proj.to_geo(fix.position)
        recs.append((fix.timestamp, 3, Gnss(fix.timestamp, float(a), float(b), fix.uncertainty_radius)))
    recs.sort(key=lambda r: (r[0], r[1]))
    head: list[TraceRecord] = [Meta("format_version", FORMAT_VERSION)]
    head += [Meta(k, v) for k, v in meta.items()]
    return head + [r[2] for r in recs]


def session_from_files(trace_path, map_path) -> ReplaySession:
    from .geomap import load_map

    return ReplaySession(read_trace(Path(trace_path)), load_map(map_path))
