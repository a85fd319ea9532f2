"""Synthetic urban-canyon walks.

Generates footstep-level ground truth along waypoint paths, an inertial
velocity stream corrupted by a slowly rotating reference frame, and GNSS fixes
whose error is anisotropic in the local street frame (worse across the street
than along it, optionally biased toward one side). Five canned scenarios
stand in for field recordings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from .filter import GnssFix
from .geomap import (
    GeoSegmentMap,
    LabeledPolygon,
    LocalProjection,
    SidewalkSegment,
    SurfaceLabel,
    bearing_vector,
    street_directions,
)

# Stream ids keep the velocity and GNSS noise independent for the same seed.
IMU_STREAM = 0x1A
GNSS_STREAM = 0x6A

# Lon/lat anchor for the synthetic maps (downtown San Francisco).
SF_ORIGIN = (-122.3965, 37.7895)


@dataclass(frozen=True)
class WaypointPath:
    waypoints: NDArray[np.float64]
    step_length: float = 0.8
    cadence: float = 1.75

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[1] != 2 or len(wp) < 2:
            raise ValueError("a path needs at least two (x, y) waypoints")
        if (np.hypot(*np.diff(wp, axis=0).T) == 0).any():
            raise ValueError("consecutive waypoints must differ")
        if not (self.step_length > 0 and self.cadence > 0):
            raise ValueError("step_length and cadence must be positive")
        object.__setattr__(self, "waypoints", wp)

    @property
    def length(self) -> float:
        return float(np.hypot(*np.diff(self.waypoints, axis=0).T).sum())


@dataclass(frozen=True)
class ImuDriftModel:
    """Inertial velocity corruption.

    ``heading_drift_rate`` rotates the velocity frame by ``rate * t``;
    ``speed_scale`` is a multiplicative speed bias (1.0 = unbiased);
    ``velocity_noise_sigma`` is white noise per axis (m/s).
    """

    heading_drift_rate: float = 0.003
    velocity_noise_sigma: float = 0.05
    seed: int = 0
    speed_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.heading_drift_rate) and math.isfinite(self.speed_scale)):
            raise ValueError("drift parameters must be finite")
        if not self.velocity_noise_sigma >= 0:
            raise ValueError("velocity_noise_sigma must be >= 0")


@dataclass(frozen=True)
class GnssNoiseModel:
    along_sigma: float = 4.0
    across_sigma: float = 8.0
    across_bias: float = 0.0
    uncertainty_radius_range: tuple[float, float] = (8.0, 20.0)
    outage_intervals: tuple[tuple[float, float], ...] = ()
    fix_period: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.along_sigma < 0 or self.across_sigma < 0:
            raise ValueError("GNSS sigmas must be >= 0")
        lo, hi = self.uncertainty_radius_range
        if not 0 < lo <= hi:
            raise ValueError("uncertainty radius range must satisfy 0 < min <= max")
        if not self.fix_period > 0:
            raise ValueError("fix_period must be positive")

    def in_outage(self, t: NDArray[np.float64]) -> NDArray[np.bool_]:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=bool)
        for t0, t1 in self.outage_intervals:
            out |= (t >= t0) & (t < t1)
        return out


@dataclass
class SyntheticTrace:
    """Everything a replay needs, in the local frame.

    ``velocities[i]`` is the inertial velocity reported at footstep ``i``; row 0
    is zero because the walker has not moved yet.
    """

    times: NDArray[np.float64]
    truth: NDArray[np.float64]
    velocities: NDArray[np.float64]
    fixes: list[GnssFix]
    waypoints: NDArray[np.float64]
    tap_times: NDArray[np.float64]
    name: str = ""


@dataclass
class Scenario:
    name: str
    map: GeoSegmentMap
    path: WaypointPath
    drift: ImuDriftModel
    gnss: GnssNoiseModel

    def __iter__(self):
        return iter((self.map, self.path, self.drift, self.gnss))


def generate_ground_truth(path: WaypointPath) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Footstep times and positions along a waypoint path.

    Steps of ``step_length`` are laid along each straight leg; the last step of
    a leg is shortened so it lands on the waypoint. Footsteps are evenly spaced
    in time at ``1 / cadence``.

    Returns
    -------
    times : (n,) array
    positions : (n, 2) array
    tap_times : (k,) array
        Time of the footstep that lands on each waypoint.
    """
    wp = path.waypoints
    pts = [wp[0]]
    tap_steps = [0]
    for a, b in zip(wp[:-1], wp[1:]):
        seg = b - a
        length = float(np.hypot(*seg))
        n = max(int(math.ceil(length / path.step_length - 1e-9)), 1)
        for k in range(1, n):
            pts.append(a + seg * (k * path.step_length / length))
        pts.append(b.copy())
        tap_steps.append(len(pts) - 1)
    times = np.arange(len(pts)) / path.cadence
    return times, np.array(pts), times[np.array(tap_steps)]


def rotate(v: NDArray[np.float64], angle) -> NDArray[np.float64]:
    """Rotate row vectors counter-clockwise by ``angle`` (scalar or per-row)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], axis=-1)


def synthesize_velocity(times, truth, drift: ImuDriftModel) -> NDArray[np.float64]:
    """Per-footstep inertial velocities with a linearly growing frame rotation."""
    times = np.asarray(times, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if len(times) < 2:
        raise ValueError("need at least two footsteps")
    rng = np.random.default_rng([int(drift.seed), IMU_STREAM])
    dt = np.diff(times)
    v_true = np.diff(truth, axis=0) / dt[:, None]
    v = rotate(v_true * drift.speed_scale, drift.heading_drift_rate * times[1:])
    v = v + rng.normal(size=v.shape) * drift.velocity_noise_sigma
    return np.vstack([np.zeros((1, 2)), v])


def position_at(times, truth, t) -> NDArray[np.float64]:
    """Piecewise-linear interpolation of the footstep track."""
    t = np.asarray(t, dtype=float)
    return np.column_stack([np.interp(t, times, truth[:, 0]), np.interp(t, times, truth[:, 1])])


def synthesize_gnss(times, truth, gmap: GeoSegmentMap, model: GnssNoiseModel) -> list[GnssFix]:
    """GNSS fixes every ``fix_period`` seconds outside outages.

    The error is drawn in the street frame at the true position (along,
    across + bias) and rotated back into the map frame. Random numbers are
    drawn for every tick, including ticks lost to outages, so changing an
    outage does not reshuffle the remaining fixes.
    """
    if not gmap.sidewalks:
        raise ValueError("GNSS synthesis needs sidewalk segments for the street frame")
    times = np.asarray(times, dtype=float)
    ticks = np.arange(times[0], times[-1] + 1e-9, model.fix_period)
    rng = np.random.default_rng([int(model.seed), GNSS_STREAM])
    noise = rng.normal(size=(len(ticks), 2))
    radius = rng.uniform(*model.uncertainty_radius_range, size=len(ticks))
    keep = ~model.in_outage(ticks)
    if not keep.any():
        return []
    ticks, noise, radius = ticks[keep], noise[keep], radius[keep]
    true_pos = position_at(times, truth, ticks)
    along_dir = street_directions(gmap, true_pos)
    across_dir = np.column_stack([-along_dir[:, 1], along_dir[:, 0]])
    along = noise[:, 0] * model.along_sigma
    across = model.across_bias + noise[:, 1] * model.across_sigma
    pos = true_pos + along[:, None] * along_dir + across[:, None] * across_dir
    return [GnssFix(p, float(r), float(t)) for p, r, t in zip(pos, radius, ticks)]


def simulate(scenario: Scenario) -> SyntheticTrace:
    times, truth, taps = generate_ground_truth(scenario.path)
    vel = synthesize_velocity(times, truth, scenario.drift)
    fixes = synthesize_gnss(times, truth, scenario.map, scenario.gnss)
    return SyntheticTrace(times, truth, vel, fixes, scenario.path.waypoints.copy(), taps, scenario.name)


# -- map authoring helpers ---------------------------------------------------

def rect(x0: float, y0: float, x1: float, y1: float) -> NDArray[np.float64]:
    """Closed counter-clockwise rectangle ring."""
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]], dtype=float)


def _obstacle(x0, y0, x1, y1, name=None):
    return LabeledPolygon((rect(x0, y0, x1, y1),), SurfaceLabel.IMPENETRABLE, name)


def _street(x0, y0, x1, y1, name=None):
    return LabeledPolygon((rect(x0, y0, x1, y1),), SurfaceLabel.STREET, name)


def _sidewalk(sid, x0, y0, x1, y1, bearing_deg):
    return SidewalkSegment(sid, rect(x0, y0, x1, y1), bearing_vector(bearing_deg))


@dataclass(frozen=True)
class CityGrid:
    """Regular grid of city blocks ("lots") separated by streets.

    Each lot is a building ringed by a sidewalk. Streets between lots are
    split at every intersection by crosswalk gaps in line with the sidewalks.
    """

    cols: int
    rows: int
    building_w: float
    building_h: float
    sidewalk: float = 4.0
    street: float = 14.0

    @property
    def lot_w(self) -> float:
        return self.building_w + 2 * self.sidewalk

    @property
    def lot_h(self) -> float:
        return self.building_h + 2 * self.sidewalk

    @property
    def pitch_x(self) -> float:
        return self.lot_w + self.street

    @property
    def pitch_y(self) -> float:
        return self.lot_h + self.street

    def lot_origin(self, i: int, j: int) -> tuple[float, float]:
        return i * self.pitch_x, j * self.pitch_y

    def loop_corners(self, i: int, j: int) -> NDArray[np.float64]:
        """Sidewalk-centerline corners around lot (i, j), counter-clockwise from south-west."""
        x, y = self.lot_origin(i, j)
        h = self.sidewalk / 2
        return np.array([[x + h, y + h], [x + self.lot_w - h, y + h],
                         [x + self.lot_w - h, y + self.lot_h - h], [x + h, y + self.lot_h - h]])

    def build(self) -> tuple[list, list, list]:
        sw, bw, bh = self.sidewalk, self.building_w, self.building_h
        obstacles, streets, sidewalks = [], [], []
        for i in range(self.cols):
            for j in range(self.rows):
                x, y = self.lot_origin(i, j)
                tag = f"L{i}{j}"
                obstacles.append(_obstacle(x + sw, y + sw, x + sw + bw, y + sw + bh, f"building {tag}"))
                sidewalks += [
                    _sidewalk(f"{tag}-S", x, y, x + self.lot_w, y + sw, 0.0),
                    _sidewalk(f"{tag}-N", x, y + sw + bh, x + self.lot_w, y + self.lot_h, 0.0),
                    _sidewalk(f"{tag}-W", x, y + sw, x + sw, y + sw + bh, 90.0),
                    _sidewalk(f"{tag}-E", x + sw + bw, y + sw, x + self.lot_w, y + sw + bh, 90.0),
                ]
        for k in range(self.cols - 1):
            sx0 = k * self.pitch_x + self.lot_w
            sx1 = (k + 1) * self.pitch_x
            for j in range(self.rows):
                _, y = self.lot_origin(0, j)
                streets.append(_street(sx0, y + sw, sx1, y + sw + bh))
        for k in range(self.rows - 1):
            sy0 = k * self.pitch_y + self.lot_h
            sy1 = (k + 1) * self.pitch_y
            for i in range(self.cols):
                x, _ = self.lot_origin(i, 0)
                streets.append(_street(x + sw, sy0, x + sw + bw, sy1))
        for k in range(self.cols - 1):
            for m in range(self.rows - 1):
                sx0 = k * self.pitch_x + self.lot_w
                sy0 = m * self.pitch_y + self.lot_h
                streets.append(_street(sx0, sy0, sx0 + self.street, sy0 + self.street, "intersection"))
        return obstacles, streets, sidewalks


def _make_map(obstacles, streets, sidewalks) -> GeoSegmentMap:
    proj = LocalProjection.at(*SF_ORIGIN)
    return GeoSegmentMap(proj, obstacles, streets, sidewalks).canonical()


@lru_cache(maxsize=None)
def _straight_street_map(length: float, sidewalk: float, street: float, depth: float = 30.0,
                         margin: float = 20.0) -> GeoSegmentMap:
    x0, x1 = -margin, length + margin
    north = sidewalk + street + sidewalk
    obstacles = [_obstacle(x0, -depth, x1, 0.0, "south buildings"),
                 _obstacle(x0, north, x1, north + depth, "north buildings")]
    streets = [_street(x0, sidewalk, x1, sidewalk + street, "main street")]
    sidewalks = [_sidewalk("S", x0, 0.0, x1, sidewalk, 0.0),
                 _sidewalk("N", x0, sidewalk + street, x1, north, 0.0)]
    return _make_map(obstacles, streets, sidewalks)


def _straight_canyon(seed: int) -> Scenario:
    gmap = _straight_street_map(300.0, 4.0, 14.0)
    path = WaypointPath([[0.0, 2.0], [100.0, 2.0], [200.0, 2.0], [300.0, 2.0]])
    gnss = GnssNoiseModel(along_sigma=4.0, across_sigma=8.0, across_bias=8.0,
                          uncertainty_radius_range=(8.0, 20.0), seed=seed)
    return Scenario("straight_canyon", gmap, path, ImuDriftModel(0.003, 0.05, seed), gnss)


@lru_cache(maxsize=None)
def _block_grid(bw, bh) -> tuple[GeoSegmentMap, CityGrid]:
    grid = CityGrid(3, 3, bw, bh)
    return _make_map(*grid.build()), grid


def _block_loop(seed: int) -> Scenario:
    gmap, grid = _block_grid(96.0, 76.0)
    corners = grid.loop_corners(1, 1)
    path = WaypointPath(np.vstack([corners, corners[:1]]))
    # calibrated so gnss_only lands near a 13.6 m median error over 20 seeds
    gnss = GnssNoiseModel(along_sigma=9.5, across_sigma=12.0, across_bias=6.5,
                          uncertainty_radius_range=(8.0, 25.0), seed=seed)
    drift = ImuDriftModel(0.003, 0.05, seed, speed_scale=1.08)
    return Scenario("block_loop", gmap, path, drift, gnss)


def _l_corner(seed: int) -> Scenario:
    gmap, grid = _block_grid(148.0, 148.0)
    c = grid.loop_corners(1, 1)
    path = WaypointPath(np.array([c[0], c[1], c[2]]))
    gnss = GnssNoiseModel(along_sigma=5.0, across_sigma=9.0, across_bias=5.0,
                          uncertainty_radius_range=(8.0, 20.0), seed=seed)
    return Scenario("l_corner", gmap, path, ImuDriftModel(0.003, 0.05, seed), gnss)


def _jaywalk_cross(seed: int) -> Scenario:
    sw, st = 4.0, 12.8
    gmap = _straight_street_map(300.0, sw, st)
    south, north = sw / 2, sw + st + sw / 2
    path = WaypointPath([[0.0, south], [150.0, south], [150.0, north], [300.0, north]])
    gnss = GnssNoiseModel(along_sigma=4.0, across_sigma=8.0, across_bias=6.0, seed=seed)
    return Scenario("jaywalk_cross", gmap, path, ImuDriftModel(0.004, 0.05, seed), gnss)


@lru_cache(maxsize=None)
def _covered_hub_map() -> GeoSegmentMap:
    # open-sided transit hub: platforms either side of a bus lane, roof blocks GNSS
    obstacles = [
        _obstacle(0.0, -10.0, 210.0, 0.0, "hub south wall"),
        _obstacle(0.0, 60.0, 210.0, 70.0, "hub north wall"),
        _obstacle(200.0, 0.0, 210.0, 60.0, "hub east wall"),
        _obstacle(-100.0, -10.0, -64.0, 70.0, "plaza west buildings"),
    ]
    for x in np.arange(20.0, 200.0, 25.0):
        obstacles.append(_obstacle(x, 13.0, x + 1.5, 14.5, "column"))
        obstacles.append(_obstacle(x, 45.5, x + 1.5, 47.0, "column"))
    streets = [
        _street(0.0, 24.0, 96.0, 36.0, "bus lane"),
        _street(104.0, 24.0, 200.0, 36.0, "bus lane"),
        _street(-64.0, -10.0, -50.0, 70.0, "plaza street"),
    ]
    sidewalks = [
        _sidewalk("plaza", -50.0, 0.0, 0.0, 60.0, 90.0),
        _sidewalk("platform-N", 0.0, 36.0, 200.0, 60.0, 0.0),
        _sidewalk("platform-S", 0.0, 0.0, 200.0, 24.0, 0.0),
    ]
    return _make_map(obstacles, streets, sidewalks)


def _covered_hub(seed: int) -> Scenario:
    gmap = _covered_hub_map()
    path = WaypointPath([[-40.0, 6.0], [100.0, 6.0], [100.0, 54.0], [-40.0, 54.0]])
    # roof outage from entering the hub (x = 0) until leaving it again
    cad, step = path.cadence, path.step_length
    t_in = (40.0 / step) / cad
    t_out = ((140.0 + 48.0 + 140.0) / step) / cad
    gnss = GnssNoiseModel(along_sigma=6.0, across_sigma=10.0, across_bias=4.0,
                          uncertainty_radius_range=(10.0, 25.0),
                          outage_intervals=((t_in, t_out),), seed=seed)
    return Scenario("covered_hub", gmap, path, ImuDriftModel(0.003, 0.05, seed), gnss)


SCENARIOS = {
    "straight_canyon": _straight_canyon,
    "l_corner": _l_corner,
    "block_loop": _block_loop,
    "jaywalk_cross": _jaywalk_cross,
    "covered_hub": _covered_hub,
}

def builtin_scenario(name: str, seed: int = 0) -> Scenario:
    """One of the canned scenarios, with noise models seeded by ``seed``.

    ``straight_canyon``
        300 m along one sidewalk of a single street between building rows.
    ``l_corner``
        Two 152 m legs around a block corner (corner lag).
    ``block_loop``
        One lap of a city block in a 3 x 3 grid.
    ``jaywalk_cross``
        Walks a sidewalk, crosses mid-block outside any crosswalk, continues
        on the far side.
    ``covered_hub``
        Transit hub whose roof blocks GNSS for most of the walk.
    """
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    return factory(int(seed))


def with_overrides(scenario: Scenario, drift: dict | None = None, gnss: dict | None = None) -> Scenario:
    """Copy of ``scenario`` with some noise-model fields replaced."""
    return replace(
        scenario,
        drift=replace(scenario.drift, **(drift or {})),
        gnss=replace(scenario.gnss, **(gnss or {})),
    )


def outage_fraction(model: GnssNoiseModel, t0: float, t1: float) -> float:
    """Share of ``[t0, t1]`` covered by the model's outage intervals."""
    total = 0.0
    for a, b in model.outage_intervals:
        total += max(0.0, min(b, t1) - max(a, t0))
    return total / (t1 - t0)


__all__ = [
    "WaypointPath", "ImuDriftModel", "GnssNoiseModel", "SyntheticTrace", "Scenario", "CityGrid",
    "generate_ground_truth", "synthesize_velocity", "synthesize_gnss", "simulate",
    "builtin_scenario", "with_overrides", "outage_fraction", "SCENARIOS",
]
