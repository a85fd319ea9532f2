"""Map-constrained particle filter with GNSS reweighting.

Each particle carries a position in the local map frame, an orientation drift
angle and a weight. One footstep update runs

    propagate -> apply_map_weights -> apply_gnss (optional) -> normalize
    -> estimate -> resample

Propagation rotates the world-frame velocity by the particle's own drift
angle, so particles whose drift matches the inertial source's actual error
keep walking on free space while the rest hit buildings or streets and lose
weight. That selection is what lets the filter track heading drift.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .geomap import GeoSegmentMap, SurfaceLabel

TWO_PI = 2.0 * math.pi

# Stream id mixed into the seed so filter noise never aliases simulator noise.
FILTER_STREAM = 0xF1


class FilterError(ValueError):
    pass


def wrap_angle(theta):
    """Wrap angles into ``(-pi, pi]``."""
    return math.pi - np.mod(math.pi - np.asarray(theta, dtype=float), TWO_PI)


@dataclass(frozen=True)
class FilterConfig:
    """Tuning knobs of the tracker.

    Noise levels, the GNSS sigma scale, the radius threshold and the initial
    dispersion are engineering defaults tuned for footstep-rate updates.

    Attributes
    ----------
    n_particles : int
    pos_noise_sigma : float
        Per-footstep position jitter (m).
    theta_noise_sigma : float
        Per-footstep drift-angle jitter (rad).
    jaywalk_weight : float
        Weight given to particles on street surface, in ``[0, 1]``.
    gnss_sigma_scale : float
        GNSS likelihood sigma as a multiple of the reported uncertainty radius.
    gnss_radius_threshold : float
        Fixes with an uncertainty radius at or above this (m) are ignored.
    init_pos_sigma, init_theta_sigma : float
        Initial dispersion around the known start (m, rad).
    seed : int
    """

    n_particles: int = 500
    pos_noise_sigma: float = 0.15
    theta_noise_sigma: float = math.radians(0.5)
    jaywalk_weight: float = 0.4
    gnss_sigma_scale: float = 1.0
    gnss_radius_threshold: float = 30.0
    init_pos_sigma: float = 1.0
    init_theta_sigma: float = math.radians(5.0)
    seed: int = 0

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise FilterError("n_particles must be a positive integer")
        for name in ("pos_noise_sigma", "theta_noise_sigma", "gnss_sigma_scale",
                     "init_pos_sigma", "init_theta_sigma", "gnss_radius_threshold"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise FilterError(f"{name} must be finite and >= 0, got {v}")
        if not (0.0 <= self.jaywalk_weight <= 1.0):
            raise FilterError(f"jaywalk_weight must lie in [0, 1], got {self.jaywalk_weight}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FilterConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise FilterError(f"unknown filter parameter(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        for k, v in data.items():
            kwargs[k] = int(v) if k in ("n_particles", "seed") else float(v)
        return cls(**kwargs)


class Particle(NamedTuple):
    position: NDArray[np.float64]
    theta: float
    weight: float


@dataclass(frozen=True)
class VelocitySample:
    v: NDArray[np.float64]
    timestamp: float


@dataclass(frozen=True)
class GnssFix:
    position: NDArray[np.float64]
    uncertainty_radius: float
    timestamp: float

    def __post_init__(self):
        if not self.uncertainty_radius > 0:
            raise FilterError("GNSS uncertainty radius must be positive")


@dataclass(frozen=True)
class StateEstimate:
    position: NDArray[np.float64]
    mean_theta: float
    effective_sample_size: float
    timestamp: float


@dataclass
class ParticleSet:
    """Struct-of-arrays particle population.

    ``heading`` rotates incoming velocities from the inertial frame into the
    map frame before the per-particle drift is applied; it is zero when the
    velocities are already map-aligned. ``anchor`` is the last reported
    estimate, used to re-seed a population that lost all its weight.
    """

    xy: NDArray[np.float64]
    theta: NDArray[np.float64]
    weights: NDArray[np.float64]
    rng: np.random.Generator
    heading: float = 0.0
    anchor: NDArray[np.float64] = field(default_factory=lambda: np.zeros(2))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> Particle:
        return Particle(self.xy[i].copy(), float(self.theta[i]), float(self.weights[i]))

    @property
    def particles(self) -> list[Particle]:
        return [self[i] for i in range(len(self))]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), FILTER_STREAM])


def init(start, heading_hint: float, config: FilterConfig) -> ParticleSet:
    """Scatter ``n_particles`` around the known start with uniform weights."""
    rng = make_rng(config.seed)
    n = config.n_particles
    start = np.asarray(start, dtype=float)
    xy = start + rng.normal(size=(n, 2)) * config.init_pos_sigma
    theta = wrap_angle(rng.normal(size=n) * config.init_theta_sigma)
    return ParticleSet(xy, theta, np.full(n, 1.0 / n), rng, float(heading_hint), start.copy())


def propagate(pset: ParticleSet, v: VelocitySample, dt: float, config: FilterConfig) -> ParticleSet:
    """Move every particle by its drift-rotated velocity plus Gaussian jitter."""
    if not dt > 0:
        raise FilterError(f"dt must be positive, got {dt}")
    vx, vy = float(v.v[0]), float(v.v[1])
    ang = pset.theta + pset.heading if pset.heading else pset.theta
    c, s = np.cos(ang), np.sin(ang)
    n = len(pset)
    jitter = pset.rng.normal(size=(n, 3))
    xy = np.empty_like(pset.xy)
    xy[:, 0] = pset.xy[:, 0] + (c * vx - s * vy) * dt + jitter[:, 0] * config.pos_noise_sigma
    xy[:, 1] = pset.xy[:, 1] + (s * vx + c * vy) * dt + jitter[:, 1] * config.pos_noise_sigma
    theta = wrap_angle(pset.theta + jitter[:, 2] * config.theta_noise_sigma)
    return replace(pset, xy=xy, theta=theta)


def map_weight_table(config: FilterConfig) -> NDArray[np.float64]:
    table = np.empty(3)
    table[SurfaceLabel.TRAVERSABLE] = 1.0
    table[SurfaceLabel.STREET] = config.jaywalk_weight
    table[SurfaceLabel.IMPENETRABLE] = 0.0
    return table


def apply_map_weights(pset: ParticleSet, gmap: GeoSegmentMap, config: FilterConfig) -> ParticleSet:
    """Set (not multiply) each weight from the surface under the particle."""
    labels = gmap.classify_points(pset.xy)
    return replace(pset, weights=map_weight_table(config)[labels])


def gnss_applies(fix: GnssFix | None, config: FilterConfig) -> bool:
    return fix is not None and fix.uncertainty_radius < config.gnss_radius_threshold


def apply_gnss(pset: ParticleSet, fix: GnssFix, config: FilterConfig) -> ParticleSet:
    """Multiply weights by an isotropic Gaussian centered on the fix.

    The normalizing constant is dropped; it cancels in :func:`normalize`.
    Fixes at or above the radius threshold leave the set untouched.
    """
    if not gnss_applies(fix, config):
        return pset
    sigma = config.gnss_sigma_scale * fix.uncertainty_radius
    if sigma <= 0:
        raise FilterError("GNSS sigma is zero; gnss_sigma_scale must be positive")
    d = pset.xy - np.asarray(fix.position, dtype=float)
    d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    return replace(pset, weights=pset.weights * np.exp(-0.5 * d2 / (sigma * sigma)))


def normalize(pset: ParticleSet, config: FilterConfig | None = None) -> ParticleSet:
    """Scale weights to unit sum.

    If every weight is zero the population is re-scattered around the last
    estimate with twice the position jitter and given uniform weights.
    """
    total = float(pset.weights.sum())
    n = len(pset)
    if total > 0 and math.isfinite(total):
        return replace(pset, weights=pset.weights / total)
    config = config or FilterConfig()
    xy = pset.anchor + pset.rng.normal(size=(n, 2)) * (2.0 * config.pos_noise_sigma)
    return replace(pset, xy=xy, weights=np.full(n, 1.0 / n))


def systematic_indices(weights: NDArray[np.float64], offset: float) -> NDArray[np.intp]:
    """Systematic resampling selections for a fixed offset in ``[0, 1/N)``."""
    n = len(weights)
    cdf = np.cumsum(weights)
    positions = (offset * n + np.arange(n)) / n
    idx = np.searchsorted(cdf, positions, side="right")
    # rounding can leave cdf[-1] a hair below the last position
    last = int(np.flatnonzero(weights > 0)[-1])
    return np.minimum(idx, last)


def systematic_resample(weights: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.intp]:
    return systematic_indices(weights, rng.random() / len(weights))


def multinomial_resample(weights: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.intp]:
    """Independent draws; kept as a statistical reference for the systematic scheme."""
    cdf = np.cumsum(weights)
    cdf[-1] = max(cdf[-1], 1.0)
    return np.searchsorted(cdf, rng.random(len(weights)), side="right")


def resample(pset: ParticleSet) -> ParticleSet:
    """Systematic resampling; the returned set has uniform weights."""
    w = pset.weights
    if abs(float(w.sum()) - 1.0) > 1e-6 or (w < 0).any():
        raise FilterError("resample needs normalized, nonnegative weights")
    idx = systematic_resample(w, pset.rng)
    n = len(w)
    return replace(pset, xy=pset.xy[idx], theta=pset.theta[idx], weights=np.full(n, 1.0 / n))


def estimate(pset: ParticleSet, timestamp: float = 0.0) -> StateEstimate:
    """Weighted mean position, circular mean drift angle and effective sample size."""
    w = pset.weights
    total = float(w.sum())
    if not total > 0:
        raise FilterError("all particle weights are zero; normalize first")
    pos = (w @ pset.xy) / total
    mean_theta = math.atan2(float(w @ np.sin(pset.theta)), float(w @ np.cos(pset.theta)))
    ess = total * total / float(w @ w)
    return StateEstimate(pos, mean_theta, ess, float(timestamp))


def step(
    pset: ParticleSet,
    v: VelocitySample,
    dt: float,
    fix: GnssFix | None,
    gmap: GeoSegmentMap,
    config: FilterConfig,
) -> tuple[ParticleSet, StateEstimate]:
    """One footstep update; the estimate is taken before resampling flattens the weights."""
    pset = propagate(pset, v, dt, config)
    pset = apply_map_weights(pset, gmap, config)
    if fix is not None:
        pset = apply_gnss(pset, fix, config)
    degenerate = not float(pset.weights.sum()) > 0
    pset = normalize(pset, config)
    if degenerate:
        # keep re-scattered particles out of buildings when any landed outside
        rescued = apply_map_weights(pset, gmap, config)
        if rescued.weights.sum() > 0:
            pset = normalize(rescued, config)
    est = estimate(pset, v.timestamp)
    pset.anchor = est.position
    return resample(pset), est


class ParticleFilter:
    """Stateful tracker bundling a particle set with its map and configuration."""

    def __init__(self, gmap: GeoSegmentMap, start, heading_hint: float = 0.0,
                 config: FilterConfig | None = None, timestamp: float = 0.0):
        self.map = gmap
        self.config = config or FilterConfig()
        self.particles = init(start, heading_hint, self.config)
        self.last_estimate = estimate(self.particles, timestamp)
        self.timestamp = float(timestamp)

    def update(self, v, timestamp: float, fix: GnssFix | None = None) -> StateEstimate:
        if not isinstance(v, VelocitySample):
            v = VelocitySample(np.asarray(v, dtype=float), float(timestamp))
        self.particles, self.last_estimate = step(
            self.particles, v, timestamp - self.timestamp, fix, self.map, self.config)
        self.timestamp = float(timestamp)
        return self.last_estimate
