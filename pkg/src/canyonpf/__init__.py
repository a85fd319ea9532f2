"""Map-constrained particle-filter pedestrian tracking with GNSS/inertial fusion."""

from .filter import (
    FilterConfig,
    GnssFix,
    ParticleFilter,
    ParticleSet,
    StateEstimate,
    VelocitySample,
)
from .geomap import (
    GeoSegmentMap,
    LocalProjection,
    MapError,
    SurfaceLabel,
    classify,
    load_map,
    nearest_sidewalk,
    street_direction_at,
)
from .metrics import MetricSummary, summarize
from .runner import RunConfig, SweepSpec, run, run_session, scenario_session, sweep
from .simulate import builtin_scenario, simulate

__version__ = "0.1.0"

__all__ = [
    "FilterConfig", "GnssFix", "ParticleFilter", "ParticleSet", "StateEstimate", "VelocitySample",
    "GeoSegmentMap", "LocalProjection", "MapError", "SurfaceLabel", "classify", "load_map",
    "nearest_sidewalk", "street_direction_at", "MetricSummary", "summarize", "RunConfig",
    "SweepSpec", "run", "run_session", "scenario_session", "sweep", "builtin_scenario", "simulate",
]
