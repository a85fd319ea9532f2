"""Evaluation metrics: correct sidewalk assignment, Euclidean error, along/across-street error."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .geomap import GeoSegmentMap

UNIT_TOL = 1e-3


@dataclass(frozen=True)
class FootstepEval:
    timestamp: float
    truth: tuple[float, float]
    estimate: tuple[float, float]
    euclidean: float
    along: float
    across: float
    assigned_sidewalk: str
    truth_sidewalk: str
    correct: bool


@dataclass(frozen=True)
class MetricSummary:
    n_footsteps: int
    correct_sidewalk_proportion: float
    euclidean_mean: float
    euclidean_median: float
    euclidean_p90: float
    along_median: float
    along_p90: float
    across_median: float
    across_p90: float
    cdf: tuple[float, ...]

    def to_dict(self, with_cdf: bool = False) -> dict:
        d = asdict(self)
        if not with_cdf:
            d.pop("cdf")
        return d


def euclidean_error(estimate, truth):
    """Distance between estimate and truth; works row-wise on ``(n, 2)`` arrays."""
    e = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    out = np.hypot(e[..., 0], e[..., 1])
    return float(out) if out.ndim == 0 else out


def _unit(street_dir) -> NDArray[np.float64]:
    d = np.asarray(street_dir, dtype=float)
    norm = np.hypot(d[..., 0], d[..., 1])
    off = np.abs(norm - 1.0)
    if np.any(off > UNIT_TOL):
        raise ValueError("street direction is not a unit vector")
    if np.any(off > 1e-12):
        warnings.warn("street direction renormalized to unit length", RuntimeWarning, stacklevel=3)
        d = d / norm[..., None]
    return d


def along_across_error(estimate, truth, street_dir):
    """Magnitudes of the error components parallel and perpendicular to the street.

    Accepts single points or row-stacked arrays. Returns ``(along, across)``.
    """
    e = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    d = _unit(street_dir)
    along = np.abs(e[..., 0] * d[..., 0] + e[..., 1] * d[..., 1])
    across = np.abs(-e[..., 0] * d[..., 1] + e[..., 1] * d[..., 0])
    if along.ndim == 0:
        return float(along), float(across)
    return along, across


def sidewalk_assignment(estimate, truth, gmap: GeoSegmentMap) -> tuple[str, str, bool]:
    """Project both points to their nearest sidewalk; correct when the segments match."""
    k, _, _ = gmap.nearest_sidewalks(np.array([estimate, truth], dtype=float))
    a, t = gmap.sidewalks[int(k[0])].id, gmap.sidewalks[int(k[1])].id
    return a, t, a == t


def evaluate_track(times, estimates, truth, gmap: GeoSegmentMap) -> list[FootstepEval]:
    """Per-footstep metrics for a whole track (vectorized)."""
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truth, dtype=float)
    k_est, _, _ = gmap.nearest_sidewalks(est)
    k_tru, _, _ = gmap.nearest_sidewalks(tru)
    dirs = gmap._sw_bearing[k_tru]
    euc = euclidean_error(est, tru)
    along, across = along_across_error(est, tru, dirs)
    ids = gmap.sidewalk_ids
    return [
        FootstepEval(float(t), (float(tp[0]), float(tp[1])), (float(ep[0]), float(ep[1])),
                     float(e), float(a), float(c), ids[ke], ids[kt], bool(ke == kt))
        for t, tp, ep, e, a, c, ke, kt in zip(times, tru, est, euc, along, across, k_est, k_tru)
    ]


def summarize(evals: Sequence[FootstepEval]) -> MetricSummary:
    """Aggregate per-footstep evaluations.

    Percentiles interpolate linearly between order statistics.
    """
    if not evals:
        raise ValueError("cannot summarize an empty evaluation list")
    euc = np.array([e.euclidean for e in evals])
    along = np.array([e.along for e in evals])
    across = np.array([e.across for e in evals])
    correct = np.array([e.correct for e in evals])
    q = lambda x, p: float(np.percentile(x, p))  # noqa: E731
    return MetricSummary(
        n_footsteps=len(evals),
        correct_sidewalk_proportion=float(correct.mean()),
        euclidean_mean=float(euc.mean()),
        euclidean_median=q(euc, 50),
        euclidean_p90=q(euc, 90),
        along_median=q(along, 50),
        along_p90=q(along, 90),
        across_median=q(across, 50),
        across_p90=q(across, 90),
        cdf=tuple(float(x) for x in np.sort(euc)),
    )


def cdf_points(summary: MetricSummary) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Empirical CDF of the Euclidean error as ``(error, fraction <= error)``."""
    x = np.asarray(summary.cdf)
    return x, np.arange(1, len(x) + 1) / len(x)


def quantile_from_cdf(summary: MetricSummary, p: float) -> float:
    """Read a quantile back off the stored CDF with the same linear rule as :func:`summarize`."""
    x = np.asarray(summary.cdf)
    pos = (len(x) - 1) * p
    lo = int(np.floor(pos))
    hi = min(lo + 1, len(x) - 1)
    return float(x[lo] + (x[hi] - x[lo]) * (pos - lo))


def pooled_proportion(groups: Sequence[Sequence[FootstepEval]], per_path: bool = False) -> float:
    """Correct-sidewalk proportion across several walks.

    Pooled (default) counts every footstep equally; ``per_path`` averages the
    per-walk proportions instead.
    """
    groups = [g for g in groups if len(g)]
    if not groups:
        raise ValueError("no footsteps to aggregate")
    if per_path:
        return float(np.mean([np.mean([e.correct for e in g]) for g in groups]))
    return float(np.mean([e.correct for g in groups for e in g]))


# -- serialization ---------------------------------------------------------------

EVAL_COLUMNS = ["timestamp", "truth_x", "truth_y", "estimate_x", "estimate_y", "euclidean",
                "along", "across", "assigned_sidewalk", "truth_sidewalk", "correct"]


def evals_csv(evals: Sequence[FootstepEval]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVAL_COLUMNS)
    for e in evals:
        w.writerow([repr(e.timestamp), repr(e.truth[0]), repr(e.truth[1]), repr(e.estimate[0]),
                    repr(e.estimate[1]), repr(e.euclidean), repr(e.along), repr(e.across),
                    e.assigned_sidewalk, e.truth_sidewalk, int(e.correct)])
    return buf.getvalue()


def cdf_csv(summary: MetricSummary) -> str:
    x, f = cdf_points(summary)
    lines = ["euclidean_error,cdf"] + [f"{a!r},{b!r}" for a, b in zip(x.tolist(), f.tolist())]
    return "\n".join(lines) + "\n"


def summary_json(summary: MetricSummary, **extra) -> str:
    doc = dict(extra)
    doc["metrics"] = summary.to_dict()
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
