"""Labeled geosegment maps: loading, point classification and sidewalk queries.

Maps are authored as GeoJSON FeatureCollections in WGS84 lon/lat. Every
feature carries a ``label`` property:

``impenetrable``
    buildings and other obstacles a pedestrian cannot enter
``street``
    street surface outside marked crosswalks
``sidewalk``
    one sidewalk segment of a city block; needs ``id`` and ``bearing_deg``
    (street direction, degrees counter-clockwise from east)

Anything not covered by an obstacle or street polygon is freely traversable;
crosswalks are simply gaps in the street polygons. Geometry is projected once
into a local east/north tangent plane in meters and all queries run there.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from . import _geometry as geo
from ._grid import INSIDE, MIXED, LayerGrid, exact_contains, lattice_for

# Tolerance used to declare two sidewalk distances tied (meters).
TIE_EPS = 1e-9

DEFAULT_CELL = 0.5


class MapError(ValueError):
    """Raised for malformed or inconsistent map files."""


class SurfaceLabel(enum.IntEnum):
    TRAVERSABLE = 0
    STREET = 1
    IMPENETRABLE = 2


@dataclass(frozen=True)
class GeoPoint:
    longitude: float
    latitude: float

    def __post_init__(self):
        if not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")


@dataclass(frozen=True)
class LocalProjection:
    """Equirectangular tangent-plane projection anchored at ``origin``.

    x is meters east, y meters north. The meters-per-degree factors are the
    WGS84 ellipsoid values at the origin latitude, which keeps distortion well
    below a centimeter across a few city blocks.
    """

    origin: GeoPoint
    m_per_deg_lon: float
    m_per_deg_lat: float

    @classmethod
    def at(cls, longitude: float, latitude: float) -> "LocalProjection":
        phi = math.radians(latitude)
        m_lat = (111132.92 - 559.82 * math.cos(2 * phi) + 1.175 * math.cos(4 * phi)
                 - 0.0023 * math.cos(6 * phi))
        m_lon = 111412.84 * math.cos(phi) - 93.5 * math.cos(3 * phi) + 0.118 * math.cos(5 * phi)
        return cls(GeoPoint(longitude, latitude), m_lon, m_lat)

    def to_local(self, lon, lat) -> NDArray[np.float64]:
        """Project lon/lat (scalars or arrays) to an ``(..., 2)`` array of meters."""
        lon = np.asarray(lon, dtype=float)
        lat = np.asarray(lat, dtype=float)
        x = (lon - self.origin.longitude) * self.m_per_deg_lon
        y = (lat - self.origin.latitude) * self.m_per_deg_lat
        return np.stack([x, y], axis=-1)

    def to_geo(self, xy) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Inverse of :meth:`to_local`; returns ``(lon, lat)``."""
        xy = np.asarray(xy, dtype=float)
        lon = self.origin.longitude + xy[..., 0] / self.m_per_deg_lon
        lat = self.origin.latitude + xy[..., 1] / self.m_per_deg_lat
        return lon, lat


def _as_ring(coords) -> NDArray[np.float64]:
    ring = np.asarray(coords, dtype=float)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise MapError("ring must be a list of (x, y) pairs")
    return ring


def _check_ring(ring: NDArray[np.float64], what: str) -> None:
    if len(ring) < 4 or not np.array_equal(ring[0], ring[-1]):
        raise MapError(f"open ring in {what}")
    if len(np.unique(ring[:-1], axis=0)) < 3:
        raise MapError(f"ring in {what} has fewer than 3 distinct vertices")
    if geo.ring_self_intersects(ring):
        raise MapError(f"self-intersecting ring in {what}")


@dataclass(frozen=True, eq=False)
class LabeledPolygon:
    """An obstacle or street polygon in local coordinates; ``rings[0]`` is the shell."""

    rings: tuple[NDArray[np.float64], ...]
    label: SurfaceLabel
    name: str | None = None

    def __post_init__(self):
        if self.label == SurfaceLabel.TRAVERSABLE:
            raise MapError("traversable area is implicit and cannot be a polygon")
        rings = tuple(_as_ring(r) for r in self.rings)
        for r in rings:
            _check_ring(r, self.name or f"{self.label.name.lower()} polygon")
        object.__setattr__(self, "rings", rings)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        shell = self.rings[0]
        return (float(shell[:, 0].min()), float(shell[:, 1].min()),
                float(shell[:, 0].max()), float(shell[:, 1].max()))

    def contains(self, points) -> NDArray[np.bool_]:
        return geo.points_in_polygon(np.atleast_2d(np.asarray(points, dtype=float)), self.rings)


@dataclass(frozen=True, eq=False)
class SidewalkSegment:
    id: str
    ring: NDArray[np.float64]
    street_bearing: NDArray[np.float64]

    def __post_init__(self):
        ring = _as_ring(self.ring)
        _check_ring(ring, f"sidewalk {self.id!r}")
        b = np.asarray(self.street_bearing, dtype=float)
        if b.shape != (2,) or abs(np.hypot(*b) - 1.0) > 1e-9:
            raise MapError(f"sidewalk {self.id!r} bearing must be a unit 2-vector")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "street_bearing", b)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (float(self.ring[:, 0].min()), float(self.ring[:, 1].min()),
                float(self.ring[:, 0].max()), float(self.ring[:, 1].max()))

    @property
    def bearing_deg(self) -> float:
        return math.degrees(math.atan2(self.street_bearing[1], self.street_bearing[0]))


def bearing_vector(bearing_deg: float) -> NDArray[np.float64]:
    """Unit street direction for a bearing in degrees counter-clockwise from east."""
    r = math.radians(bearing_deg)
    return np.array([math.cos(r), math.sin(r)])


class GeoSegmentMap:
    """Immutable labeled map with an exact raster-accelerated classifier.

    Build it with :func:`load_map`, :func:`map_from_geojson` or directly from
    local-frame polygons. The classification index is built eagerly, so a
    constructed map can be shared read-only between threads.
    """

    def __init__(
        self,
        projection: LocalProjection,
        obstacles: Sequence[LabeledPolygon] = (),
        streets: Sequence[LabeledPolygon] = (),
        sidewalks: Sequence[SidewalkSegment] = (),
        cell_size: float = DEFAULT_CELL,
        _geojson: dict | None = None,
    ):
        self.projection = projection
        self.obstacles = tuple(obstacles)
        self.streets = tuple(streets)
        for p in self.obstacles:
            if p.label != SurfaceLabel.IMPENETRABLE:
                raise MapError("obstacle list may only hold impenetrable polygons")
        for p in self.streets:
            if p.label != SurfaceLabel.STREET:
                raise MapError("street list may only hold street polygons")
        ids = [s.id for s in sidewalks]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise MapError(f"duplicate sidewalk id(s): {', '.join(dup)}")
        # sorted by id so that index order doubles as the tie-break order
        self.sidewalks = tuple(sorted(sidewalks, key=lambda s: s.id))
        self._geojson = _geojson

        polys = self.obstacles + self.streets
        if polys:
            bb = np.array([p.bbox for p in polys])
            bounds = (bb[:, 0].min(), bb[:, 1].min(), bb[:, 2].max(), bb[:, 3].max())
        else:
            bounds = (0.0, 0.0, 1.0, 1.0)
        x0, y0, cell, nx, ny = lattice_for(bounds, cell_size)
        self._obstacle_grid = LayerGrid(self.obstacles, x0, y0, cell, nx, ny)
        self._street_grid = LayerGrid(self.streets, x0, y0, cell, nx, ny)
        # both layers folded into one code per cell: 3 * obstacle state + street state
        self._combined = (3 * self._obstacle_grid.state + self._street_grid.state).astype(np.int8)

        if self.sidewalks:
            self._sw_bbox = np.array([s.bbox for s in self.sidewalks])
            self._sw_bearing = np.array([s.street_bearing for s in self.sidewalks])
        else:
            self._sw_bbox = np.empty((0, 4))
            self._sw_bearing = np.empty((0, 2))

    def __repr__(self) -> str:
        return (f"GeoSegmentMap({len(self.obstacles)} obstacles, {len(self.streets)} streets, "
                f"{len(self.sidewalks)} sidewalks)")

    @property
    def sidewalk_ids(self) -> list[str]:
        return [s.id for s in self.sidewalks]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """Local bounding box over all polygons and sidewalks."""
        boxes = [p.bbox for p in self.obstacles + self.streets] + [s.bbox for s in self.sidewalks]
        if not boxes:
            return (0.0, 0.0, 0.0, 0.0)
        bb = np.array(boxes)
        return (float(bb[:, 0].min()), float(bb[:, 1].min()),
                float(bb[:, 2].max()), float(bb[:, 3].max()))

    # -- classification -------------------------------------------------

    def classify_points(self, points) -> NDArray[np.int8]:
        """Vectorized :func:`classify`; returns integer :class:`SurfaceLabel` codes."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        code = self._obstacle_grid.cell_states(pts, self._combined)
        obs_state, street_state = np.divmod(code, 3)
        blocked = obs_state == INSIDE
        check = np.flatnonzero(obs_state == MIXED)
        if len(check):
            blocked[check] = exact_contains(pts[check], list(self.obstacles), self._obstacle_grid.bboxes)
        on_street = street_state == INSIDE
        check = np.flatnonzero((street_state == MIXED) & ~blocked)
        if len(check):
            on_street[check] = exact_contains(pts[check], list(self.streets), self._street_grid.bboxes)
        labels = on_street.astype(np.int8)  # STREET == 1
        labels[blocked] = SurfaceLabel.IMPENETRABLE
        return labels

    def classify_points_bruteforce(self, points) -> NDArray[np.int8]:
        """Linear scan over every polygon; reference path for the raster index."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.zeros(len(pts), dtype=np.int8)
        for poly in self.streets:
            labels[poly.contains(pts)] = SurfaceLabel.STREET
        for poly in self.obstacles:
            labels[poly.contains(pts)] = SurfaceLabel.IMPENETRABLE
        return labels

    def inside_obstacle(self, points) -> NDArray[np.bool_]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        bb = np.array([p.bbox for p in self.obstacles]) if self.obstacles else np.empty((0, 4))
        return exact_contains(pts, list(self.obstacles), bb)

    # -- sidewalks --------------------------------------------------------

    def _require_sidewalks(self) -> None:
        if not self.sidewalks:
            raise MapError("map has no sidewalk segments")

    def sidewalk_distances(self, points, which: Iterable[int] | None = None):
        """Exact distance and closest point from each point to the chosen sidewalks.

        Returns ``(dist, proj)`` with shapes ``(P, S)`` and ``(P, S, 2)``.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = range(len(self.sidewalks)) if which is None else list(which)
        dist = np.empty((len(pts), len(idx)))
        proj = np.empty((len(pts), len(idx), 2))
        for col, k in enumerate(idx):
            dist[:, col], proj[:, col] = geo.distance_to_polygon(pts, (self.sidewalks[k].ring,))
        return dist, proj

    def nearest_sidewalks(self, points) -> tuple[NDArray[np.intp], NDArray[np.float64], NDArray[np.float64]]:
        """Batch nearest-sidewalk lookup by linear scan.

        Returns sidewalk indices (into :attr:`sidewalks`), projected points and
        distances. Ties within ``TIE_EPS`` go to the smallest id.
        """
        self._require_sidewalks()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dist, proj = self.sidewalk_distances(pts)
        best = dist.min(axis=1, keepdims=True)
        k = np.argmax(dist <= best + TIE_EPS, axis=1)
        rows = np.arange(len(pts))
        return k, proj[rows, k], dist[rows, k]

    def nearest_sidewalk_index(self, p) -> tuple[int, NDArray[np.float64], float]:
        """Bounding-box pruned search for a single point."""
        self._require_sidewalks()
        pt = np.asarray(p, dtype=float).reshape(1, 2)
        lower = geo.bbox_distance(pt, self._sw_bbox)[0]
        order = np.argsort(lower, kind="stable")
        best = math.inf
        found: list[tuple[int, float, NDArray[np.float64]]] = []
        for k in order:
            if lower[k] > best + TIE_EPS:
                break
            d, q = geo.distance_to_polygon(pt, (self.sidewalks[k].ring,))
            found.append((int(k), float(d[0]), q[0]))
            best = min(best, float(d[0]))
        k, d, q = min((f for f in found if f[1] <= best + TIE_EPS), key=lambda f: f[0])
        return k, q, d

    # -- export -------------------------------------------------------------

    def to_geojson(self) -> dict:
        """GeoJSON FeatureCollection; maps loaded from GeoJSON export their source coordinates verbatim."""
        if self._geojson is not None:
            return json.loads(json.dumps(self._geojson))
        features = []

        def ring_coords(ring):
            lon, lat = self.projection.to_geo(ring)
            return [[float(a), float(b)] for a, b in zip(lon, lat)]

        for poly in self.obstacles + self.streets:
            props: dict[str, Any] = {"label": poly.label.name.lower()}
            if poly.name:
                props["name"] = poly.name
            features.append({
                "type": "Feature",
                "properties": props,
                "geometry": {"type": "Polygon", "coordinates": [ring_coords(r) for r in poly.rings]},
            })
        for sw in self.sidewalks:
            features.append({
                "type": "Feature",
                "properties": {"label": "sidewalk", "id": sw.id, "bearing_deg": sw.bearing_deg},
                "geometry": {"type": "Polygon", "coordinates": [ring_coords(sw.ring)]},
            })
        o = self.projection.origin
        return {"type": "FeatureCollection", "origin": [o.longitude, o.latitude], "features": features}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_geojson(), indent=1))

    def canonical(self) -> "GeoSegmentMap":
        """Round-trip through GeoJSON so the result equals what a saved file reloads to."""
        return map_from_geojson(self.to_geojson())


# -- loading ---------------------------------------------------------------

LABELS = {"impenetrable": SurfaceLabel.IMPENETRABLE, "street": SurfaceLabel.STREET, "sidewalk": None}


@dataclass
class FeatureIssue:
    index: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.message} at feature {self.index}"


@dataclass
class ParsedFeature:
    index: int
    label: str
    polygons: list[list[NDArray[np.float64]]]  # lon/lat rings per polygon part
    properties: dict = field(default_factory=dict)


def _feature_polygons(geometry: dict) -> list[list[list]]:
    kind = geometry.get("type")
    if kind == "Polygon":
        return [geometry["coordinates"]]
    if kind == "MultiPolygon":
        return list(geometry["coordinates"])
    raise MapError(f"unsupported geometry type {kind!r}")


def parse_features(doc: dict, collect: list[FeatureIssue] | None = None) -> list[ParsedFeature]:
    """Validate the feature list of a FeatureCollection.

    With ``collect`` given, problems are appended to it and the offending
    features skipped; otherwise the first problem raises :class:`MapError`.
    """
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise MapError("document is not a GeoJSON FeatureCollection")
    feats = doc.get("features")
    if not isinstance(feats, list):
        raise MapError("FeatureCollection has no feature list")
    out = []
    seen_ids: dict[str, int] = {}
    for i, feat in enumerate(feats):
        try:
            props = (feat or {}).get("properties") or {}
            label = props.get("label")
            if label not in LABELS:
                raise MapError(f"unknown label {label!r}")
            geometry = feat.get("geometry")
            if not isinstance(geometry, dict):
                raise MapError("missing geometry")
            parts = _feature_polygons(geometry)
            rings = []
            for part in parts:
                part_rings = []
                for j, coords in enumerate(part):
                    ring = np.asarray(coords, dtype=float)
                    if ring.ndim != 2 or ring.shape[1] < 2:
                        raise MapError("malformed coordinates")
                    ring = ring[:, :2]
                    if len(ring) < 4 or not np.array_equal(ring[0], ring[-1]):
                        raise MapError("open ring" if j == 0 else f"open ring (hole {j})")
                    part_rings.append(ring)
                if not part_rings:
                    raise MapError("polygon without rings")
                rings.append(part_rings)
            if label == "sidewalk":
                if not isinstance(props.get("id"), str) or not props["id"]:
                    raise MapError("missing sidewalk id")
                bearing = props.get("bearing_deg")
                if not isinstance(bearing, (int, float)) or isinstance(bearing, bool) or not math.isfinite(bearing):
                    raise MapError("missing sidewalk bearing")
                if len(rings) != 1 or len(rings[0]) != 1:
                    raise MapError("sidewalk must be a single polygon without holes")
                if props["id"] in seen_ids:
                    raise MapError(f"duplicate sidewalk id {props['id']!r}")
                seen_ids[props["id"]] = i
            out.append(ParsedFeature(i, label, rings, dict(props)))
        except (MapError, KeyError, TypeError, ValueError) as exc:
            msg = str(exc) if isinstance(exc, MapError) else f"malformed feature ({exc})"
            if collect is None:
                raise MapError(f"{msg} at feature {i}") from None
            collect.append(FeatureIssue(i, msg))
    return out


def _projection_for(doc: dict, parsed: list[ParsedFeature]) -> LocalProjection:
    origin = doc.get("origin")
    if origin is not None:
        try:
            lon, lat = float(origin[0]), float(origin[1])
        except (TypeError, ValueError, IndexError):
            raise MapError("origin must be [lon, lat]") from None
        GeoPoint(lon, lat)
        return LocalProjection.at(lon, lat)
    verts = [ring[:-1] for f in parsed for part in f.polygons for ring in part]
    if not verts:
        raise MapError("map has no features and no origin")
    allv = np.concatenate(verts)
    return LocalProjection.at(float(allv[:, 0].mean()), float(allv[:, 1].mean()))


def map_from_geojson(doc: dict, cell_size: float = DEFAULT_CELL) -> GeoSegmentMap:
    """Build a :class:`GeoSegmentMap` from a parsed GeoJSON document."""
    parsed = parse_features(doc)
    proj = _projection_for(doc, parsed)
    obstacles, streets, sidewalks = [], [], []
    for f in parsed:
        try:
            local = [[proj.to_local(r[:, 0], r[:, 1]) for r in part] for part in f.polygons]
            if f.label == "sidewalk":
                sidewalks.append(SidewalkSegment(
                    f.properties["id"], local[0][0], bearing_vector(f.properties["bearing_deg"])))
                continue
            lab = LABELS[f.label]
            target = obstacles if lab == SurfaceLabel.IMPENETRABLE else streets
            for part in local:
                target.append(LabeledPolygon(tuple(part), lab, f.properties.get("name")))
        except MapError as exc:
            raise MapError(f"{exc} at feature {f.index}") from None
    return GeoSegmentMap(proj, obstacles, streets, sidewalks, cell_size=cell_size,
                         _geojson=json.loads(json.dumps(doc)))


def load_map(path, cell_size: float = DEFAULT_CELL) -> GeoSegmentMap:
    """Load a labeled GeoJSON map file.

    Raises
    ------
    MapError
        On parse failures, unknown labels, open rings or missing sidewalk
        attributes; the message names the offending feature index.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MapError(f"cannot parse {path}: {exc}") from None
    return map_from_geojson(doc, cell_size=cell_size)


# -- queries -----------------------------------------------------------------

def classify(gmap: GeoSegmentMap, p) -> SurfaceLabel:
    """Surface label at a local point.

    Obstacles win over streets, streets over the traversable default. Points
    on a polygon edge count as inside that polygon.
    """
    return SurfaceLabel(int(gmap.classify_points(np.asarray(p, dtype=float).reshape(1, 2))[0]))


def nearest_sidewalk(gmap: GeoSegmentMap, p) -> tuple[str, NDArray[np.float64], float]:
    """Closest sidewalk polygon to ``p`` as ``(id, projected_point, distance)``.

    The distance is 0 when ``p`` lies inside the sidewalk, in which case the
    projected point is ``p`` itself. Equal distances resolve to the smallest id.
    """
    k, q, d = gmap.nearest_sidewalk_index(p)
    return gmap.sidewalks[k].id, q, d


def nearest_sidewalk_bruteforce(gmap: GeoSegmentMap, p) -> tuple[str, NDArray[np.float64], float]:
    k, q, d = gmap.nearest_sidewalks(np.asarray(p, dtype=float).reshape(1, 2))
    return gmap.sidewalks[int(k[0])].id, q[0], float(d[0])


def street_direction_at(gmap: GeoSegmentMap, p) -> NDArray[np.float64]:
    """Along-street unit vector of the sidewalk nearest to ``p``."""
    k, _, _ = gmap.nearest_sidewalk_index(p)
    return gmap.sidewalks[k].street_bearing.copy()


def street_directions(gmap: GeoSegmentMap, points) -> NDArray[np.float64]:
    """Vectorized :func:`street_direction_at`."""
    k, _, _ = gmap.nearest_sidewalks(points)
    return gmap._sw_bearing[k]


# -- validation ----------------------------------------------------------------

BEARING_TOLERANCE_DEG = 25.0


def _strictly_inside(points, ring) -> NDArray[np.bool_]:
    inside, on_edge = geo.points_in_ring(np.atleast_2d(points), ring)
    return inside & ~on_edge


def _polygons_overlap(a: LabeledPolygon, b: LabeledPolygon) -> bool:
    """True when the shells share interior area; touching edges or corners do not count."""
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    if ax1 <= bx0 or bx1 <= ax0 or ay1 <= by0 or by1 <= ay0:
        return False
    sa, sb = a.rings[0], b.rings[0]
    for p1, p2 in zip(sa[:-1], sa[1:]):
        for q1, q2 in zip(sb[:-1], sb[1:]):
            if geo.segments_cross(p1, p2, q1, q2):
                return True
    for r, other in ((sa, sb), (sb, sa)):
        probes = np.concatenate([r[:-1], 0.5 * (r[:-1] + r[1:]), r[:-1].mean(axis=0, keepdims=True)])
        if _strictly_inside(probes, other).any():
            return True
    return False


def validate_map_document(doc: dict) -> dict:
    """Collect errors and warnings for a GeoJSON map without raising.

    Reports label counts, ring problems, overlaps between obstacle and street
    polygons, and sidewalks whose authored bearing deviates more than 25
    degrees from the polygon's principal axis.
    """
    issues: list[FeatureIssue] = []
    parsed = parse_features(doc, collect=issues)
    counts = {"impenetrable": 0, "street": 0, "sidewalk": 0}
    for f in parsed:
        counts[f.label] += 1
    polys: list[tuple[int, LabeledPolygon]] = []
    proj = None
    try:
        proj = _projection_for(doc, parsed)
    except MapError as exc:
        issues.append(FeatureIssue(-1, str(exc)))
    if proj is not None:
        for f in parsed:
            local = [[proj.to_local(r[:, 0], r[:, 1]) for r in part] for part in f.polygons]
            try:
                if f.label == "sidewalk":
                    sw = SidewalkSegment(f.properties["id"], local[0][0],
                                         bearing_vector(f.properties["bearing_deg"]))
                    axis = math.degrees(geo.principal_axis_angle(sw.ring))
                    off = abs((f.properties["bearing_deg"] - axis + 90.0) % 180.0 - 90.0)
                    if off > BEARING_TOLERANCE_DEG:
                        issues.append(FeatureIssue(
                            f.index, f"sidewalk {sw.id!r} bearing is {off:.1f} deg off its principal axis",
                            "warning"))
                else:
                    for part in local:
                        polys.append((f.index, LabeledPolygon(tuple(part), LABELS[f.label])))
            except (MapError, ValueError) as exc:
                issues.append(FeatureIssue(f.index, str(exc)))
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            (fi, a), (fj, b) = polys[i], polys[j]
            if fi != fj and _polygons_overlap(a, b):
                issues.append(FeatureIssue(
                    fi, f"{a.label.name.lower()} overlaps {b.label.name.lower()} at feature {fj}", "warning"))
    errors = [str(x) for x in issues if x.severity == "error"]
    warnings = [str(x) for x in issues if x.severity == "warning"]
    return {"label_counts": counts, "errors": errors, "warnings": warnings, "valid": not errors}
