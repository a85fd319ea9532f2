"""Vectorized planar geometry kernels shared by the map and metrics code.

All functions take points as ``(P, 2)`` float arrays and rings as closed
``(n, 2)`` arrays (first vertex repeated at the end).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

# Points closer than this to a ring edge count as lying on it (meters).
EDGE_EPS = 1e-9


def ring_segments(ring: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``(start, end)`` arrays of shape ``(E, 2)`` for a closed ring."""
    return ring[:-1], ring[1:]


def segment_distance_sq(
    points: NDArray[np.float64], a: NDArray[np.float64], b: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Squared distance from each point to each segment, plus closest points.

    Returns
    -------
    d2 : (P, E) array
    closest : (P, E, 2) array
    """
    ab = b - a
    len2 = np.einsum("ij,ij->i", ab, ab)
    len2 = np.where(len2 > 0.0, len2, 1.0)
    ap = points[:, None, :] - a[None, :, :]
    t = np.einsum("pej,ej->pe", ap, ab) / len2
    np.clip(t, 0.0, 1.0, out=t)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    diff = points[:, None, :] - closest
    d2 = np.einsum("pej,pej->pe", diff, diff)
    return d2, closest


def points_in_ring(
    points: NDArray[np.float64], ring: NDArray[np.float64], eps: float = EDGE_EPS
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """Crossing-number containment test with explicit on-edge detection.

    Returns ``(inside, on_edge)``. ``inside`` already includes on-edge points.
    """
    a, b = ring_segments(ring)
    px = points[:, 0:1]
    py = points[:, 1:2]
    x1, y1 = a[:, 0], a[:, 1]
    x2, y2 = b[:, 0], b[:, 1]
    straddles = (y1 > py) != (y2 > py)
    dy = np.where(y2 != y1, y2 - y1, 1.0)
    x_cross = x1 + (py - y1) * (x2 - x1) / dy
    crossings = np.count_nonzero(straddles & (px < x_cross), axis=1)
    d2, _ = segment_distance_sq(points, a, b)
    on_edge = (d2 <= eps * eps).any(axis=1)
    return (crossings % 2 == 1) | on_edge, on_edge


def points_in_polygon(
    points: NDArray[np.float64], rings: tuple[NDArray[np.float64], ...], eps: float = EDGE_EPS
) -> NDArray[np.bool_]:
    """Containment in a polygon with holes; boundaries (outer and hole) count as inside."""
    inside, _ = points_in_ring(points, rings[0], eps)
    for hole in rings[1:]:
        if not inside.any():
            break
        in_hole, on_hole = points_in_ring(points, hole, eps)
        inside &= ~(in_hole & ~on_hole)
    return inside


def distance_to_polygon(
    points: NDArray[np.float64], rings: tuple[NDArray[np.float64], ...]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Euclidean distance from points to a (filled) polygon and the closest point.

    Points inside the polygon are at distance 0 and are their own closest point.
    """
    inside = points_in_polygon(points, rings)
    a = np.concatenate([r[:-1] for r in rings])
    b = np.concatenate([r[1:] for r in rings])
    d2, closest = segment_distance_sq(points, a, b)
    k = np.argmin(d2, axis=1)
    rows = np.arange(len(points))
    dist = np.sqrt(d2[rows, k])
    proj = closest[rows, k]
    dist = np.where(inside, 0.0, dist)
    proj = np.where(inside[:, None], points, proj)
    return dist, proj


def bbox_distance(points: NDArray[np.float64], bboxes: NDArray[np.float64]) -> NDArray[np.float64]:
    """Lower bound distance from points ``(P, 2)`` to boxes ``(B, 4)`` as ``(P, B)``."""
    dx = np.maximum(0.0, np.maximum(bboxes[None, :, 0] - points[:, None, 0],
                                    points[:, None, 0] - bboxes[None, :, 2]))
    dy = np.maximum(0.0, np.maximum(bboxes[None, :, 1] - points[:, None, 1],
                                    points[:, None, 1] - bboxes[None, :, 3]))
    return np.hypot(dx, dy)


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test (touching counts)."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) <= 1e-12 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12
                and min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(p1, p2, q1):
        return True
    if o2 == 0 and on_seg(p1, p2, q2):
        return True
    if o3 == 0 and on_seg(q1, q2, p1):
        return True
    return o4 == 0 and on_seg(q1, q2, p2)


def ring_self_intersects(ring: NDArray[np.float64]) -> bool:
    """True if any two non-adjacent edges of a closed ring touch or cross."""
    n = len(ring) - 1
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]):
                return True
    return False


def ring_area(ring: NDArray[np.float64]) -> float:
    """Signed shoelace area (positive for counter-clockwise rings)."""
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    return 0.5 * float(np.sum(x * yn - xn * y))


def principal_axis_angle(ring: NDArray[np.float64]) -> float:
    """Orientation (radians, in ``[0, pi)``) of the major axis of a filled ring.

    Uses second moments of area, so vertex density along an edge does not bias it.
    """
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if abs(area) < 1e-12:
        raise ValueError("degenerate ring has zero area")
    cx = ((x + xn) * cross).sum() / (6 * area)
    cy = ((y + yn) * cross).sum() / (6 * area)
    ixx = ((x * x + x * xn + xn * xn) * cross).sum() / 12 - area * cx * cx
    iyy = ((y * y + y * yn + yn * yn) * cross).sum() / 12 - area * cy * cy
    ixy = ((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * cross).sum() / 24 - area * cx * cy
    if area < 0:  # clockwise ring flips the sign of every moment
        ixx, iyy, ixy = -ixx, -iyy, -ixy
    # orientation of the eigenvector with the larger eigenvalue of [[ixx, ixy], [ixy, iyy]]
    angle = 0.5 * np.arctan2(2 * ixy, ixx - iyy)
    return float(angle % np.pi)


def segments_cross(p1, p2, q1, q2) -> bool:
    """Proper crossing: the open segments intersect at a single interior point."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p1, p2, q1), orient(p1, p2, q2)
    d3, d4 = orient(q1, q2, p1), orient(q1, q2, p2)
    tol = 1e-12
    return ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol))
