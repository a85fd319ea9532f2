"""Raster acceleration structure for exact point-in-polygon queries.

Each polygon layer (obstacles, streets) is rasterized once into cells that are
fully outside, fully inside, or crossed by at least one edge ("mixed"). Pure
cells answer queries directly; points that fall in mixed cells get the exact
ring test against only the polygons whose bounding box contains them, so the
answer is always identical to a linear scan.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from ._geometry import EDGE_EPS, points_in_polygon

OUTSIDE, INSIDE, MIXED = 0, 1, 2

MAX_CELLS = 1 << 22


class LayerGrid:
    """Cell states for one polygon layer on a shared lattice."""

    def __init__(self, polygons, x0: float, y0: float, cell: float, nx: int, ny: int):
        self.polygons = list(polygons)
        self.x0, self.y0, self.cell, self.nx, self.ny = x0, y0, cell, nx, ny
        self.bboxes = (
            np.array([p.bbox for p in self.polygons], dtype=float)
            if self.polygons else np.empty((0, 4))
        )
        self.state = np.zeros((ny, nx), dtype=np.int8)
        for poly in self.polygons:
            for ring in poly.rings:
                self._mark_edges(ring)
        for poly in self.polygons:
            self._fill(poly)

    def _cell_span(self, lo: float, hi: float, origin: float, n: int) -> tuple[int, int]:
        i0 = int(np.floor((lo - origin) / self.cell)) - 1
        i1 = int(np.floor((hi - origin) / self.cell)) + 1
        return max(i0, 0), min(i1, n - 1)

    def _mark_edges(self, ring: NDArray[np.float64]) -> None:
        # a cell is mixed if an edge passes within its circumscribed circle
        reach = 0.5 * self.cell * np.sqrt(2.0) * (1 + 1e-9) + EDGE_EPS
        for a, b in zip(ring[:-1], ring[1:]):
            ix0, ix1 = self._cell_span(min(a[0], b[0]), max(a[0], b[0]), self.x0, self.nx)
            iy0, iy1 = self._cell_span(min(a[1], b[1]), max(a[1], b[1]), self.y0, self.ny)
            if ix0 > ix1 or iy0 > iy1:
                continue
            cx = self.x0 + (np.arange(ix0, ix1 + 1) + 0.5) * self.cell
            cy = self.y0 + (np.arange(iy0, iy1 + 1) + 0.5) * self.cell
            gx, gy = np.meshgrid(cx, cy)
            ab = b - a
            len2 = float(ab @ ab) or 1.0
            t = np.clip(((gx - a[0]) * ab[0] + (gy - a[1]) * ab[1]) / len2, 0.0, 1.0)
            d2 = (gx - a[0] - t * ab[0]) ** 2 + (gy - a[1] - t * ab[1]) ** 2
            sub = self.state[iy0:iy1 + 1, ix0:ix1 + 1]
            sub[d2 <= reach * reach] = MIXED

    def _fill(self, poly) -> None:
        xmin, ymin, xmax, ymax = poly.bbox
        ix0, ix1 = self._cell_span(xmin, xmax, self.x0, self.nx)
        iy0, iy1 = self._cell_span(ymin, ymax, self.y0, self.ny)
        if ix0 > ix1 or iy0 > iy1:
            return
        sub = self.state[iy0:iy1 + 1, ix0:ix1 + 1]
        todo = sub == OUTSIDE
        if not todo.any():
            return
        iy, ix = np.nonzero(todo)
        centers = np.column_stack([
            self.x0 + (ix + ix0 + 0.5) * self.cell,
            self.y0 + (iy + iy0 + 0.5) * self.cell,
        ])
        inside = points_in_polygon(centers, poly.rings)
        sub[iy[inside], ix[inside]] = INSIDE

    def cell_states(self, points: NDArray[np.float64], table: NDArray[np.int8] | None = None) -> NDArray[np.int8]:
        """Per-point cell state (or ``table``'s entry for it); points off the lattice are OUTSIDE."""
        table = self.state if table is None else table
        fx = np.floor((points[:, 0] - self.x0) / self.cell)
        fy = np.floor((points[:, 1] - self.y0) / self.cell)
        ok = (fx >= 0) & (fx < self.nx) & (fy >= 0) & (fy < self.ny)
        out = np.zeros(len(points), dtype=np.int8)
        if ok.all():
            return table[fy.astype(np.intp), fx.astype(np.intp)]
        out[ok] = table[fy[ok].astype(np.intp), fx[ok].astype(np.intp)]
        return out

    def contains(self, points: NDArray[np.float64]) -> NDArray[np.bool_]:
        """True where a point lies in (or on the boundary of) any polygon of the layer."""
        if not self.polygons:
            return np.zeros(len(points), dtype=bool)
        st = self.cell_states(points)
        out = st == INSIDE
        mixed = np.flatnonzero(st == MIXED)
        if len(mixed):
            out[mixed] = exact_contains(points[mixed], self.polygons, self.bboxes)
        return out


def exact_contains(points, polygons, bboxes) -> NDArray[np.bool_]:
    """Exact union containment with a bounding-box prefilter."""
    out = np.zeros(len(points), dtype=bool)
    if not polygons:
        return out
    px = points[:, 0:1]
    py = points[:, 1:2]
    hit = (
        (px >= bboxes[None, :, 0] - EDGE_EPS) & (px <= bboxes[None, :, 2] + EDGE_EPS)
        & (py >= bboxes[None, :, 1] - EDGE_EPS) & (py <= bboxes[None, :, 3] + EDGE_EPS)
    )
    for k in np.flatnonzero(hit.any(axis=0)):
        rows = np.flatnonzero(hit[:, k] & ~out)
        if len(rows):
            out[rows] = points_in_polygon(points[rows], polygons[k].rings)
    return out


def lattice_for(bounds: tuple[float, float, float, float], cell: float) -> tuple[float, float, float, int, int]:
    """Pick a lattice covering ``bounds``; coarsens the cell size if the grid gets too large."""
    xmin, ymin, xmax, ymax = bounds
    pad = cell
    w = xmax - xmin + 2 * pad
    h = ymax - ymin + 2 * pad
    while (w / cell) * (h / cell) > MAX_CELLS:
        cell *= 2.0
    nx = max(int(np.ceil(w / cell)), 1)
    ny = max(int(np.ceil(h / cell)), 1)
    return xmin - pad, ymin - pad, cell, nx, ny
