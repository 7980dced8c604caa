"""Delaunay, Voronoi and Gabriel geometry in the plane."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import GeneralPositionViolation
from ..kernels import clip_cell, orient2d, tess_tables, triangulate
from .primitives import Configuration, as_points


def lex_rank(points: np.ndarray) -> np.ndarray:
    """Rank of each point in lexicographic coordinate order."""
    order = np.lexsort(points.T[::-1])
    rank = np.empty(len(points), dtype=np.int64)
    rank[order] = np.arange(len(points))
    return rank


def canonical_vertices(tris: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Each vertex triple reordered lexicographically by coordinates.

    Geometric quantities computed from canonical order do not depend on how
    the configuration was labelled, so equal triangles give equal floats.
    """
    if len(tris) == 0:
        return tris
    idx = np.argsort(rank[tris], axis=1)
    return np.take_along_axis(tris, idx, axis=1)


def circumcircles(points: np.ndarray, tris: np.ndarray):
    """Circumcenters and radii of triangles given in canonical vertex order."""
    p0 = points[tris[:, 0]]
    b = points[tris[:, 1]] - p0
    c = points[tris[:, 2]] - p0
    bb = (b * b).sum(axis=1)
    cc = (c * c).sum(axis=1)
    den = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    ux = (c[:, 1] * bb - b[:, 1] * cc) / den
    uy = (b[:, 0] * cc - c[:, 0] * bb) / den
    return p0 + np.column_stack([ux, uy]), np.hypot(ux, uy)


# circumradius over longest edge above which a triangle's disc is treated as a half-plane
SLIVER_RATIO = 1e6


def _exact_circles(points, canon, rows, cc, cr):
    """Rational circumcircles for slivers whose float determinant vanished."""
    for t in rows:
        p0, p1, p2 = ([Fraction(float(v)) for v in points[i]] for i in canon[t])
        bx, by = p1[0] - p0[0], p1[1] - p0[1]
        cx, cy = p2[0] - p0[0], p2[1] - p0[1]
        den = 2 * (bx * cy - by * cx)
        if den == 0:
            continue
        bb, c2 = bx * bx + by * by, cx * cx + cy * cy
        ux = (cy * bb - by * c2) / den
        uy = (bx * c2 - cx * bb) / den
        cc[t] = (float(p0[0] + ux), float(p0[1] + uy))
        cr[t] = float(np.hypot(float(ux), float(uy)))


def _dot_sign_exact(a, b, c):
    """Exact sign of (a - c) . (b - c)."""
    a, b, c = ([Fraction(v) for v in p] for p in (a, b, c))
    s = (a[0] - c[0]) * (b[0] - c[0]) + (a[1] - c[1]) * (b[1] - c[1])
    return (s > 0) - (s < 0)


class Tessellation:
    """Delaunay triangulation of a planar point array and derived tables.

    ``edges`` are index pairs ``(i, j)`` with ``i < j``. For each edge,
    side 0 is the left of ``i -> j`` and side 1 the right; ``edge_tri`` gives
    the triangle on each side (-1 for the unbounded hull side) and
    ``edge_opp`` its third vertex. A precomputed ``(tris, nbrs, degenerate)``
    triple may be passed as ``triangulation``.
    """

    def __init__(self, points, check: bool = True, triangulation=None):
        pts = np.ascontiguousarray(as_points(points), dtype=np.float64).reshape(-1, 2)
        self.points = pts
        self.n = n = len(pts)
        if triangulation is None:
            triangulation = triangulate(pts, check)
        tris, nbrs, degenerate = triangulation
        if check and degenerate:
            raise GeneralPositionViolation("four or more points on an empty circle")
        self.tris = tris
        self.nbrs = nbrs
        self.collinear = n >= 2 and len(tris) == 0
        self._star = None
        self._rank = None
        self._slivers = None
        if len(tris):
            (self.canon, self.cc, self.cr, self.edges, self.edge_tri, self.edge_opp,
             self.hull_vertex) = tess_tables(pts, tris, nbrs)
            bad = ~(np.isfinite(self.cr) & np.isfinite(self.cc).all(axis=1))
            if bad.any():
                _exact_circles(pts, self.canon, np.flatnonzero(bad), self.cc, self.cr)
        else:
            self.canon = tris
            self.cc = np.zeros((0, 2))
            self.cr = np.zeros(0)
            order = np.lexsort(pts.T[::-1]) if n else np.zeros(0, np.int64)
            e = np.column_stack([order[:-1], order[1:]]) if n >= 2 else np.zeros((0, 2), np.int64)
            self.edges = np.sort(e, axis=1).astype(np.int64)
            self.edge_tri = np.full((len(e), 2), -1, dtype=np.int64)
            self.edge_opp = np.full((len(e), 2), -1, dtype=np.int64)
            self.hull_vertex = np.ones(n, dtype=bool)

    @property
    def rank(self) -> np.ndarray:
        if self._rank is None:
            self._rank = lex_rank(self.points) if self.n else np.zeros(0, np.int64)
        return self._rank

    @property
    def hull_edges(self) -> np.ndarray:
        return np.any(self.edge_tri < 0, axis=1)

    def halfplane(self, e: np.ndarray, side: np.ndarray):
        """Open half-plane ``{y : n . y > c}`` on the given side of edges ``e``."""
        a = self.points[self.edges[e, 0]]
        b = self.points[self.edges[e, 1]]
        d = b - a
        nrm = np.column_stack([-d[:, 1], d[:, 0]])
        nrm = np.where((np.asarray(side) == 0)[:, None], nrm, -nrm)
        return nrm, (nrm * a).sum(axis=1)

    def slivers(self):
        """``(rows, normals, offsets)`` of near-degenerate triangles.

        The circumdisc of such a triangle is contained in the half-plane
        ``{y : n . y > c}`` beyond its longest edge, away from the third
        vertex, widened by the sagitta of the disc over that edge.
        """
        if self._slivers is None:
            e = np.zeros((0, 2))
            self._slivers = (np.zeros(0, np.int64), e, np.zeros(0))
            if len(self.tris):
                p = self.points[self.canon]
                ln = np.stack([np.hypot(*(p[:, (j + 1) % 3] - p[:, j]).T) for j in range(3)], 1)
                rows = np.flatnonzero(self.cr > SLIVER_RATIO * ln.max(axis=1))
                if len(rows):
                    self._slivers = self._sliver_planes(p[rows], ln[rows], rows)
        return self._slivers

    def _sliver_planes(self, p, ln, rows):
        j = ln.argmax(axis=1)
        ar = np.arange(len(rows))
        a, b, c = p[ar, j], p[ar, (j + 1) % 3], p[ar, (j + 2) % 3]
        d = b - a
        nrm = np.column_stack([-d[:, 1], d[:, 0]])
        side = np.array([orient2d(*a[i], *b[i], *c[i]) for i in ar], dtype=np.float64)
        # c lies on the left of a -> b exactly when side > 0; point away from it
        nrm = np.where((side > 0)[:, None], -nrm, nrm)
        L = ln[ar, j]
        R = self.cr[rows]
        sag = L * L / (8.0 * R) * (1 + 1e-6) + 4e-16 * (np.abs(a).sum(axis=1) + L)
        off = (nrm * a).sum(axis=1) - np.hypot(nrm[:, 0], nrm[:, 1]) * sag
        return rows, nrm, off

    def star(self):
        """Triangles around each vertex in counter-clockwise order (CSR arrays)."""
        if self._star is None:
            m = len(self.tris)
            vert = self.tris.ravel()
            tri = np.repeat(np.arange(m), 3)
            if m:
                rel = self.cc[tri] - self.points[vert]
                ang = np.arctan2(rel[:, 1], rel[:, 0])
            else:
                ang = np.zeros(0)
            order = np.lexsort((ang, vert))
            counts = np.bincount(vert, minlength=self.n)
            ptr = np.r_[0, np.cumsum(counts)]
            self._star = (ptr, tri[order])
        return self._star

    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def neighbours(self, i: int) -> np.ndarray:
        e = self.edges
        return np.sort(np.r_[e[e[:, 0] == i, 1], e[e[:, 1] == i, 0]])

    def gabriel_mask(self) -> np.ndarray:
        """Delaunay edges whose open diametral disc is empty."""
        ne = len(self.edges)
        keep = np.ones(ne, dtype=bool)
        pts = self.points
        for s in (0, 1):
            has = self.edge_opp[:, s] >= 0
            e = np.flatnonzero(has)
            a = pts[self.edges[e, 0]]
            b = pts[self.edges[e, 1]]
            c = pts[self.edge_opp[e, s]]
            p1 = (a[:, 0] - c[:, 0]) * (b[:, 0] - c[:, 0])
            p2 = (a[:, 1] - c[:, 1]) * (b[:, 1] - c[:, 1])
            dot = p1 + p2
            bound = 8.0 * 2.0 ** -53 * (np.abs(p1) + np.abs(p2))
            sign = np.sign(dot)
            unsure = np.abs(dot) <= bound
            for j in np.flatnonzero(unsure):
                sign[j] = _dot_sign_exact(a[j], b[j], c[j])
            keep[e[sign < 0]] = False
        return keep

    def cell_polygon(self, i: int) -> np.ndarray:
        """Voronoi cell of interior vertex ``i`` as the ring of circumcenters."""
        ptr, tri = self.star()
        return self.cc[tri[ptr[i]:ptr[i + 1]]]


def delaunay(config, check: bool = True) -> dict:
    """Delaunay hyperedges ``{1: singletons, 2: edges, 3: triangles}`` as index tuples."""
    pts = as_points(config)
    tess = Tessellation(pts, check=check)
    return {
        1: [(i,) for i in range(tess.n)],
        2: [tuple(e) for e in tess.edges.tolist()],
        3: [tuple(sorted(t)) for t in tess.tris.tolist()],
    }


def gabriel_edges(config) -> list:
    tess = Tessellation(as_points(config))
    return [tuple(e) for e in tess.edges[tess.gabriel_mask()].tolist()]


def hull_boundary_mask(points) -> np.ndarray:
    """Points lying on the boundary of the convex hull (exact predicates)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n <= 2:
        return np.ones(n, dtype=bool)
    order = np.lexsort(pts.T[::-1]).tolist()

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and orient2d(*pts[out[-2]], *pts[out[-1]], *pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    ring = lower[:-1] + upper[:-1]
    mask = np.zeros(n, dtype=bool)
    mask[ring] = True
    if len(set(ring)) <= 2:
        return np.ones(n, dtype=bool)
    for j in range(len(ring)):
        a, b = pts[ring[j]], pts[ring[(j + 1) % len(ring)]]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        box = np.all((pts >= lo) & (pts <= hi), axis=1) & ~mask
        for i in np.flatnonzero(box):
            if orient2d(*a, *b, *pts[i]) == 0:
                mask[i] = True
    return mask


@dataclass(frozen=True)
class VoronoiCell:
    """Voronoi cell of one generator.

    ``vertices`` run counter-clockwise; ``neighbours[j]`` is the generator
    across the edge from vertex ``j`` to ``j+1`` (-1 where the clipping box
    cuts an unbounded cell).
    """

    generator: int
    vertices: np.ndarray
    neighbours: np.ndarray
    bounded: bool

    @property
    def area(self) -> float:
        if not self.bounded:
            return float("inf")
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def perimeter(self) -> float:
        if not self.bounded:
            return float("inf")
        return float(np.hypot(*(np.roll(self.vertices, -1, axis=0) - self.vertices).T).sum())

    @property
    def faces(self) -> int:
        return len(self.vertices)


def voronoi_cell(config, x, box=None, bounded_mask=None) -> VoronoiCell:
    """Voronoi cell of ``x`` computed by half-plane clipping.

    Unbounded cells (generators on the convex hull) are clipped to ``box``,
    which defaults to ten times the configuration's bounding box.
    """
    pts = as_points(config)
    if isinstance(x, (int, np.integer)):
        i = int(x)
    else:
        if not isinstance(config, Configuration):
            config = Configuration(pts)
        i = config.index_of(x)
    if bounded_mask is None:
        bounded_mask = ~hull_boundary_mask(pts)
    bounded = bool(bounded_mask[i])
    order = np.argsort(((pts - pts[i]) ** 2).sum(axis=1), kind="stable")
    if box is not None:
        verts, gens = clip_cell(pts, i, order, box)
        return VoronoiCell(i, verts, gens, bounded)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1.0)
    mid = 0.5 * (lo + hi)
    scale = 5.0
    while True:
        verts, gens = clip_cell(pts, i, order, (*(mid - scale * span), *(mid + scale * span)))
        # a bounded cell may reach far out through a sliver; grow until no box face is left
        if not bounded or np.all(np.asarray(gens) >= 0) or scale > 1e150:
            return VoronoiCell(i, verts, gens, bounded)
        scale *= 1e3
