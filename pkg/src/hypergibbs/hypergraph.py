"""Hypergraph structures, horizons, affected sets and range confinement.

A structure turns a configuration into a set of hyperedges. Each hyperedge
carries a horizon: a union of closed balls, plus open half-planes when the
relevant empty region is unbounded. Horizons are stored as flat arrays
(``ball_owner``, ``ball_c``, ``ball_r`` and the half-plane analogues) so the
window tests below are single vectorised passes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeneralPositionViolation, NotAHyperedge, UnsupportedDimension
from .geometry import Configuration, Tessellation, Window, knn_table
from .geometry.primitives import as_points
from .kernels import del2_horizons, scan_table

# relative slack in closed horizon-window tests; applied identically to every
# hyperedge so inclusion stays a function of the hyperedge's own geometry
HIT_TOL = 1e-9


@dataclass(frozen=True)
class StructureId:
    kind: str
    r: float | None = None
    k: int | None = None

    KINDS = ("LC", "Del2", "Del3", "Del2b", "Gab2", "SG", "SGk", "SGb")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown structure {self.kind!r}")
        if self.kind == "LC" and not (self.r is not None and self.r > 0):
            raise ValueError("LC_r needs r > 0")
        if self.kind == "SGk" and not (self.k is not None and self.k >= 1):
            raise ValueError("SGk needs k >= 1")

    @property
    def tag(self) -> str:
        if self.kind == "LC":
            return f"LC_r(r={self.r:g})"
        if self.kind == "SGk":
            return f"SGk(k={self.k})"
        return self.kind

    def __str__(self):
        return self.tag

    @property
    def planar(self) -> bool:
        """Whether the structure needs planar tessellations."""
        return self.kind in ("Del2", "Del3", "Del2b", "Gab2", "SGb")

    @property
    def range_constants(self) -> tuple:
        """``(l_R, n_R, delta_R)`` of the range condition."""
        if self.kind == "LC":
            return (1, 0, float(self.r))
        if self.kind == "SG":
            return (1, 0, 1.0)
        if self.kind == "SGk":
            return (1, int(self.k), 1.0)
        return (2, 0, 1.0)

    @property
    def chain_length(self) -> int:
        """Number of empty discs chained from the window to cover a horizon."""
        return {"Del3": 1, "Gab2": 1, "Del2": 2, "SGb": 2, "Del2b": 3}.get(self.kind, 1)


def LC(r: float) -> StructureId:
    return StructureId("LC", r=float(r))


def SGk(k: int) -> StructureId:
    return StructureId("SGk", k=int(k))


DEL2 = StructureId("Del2")
DEL3 = StructureId("Del3")
DEL2B = StructureId("Del2b")
GAB2 = StructureId("Gab2")
SG = StructureId("SG")
SGB = StructureId("SGb")


def parse_structure(text: str) -> StructureId:
    """Inverse of ``StructureId.tag``; also accepts ``LC:1.5`` and ``SGk:2``."""
    t = text.strip()
    for prefix, kind in (("LC_r(r=", "LC"), ("LC:", "LC"), ("SGk(k=", "SGk"), ("SGk:", "SGk")):
        if t.startswith(prefix):
            val = t[len(prefix):].rstrip(")")
            return LC(float(val)) if kind == "LC" else SGk(int(val))
    return StructureId(t)


@dataclass(frozen=True, eq=False)
class Hyperedge:
    """A hyperedge of the configuration it was enumerated from.

    Equality is by structure and point set, so hyperedges from different
    labellings of the same points compare equal.
    """

    structure: StructureId
    indices: tuple
    points: tuple

    @property
    def eta(self) -> frozenset:
        return frozenset(self.points)

    def __eq__(self, other):
        return (isinstance(other, Hyperedge) and self.structure == other.structure
                and self.eta == other.eta)

    def __hash__(self):
        return hash((self.structure, self.eta))

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return f"Hyperedge({self.structure.tag}, {list(self.points)})"


@dataclass(frozen=True)
class Horizon:
    """Closed region determining a hyperedge and its potential value."""

    balls: tuple
    halfplanes: tuple = ()
    enclosing: tuple | None = None

    @property
    def bounded(self) -> bool:
        return not self.halfplanes

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=np.float64)
        for c, r in self.balls:
            if np.linalg.norm(x - np.asarray(c)) <= r + tol * (1 + r):
                return True
        for n, off in self.halfplanes:
            if np.dot(n, x) >= off:
                return True
        return False


@dataclass
class HyperedgeTable:
    """Hyperedges of one structure on one point array, with flat horizon data."""

    structure: StructureId
    members: np.ndarray
    sizes: np.ndarray
    ball_owner: np.ndarray
    ball_c: np.ndarray
    ball_r: np.ndarray
    hp_owner: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    hp_n: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    hp_c: np.ndarray = field(default_factory=lambda: np.zeros(0))
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    def touches(self, n_interior: int) -> np.ndarray:
        """Hyperedges with a point among the first ``n_interior`` points."""
        m = self.members
        return np.any((m >= 0) & (m < n_interior), axis=1)

    def hits(self, window: Window) -> np.ndarray:
        """Hyperedges whose closed horizon meets ``window``."""
        hit = np.zeros(len(self), dtype=bool)
        if len(self.ball_owner):
            dist = window.distance(self.ball_c)
            ok = dist <= self.ball_r + HIT_TOL * (1.0 + self.ball_r)
            hit[self.ball_owner[ok]] = True
        if len(self.hp_owner):
            ok = window.support(self.hp_n) >= self.hp_c - HIT_TOL * np.abs(self.hp_c)
            hit[self.hp_owner[ok]] = True
        return hit

    def reach(self, window: Window) -> np.ndarray:
        """Largest distance from ``window`` of any horizon point (inf if unbounded)."""
        out = np.zeros(len(self))
        if len(self.ball_owner):
            far = window.distance(self.ball_c) + self.ball_r
            np.maximum.at(out, self.ball_owner, far)
        if len(self.hp_owner):
            out[self.hp_owner] = np.inf
        return out

    def scan(self, n_interior: int, window: Window):
        """``(affected mask, reach)`` in one pass."""
        if window.is_box:
            return scan_table(self.members, n_interior, self.ball_owner, self.ball_c,
                              self.ball_r, self.hp_owner, self.hp_n, self.hp_c, window.lo,
                              window.hi, HIT_TOL)
        return self.touches(n_interior) | self.hits(window), self.reach(window)

    def tuples(self, rows=None) -> list:
        rows = range(len(self)) if rows is None else rows
        return [tuple(int(v) for v in self.members[i, :self.sizes[i]]) for i in rows]


def _empty_table(structure, width=1):
    z = np.zeros(0, np.int64)
    return HyperedgeTable(structure, np.zeros((0, width), np.int64), z, z, np.zeros((0, 2)),
                          np.zeros(0))


class Geometry:
    """Lazily computed geometric data for one point array."""

    def __init__(self, points, check: bool = True, triangulation=None):
        self.points = np.ascontiguousarray(as_points(points), dtype=np.float64)
        self.n = len(self.points)
        self.check = check
        self._tess = None
        self._triangulation = triangulation
        self._knn = {}
        self._lc = {}
        self._tables = {}

    @property
    def tess(self) -> Tessellation:
        if self._tess is None:
            if self.points.shape[1] != 2:
                raise UnsupportedDimension("tessellation structures need d = 2")
            self._tess = Tessellation(self.points, check=self.check,
                                      triangulation=self._triangulation)
        return self._tess

    def knn(self, k: int):
        if k not in self._knn:
            self._knn[k] = knn_table(self.points, k) if self.n >= k + 1 else None
        return self._knn[k]

    def cliques(self, r: float, max_order: int) -> list:
        key = (r, max_order)
        if key not in self._lc:
            self._lc[key] = _cliques(self.points, r, max_order)
        return self._lc[key]

    def table(self, structure: StructureId, max_order: int | None = None) -> HyperedgeTable:
        key = (structure, max_order)
        if key not in self._tables:
            self._tables[key] = _build_table(self, structure, max_order)
        return self._tables[key]


def _cliques(points, r, max_order):
    """All subsets of diameter <= r with at most ``max_order`` points, by size."""
    n = len(points)
    out = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
    if max_order < 2 or n < 2:
        return out
    from scipy.spatial import cKDTree

    pairs = cKDTree(points).query_pairs(r, output_type="ndarray")
    if len(pairs) == 0:
        return out
    # query_pairs works in floating point; re-check with a direct distance
    d = np.sqrt(((points[pairs[:, 0]] - points[pairs[:, 1]]) ** 2).sum(axis=1))
    pairs = np.sort(pairs[d <= r], axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    out.append(pairs.astype(np.int64))
    if max_order < 3:
        return out
    adj = [set() for _ in range(n)]
    for a, b in pairs.tolist():
        adj[a].add(b)
        adj[b].add(a)
    level = [tuple(p) for p in pairs.tolist()]
    for _ in range(3, max_order + 1):
        nxt = []
        for c in level:
            common = set.intersection(*(adj[v] for v in c))
            nxt.extend(c + (w,) for w in sorted(common) if w > c[-1])
        if not nxt:
            break
        out.append(np.array(nxt, dtype=np.int64))
        level = nxt
    return out


def _demote_slivers(tess, owner, c, r, tri, hp=None):
    """Replace circumdisc rows of sliver triangles by their half-planes."""
    if hp is None:
        hp = (np.zeros(0, np.int64), np.zeros((0, 2)), np.zeros(0))
    rows, nrm, off = tess.slivers()
    if len(rows) == 0:
        return (owner, c, r) + tuple(hp)
    lookup = np.full(len(tess.tris), -1, np.int64)
    lookup[rows] = np.arange(len(rows))
    k = lookup[tri]
    bad = k >= 0
    keep = ~bad
    return (owner[keep], c[keep], r[keep], np.concatenate([hp[0], owner[bad]]),
            np.vstack([hp[1], nrm[k[bad]]]), np.concatenate([hp[2], off[k[bad]]]))


def _build_table(geo: Geometry, s: StructureId, max_order) -> HyperedgeTable:
    n = geo.n
    pts = geo.points
    kind = s.kind
    if kind == "SG":
        idx = np.arange(n, dtype=np.int64)
        return HyperedgeTable(s, idx.reshape(-1, 1), np.ones(n, np.int64), idx, pts.copy(),
                              np.zeros(n))
    if kind == "LC":
        groups = geo.cliques(s.r, max_order or 2)
        width = max(g.shape[1] for g in groups)
        members = np.vstack([np.pad(g, ((0, 0), (0, width - g.shape[1])), constant_values=-1)
                             for g in groups])
        sizes = np.concatenate([np.full(len(g), g.shape[1], np.int64) for g in groups])
        owner = np.repeat(np.arange(len(members)), width)
        flat = members.ravel()
        keep = flat >= 0
        return HyperedgeTable(s, members, sizes, owner[keep], pts[flat[keep]],
                              np.zeros(int(keep.sum())))
    if kind == "SGk":
        res = geo.knn(s.k)
        if res is None:
            return _empty_table(s)
        idx, dist = res
        ar = np.arange(n, dtype=np.int64)
        return HyperedgeTable(s, ar.reshape(-1, 1), np.ones(n, np.int64), ar, pts.copy(),
                              dist[:, -1].copy(), extra={"knn": idx, "knn_dist": dist})
    if n == 0:
        return _empty_table(s, 2 if kind in ("Del2", "Gab2", "Del2b") else 1)
    tess = geo.tess
    if kind in ("Del2", "Gab2"):
        e = np.arange(len(tess.edges))
        if kind == "Gab2":
            e = np.flatnonzero(tess.gabriel_mask())
            a = pts[tess.edges[e, 0]]
            b = pts[tess.edges[e, 1]]
            mid = 0.5 * (a + b)
            rad = 0.5 * np.hypot(*(b - a).T)
            ar = np.arange(len(e))
            return HyperedgeTable(s, tess.edges[e], np.full(len(e), 2, np.int64), ar, mid, rad)
        owner, c, r, hp_owner, hp_n, hp_c = del2_horizons(pts, tess.edges, tess.edge_tri,
                                                          tess.cc, tess.cr)
        if len(tess.slivers()[0]):
            et = tess.edge_tri
            tri = np.concatenate([et[et[:, 0] >= 0, 0], et[et[:, 1] >= 0, 1]])
            owner, c, r, hp_owner, hp_n, hp_c = _demote_slivers(
                tess, owner, c, r, tri, (hp_owner, hp_n, hp_c))
        return HyperedgeTable(s, tess.edges, np.full(len(e), 2, np.int64), owner, c, r,
                              hp_owner, hp_n, hp_c)
    if kind == "Del3":
        m = len(tess.tris)
        ar = np.arange(m)
        owner, c, r, ho, hn, hc = _demote_slivers(tess, ar, tess.cc.copy(), tess.cr.copy(), ar)
        return HyperedgeTable(s, tess.canon.copy(), np.full(m, 3, np.int64), owner, c, r,
                              ho, hn, hc)
    ptr, tri = tess.star()
    inner = np.flatnonzero(~tess.hull_vertex)
    counts = ptr[inner + 1] - ptr[inner]
    if kind == "SGb":
        slot = np.repeat(np.arange(len(inner)), counts)
        tris = tri[np.concatenate([np.arange(ptr[i], ptr[i + 1]) for i in inner])
                   if len(inner) else np.zeros(0, np.int64)]
        owner, c, r, ho, hn, hc = _demote_slivers(tess, slot, tess.cc[tris], tess.cr[tris], tris)
        return HyperedgeTable(s, inner.reshape(-1, 1), np.ones(len(inner), np.int64), owner,
                              c, r, ho, hn, hc, extra={"star": (ptr, tri)})
    if kind == "Del2b":
        bounded = ~tess.hull_vertex
        e = np.flatnonzero(bounded[tess.edges[:, 0]] & bounded[tess.edges[:, 1]])
        owners, tris = [], []
        for end in (0, 1):
            v = tess.edges[e, end]
            c = ptr[v + 1] - ptr[v]
            owners.append(np.repeat(np.arange(len(e)), c))
            tris.append(tri[np.concatenate([np.arange(ptr[i], ptr[i + 1]) for i in v])
                            if len(v) else np.zeros(0, np.int64)])
        tris = np.concatenate(tris)
        owner, c, r, ho, hn, hc = _demote_slivers(tess, np.concatenate(owners), tess.cc[tris],
                                                  tess.cr[tris], tris)
        return HyperedgeTable(s, tess.edges[e], np.full(len(e), 2, np.int64), owner, c, r,
                              ho, hn, hc, extra={"star": (ptr, tri)})
    raise ValueError(kind)


def _points_of(config):
    if isinstance(config, Geometry):
        return config.points
    return as_points(config)


def enumerate_hyperedges(structure: StructureId, config, max_order: int | None = None) -> set:
    """All hyperedges of ``config`` under ``structure``.

    For LC_r, subsets up to ``max_order`` points are listed (all cliques
    when omitted).
    """
    pts = _points_of(config)
    geo = config if isinstance(config, Geometry) else Geometry(pts)
    if structure.kind == "LC" and max_order is None:
        max_order = max(1, len(pts))
    table = geo.table(structure, max_order)
    return {_hyperedge(structure, pts, t) for t in table.tuples()}


def _hyperedge(structure, pts, idx):
    idx = tuple(int(i) for i in idx)
    return Hyperedge(structure, idx, tuple(tuple(pts[i].tolist()) for i in idx))


def _locate(table: HyperedgeTable, pts, eta) -> int:
    if isinstance(eta, Hyperedge):
        target = eta.eta
    else:
        target = frozenset(tuple(map(float, p)) for p in eta)
    want = len(target)
    for row in range(len(table)):
        if table.sizes[row] != want:
            continue
        got = frozenset(tuple(pts[i].tolist()) for i in table.members[row, :want])
        if got == target:
            return row
    raise NotAHyperedge(f"{sorted(target)} is not a hyperedge")


def horizon(structure: StructureId, eta, config) -> Horizon:
    """Horizon of ``eta`` in ``config``."""
    pts = _points_of(config)
    geo = config if isinstance(config, Geometry) else Geometry(pts)
    size = len(eta.indices) if isinstance(eta, Hyperedge) else len(eta)
    table = geo.table(structure, size if structure.kind == "LC" else None)
    row = _locate(table, pts, eta)
    sel = table.ball_owner == row
    balls = tuple((tuple(c.tolist()), float(r)) for c, r in zip(table.ball_c[sel], table.ball_r[sel]))
    hsel = table.hp_owner == row
    hps = tuple((tuple(nv.tolist()), float(c)) for nv, c in zip(table.hp_n[hsel], table.hp_c[hsel]))
    if hps:
        enclosing = None
    else:
        cs = np.array([b[0] for b in balls])
        rs = np.array([b[1] for b in balls])
        center = 0.5 * ((cs - rs[:, None]).min(axis=0) + (cs + rs[:, None]).max(axis=0))
        radius = float((np.linalg.norm(cs - center, axis=1) + rs).max())
        enclosing = (tuple(center.tolist()), radius)
    return Horizon(balls, hps, enclosing)


def combined_points(interior, boundary) -> np.ndarray:
    if (isinstance(interior, np.ndarray) and isinstance(boundary, np.ndarray)
            and interior.ndim == 2 and boundary.ndim == 2 and interior.shape[1] == boundary.shape[1]):
        return np.concatenate([interior, boundary])
    zi = as_points(interior)
    zb = as_points(boundary)
    d = zi.shape[1] if zi.size else (zb.shape[1] if zb.size else 2)
    return np.vstack([zi.reshape(-1, d), zb.reshape(-1, d)])


def affected_rows(table: HyperedgeTable, n_interior: int, window: Window) -> np.ndarray:
    return table.touches(n_interior) | table.hits(window)


def affected(structure: StructureId, interior, boundary, window: Window,
             max_order: int | None = None) -> set:
    """Hyperedges of ``interior + boundary`` touching the window or whose horizon meets it.

    Indices refer to the stacked configuration (interior points first).
    """
    pts = combined_points(interior, boundary)
    geo = Geometry(pts)
    if structure.kind == "LC" and max_order is None:
        max_order = max(1, len(pts))
    table = geo.table(structure, max_order)
    rows = np.flatnonzero(affected_rows(table, len(as_points(interior)), window))
    return {_hyperedge(structure, pts, table.members[i, :table.sizes[i]]) for i in rows}


# ---------------------------------------------------------------- confinement


@dataclass
class BoundaryCertificate:
    """Range confinement of a structure from a window.

    ``r`` is the confinement radius: outside ``window`` enlarged by ``r`` the
    configuration does not influence the Hamiltonian. ``boundary_points``
    holds the points of the outside configuration within distance ``r``.
    ``box_*`` fields record the lattice box event used as a coarse
    certificate when a lattice is supplied.
    """

    structure: StructureId
    window: Window
    r: float
    boundary_points: Configuration
    ok: bool
    method: str = "reach"
    box_ok: bool | None = None
    box_n: int | None = None
    box_m: int | None = None
    box_window: Window | None = None
    notes: str = ""

    def in_region(self, points) -> np.ndarray:
        """Points of ``Lambda^r \\ Lambda``."""
        p = np.asarray(points, dtype=np.float64)
        dist = self.window.distance(p)
        return (dist <= self.r) & ~self.window.contains(p)


def _trim(points, window: Window, r: float):
    if len(points) == 0:
        return points
    inside = window.contains(points)
    return points[(window.distance(points) <= r) & ~inside]


def _lens_reach(P: np.ndarray, window: Window, chain: int):
    """Bound on how far empty discs chained from ``window`` can reach.

    Every disc free of ``P`` lies inside the lens (union of the two adjacent
    circumdiscs) of some Delaunay edge of ``P``. Starting from the window,
    each step takes the union of lenses meeting the current region.
    """
    if len(P) < 3:
        return np.inf
    tess = Tessellation(P, check=False)
    if tess.collinear:
        return np.inf
    ne = len(tess.edges)
    dist_c = window.distance(tess.cc) if len(tess.cc) else np.zeros(0)
    far = dist_c + tess.cr
    hp_mask = tess.edge_tri < 0
    hp_e = np.flatnonzero(hp_mask.any(axis=1))
    hp_side = np.where(hp_mask[hp_e, 0], 0, 1)
    nrm, off = tess.halfplane(hp_e, hp_side)
    hp_len = np.linalg.norm(nrm, axis=1)
    sup = window.support(nrm) if len(hp_e) else np.zeros(0)
    edge_far = np.zeros(ne)
    for side in (0, 1):
        t = tess.edge_tri[:, side]
        has = t >= 0
        edge_far[has] = np.maximum(edge_far[has], far[t[has]])
    edge_far[hp_e] = np.inf
    sl_rows, sl_n, sl_c = tess.slivers()
    sl_sup = window.support(sl_n) if len(sl_rows) else np.zeros(0)
    sl_len = np.hypot(sl_n[:, 0], sl_n[:, 1]) if len(sl_rows) else np.zeros(0)
    sliver = np.zeros(len(tess.cr), dtype=bool)
    sliver[sl_rows] = True
    # a side on a sliver reaches infinitely far
    for side in (0, 1):
        t = tess.edge_tri[:, side]
        on = t >= 0
        on[on] = sliver[t[on]]
        edge_far[on] = np.inf
    s = 0.0
    for _ in range(chain):
        hit = np.zeros(ne, dtype=bool)
        for side in (0, 1):
            t = tess.edge_tri[:, side]
            has = t >= 0
            hit[has] |= dist_c[t[has]] <= tess.cr[t[has]] + s + HIT_TOL * (1 + tess.cr[t[has]] + s)
        if len(sl_rows):
            sl_hit = np.zeros(len(tess.cr), dtype=bool)
            sl_hit[sl_rows] = sl_sup + s * sl_len >= sl_c - HIT_TOL * np.abs(sl_c)
            ordinary = ~sliver
            hit[:] = False
            for side in (0, 1):
                t = tess.edge_tri[:, side]
                has = t >= 0
                th = t[has]
                hit[has] |= np.where(ordinary[th], dist_c[th] <= tess.cr[th] + s
                                     + HIT_TOL * (1 + tess.cr[th] + s), sl_hit[th])
        if len(hp_e):
            hit[hp_e[sup + s * hp_len >= off - HIT_TOL * np.abs(off)]] = True
        if not hit.any():
            break
        s = max(s, float(edge_far[hit].max()))
        if not np.isfinite(s):
            return np.inf
    return s


def _knn_reach(P: np.ndarray, window: Window, k: int, n_cap: int = 8):
    """Radius beyond which points cannot enter a k-NN horizon meeting the window."""
    from .geometry import kth_distance

    if len(P) < k + 1:
        return np.inf, P
    dP = kth_distance(P, k)
    dist = window.distance(P)
    cand = dist <= dP * (1 + HIT_TOL)
    r1 = float((dist[cand] + dP[cand]).max()) if cand.any() else 0.0
    corners = window.vertices()
    # an interior point's k-th neighbour is no farther than the k-th farthest-corner bound
    far = np.sqrt(((corners[:, None, :] - P[None, :, :]) ** 2).sum(-1)).max(axis=0)
    r2 = float(np.sort(far)[k - 1])
    r = max(r1, r2)
    r = r * (1 + 1e-9) + 1e-12
    for _ in range(n_cap):
        Pt = _trim(P, window, r)
        if len(Pt) < k + 1:
            return np.inf, Pt
        dt = kth_distance(Pt, k)
        distt = window.distance(Pt)
        bad = (distt <= dt * (1 + HIT_TOL)) & (distt + dt > r)
        if not bad.any():
            return r, Pt
        r = float((distt[bad] + dt[bad]).max()) * (1 + 1e-9) + 1e-12
    return np.inf, P


def box_certificate(structure: StructureId, points, window: Window, lattice, m=None, n=None,
                    n_cap: int = 6):
    """The lattice box event: every translate box except the central one holds more
    than ``n_R`` points. Returns ``(ok, n, m, hat_window)``.
    """
    lR, nR, dR = structure.range_constants
    if m is None:
        m = int(np.ceil(6 * lR * lattice.outer_diameter / lattice.inner_diameter - 1e-12))
    cells = lattice.cell_of(window.vertices())
    n0 = max(1, int(np.abs(cells).max()), int(np.ceil(dR / (6 * lattice.outer_diameter))))
    while not np.all(lattice.box(n0).contains(window.vertices())):
        n0 += 1
    pts = np.asarray(points, dtype=np.float64)
    ns = [n] if n is not None else range(n0, n0 + n_cap)
    jcell = lattice.cell_of(pts) if len(pts) else np.zeros((0, lattice.d), np.int64)
    for nn in ns:
        blk = np.floor_divide(jcell + nn, 2 * nn + 1)
        inside = np.all(np.abs(blk) <= m, axis=1)
        side = 2 * m + 1
        flat = np.ravel_multi_index((blk[inside] + m).T, (side,) * lattice.d)
        counts = np.bincount(flat, minlength=side ** lattice.d)
        center = np.ravel_multi_index(tuple([m] * lattice.d), (side,) * lattice.d)
        counts = np.delete(counts, center)
        if counts.min() > nR:
            return True, nn, m, lattice.box(nn + (2 * nn + 1) * m)
    return False, None, m, None


def confinement(structure: StructureId, config, window: Window, m=None, n=None,
                lattice=None, n_cap: int = 6) -> BoundaryCertificate:
    """Confinement radius of ``structure`` from ``window`` for the outside part of ``config``.

    The radius is a geometric bound: the largest reach of the empty-disc
    chains (tessellations), the k-th neighbour balls (SGk) or the range (LC).
    With a ``lattice``, the box event is evaluated as well.
    """
    pts = as_points(config)
    d = pts.shape[1] if pts.size else window.d
    pts = pts.reshape(-1, d)
    P = pts[~window.contains(pts)] if len(pts) else pts
    kind = structure.kind
    notes = ""
    if kind == "LC":
        r = float(structure.r)
        Pt = _trim(P, window, r * (1 + 1e-12))
        ok = True
    elif kind == "SG":
        r, Pt, ok = 0.0, P[:0], True
    elif kind == "SGk":
        r, Pt = _knn_reach(P, window, structure.k)
        ok = bool(np.isfinite(r))
    else:
        if d != 2:
            raise UnsupportedDimension("tessellation structures need d = 2")
        scale = max(window.diameter, 1e-300)
        r = np.inf
        dist = window.distance(P) if len(P) else np.zeros(0)
        for R0 in (2 * scale, 6 * scale, 20 * scale, np.inf):
            sub = P[dist <= R0]
            r = _lens_reach(sub, window, structure.chain_length)
            if np.isfinite(r) and (R0 == np.inf or r < R0):
                break
            if len(sub) == len(P):
                break
        ok = bool(np.isfinite(r))
        if ok:
            r = r * (1 + 1e-9) + 1e-12 * scale
            Pt = _trim(P, window, r)
        else:
            Pt = P
            notes = "an unbounded empty region reaches the window"
    if not ok:
        r = float("inf")
    cert = BoundaryCertificate(structure, window, float(r), Configuration(Pt, d=d), ok, notes=notes)
    if lattice is not None:
        cert.box_ok, cert.box_n, cert.box_m, cert.box_window = box_certificate(
            structure, P, window, lattice, m=m, n=n, n_cap=n_cap)
    return cert


def confinement_radius_check(table: HyperedgeTable, rows: np.ndarray, window: Window,
                             r: float) -> bool:
    """Whether every selected horizon stays within ``window`` enlarged by ``r``."""
    if len(rows) == 0:
        return True
    reach = table.reach(window)[rows]
    return bool(np.all(reach <= r * (1 + 1e-7) + 1e-9))


# ---------------------------------------------------------------- verification


def perturb_outside_test(structure: StructureId, potential, config, window: Window,
                         trials: int, rng, r: float | None = None, count: int = 5) -> dict:
    """Randomised check that points beyond the confinement radius do not matter.

    The interior is ``config`` inside the window and the boundary the rest.
    Each trial adds points just outside the certified region and deletes
    points beyond it, then compares every affected hyperedge and its value.
    Passing ``r`` overrides the certified radius (to exhibit failures).
    """
    from .potential import table_values

    pts = as_points(config)
    inside = window.contains(pts)
    zeta, outside = pts[inside], pts[~inside]
    cert = confinement(structure, outside, window)
    if not cert.ok:
        return {"passed": False, "trials": 0, "failures": 0, "reason": "not confined"}
    radius = cert.r if r is None else float(r)
    max_order = getattr(potential, "max_order", None)

    def snapshot(boundary):
        P = combined_points(zeta, boundary)
        geo = Geometry(P)
        table = geo.table(structure, max_order)
        rows = np.flatnonzero(affected_rows(table, len(zeta), window))
        vals = table_values(potential, structure, geo, table, rows)
        return {_hyperedge(structure, P, table.members[i, :table.sizes[i]]): v
                for i, v in zip(rows, vals)}

    base = snapshot(outside)
    failures = 0
    lo, hi = window.lo - radius - 1.0, window.hi + radius + 1.0
    for _ in range(trials):
        far = window.distance(outside) > radius
        drop = far & (rng.random(len(outside)) < 0.5)
        kept = outside[~drop]
        extra = []
        while len(extra) < count:
            q = lo + rng.random(len(lo)) * (hi - lo)
            if window.distance(q[None])[0] > radius:
                extra.append(q)
        pert = np.vstack([kept, np.array(extra)])
        try:
            snap = snapshot(pert)
        except GeneralPositionViolation:
            continue
        same = snap.keys() == base.keys() and all(
            (snap[h] == base[h]) or (np.isnan(snap[h]) and np.isnan(base[h])) for h in base)
        failures += not same
    return {"passed": failures == 0, "trials": trials, "failures": failures, "r": radius}
