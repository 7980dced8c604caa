"""Hyperedge potentials and their metadata.

Every potential evaluates a batch of hyperedges from a ``HyperedgeTable``
at once and returns floats, with ``inf`` for forbidden hyperedges.
Geometric quantities are computed from a canonical vertex order so that
geometrically equal hyperedges receive bit-identical values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GeometryDegenerate, NotAHyperedge, StructureMismatch
from .hypergraph import (DEL2, DEL2B, DEL3, GAB2, SG, SGB, Geometry, Hyperedge, HyperedgeTable,
                         LC, SGk, StructureId, _locate)
from .geometry.primitives import as_points

INF = math.inf

# bound on hyperedges per point used for the stability constant c_S = C * c_phi
SUBLINEARITY = {"SG": 1, "SGk": 1, "SGb": 1, "Del2": 3, "Gab2": 3, "Del2b": 3, "Del3": 2}


# ---------------------------------------------------------------- profiles


class Profile:
    """Vectorised real function with known bounds."""

    lower: float = -INF
    upper: float = INF

    def __call__(self, *args):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} cannot be serialised")


@dataclass(frozen=True)
class ConstantProfile(Profile):
    value: float = 0.0

    def __call__(self, x, *rest):
        return np.full(np.shape(x)[:1] if np.ndim(x) else (), float(self.value))

    @property
    def lower(self):
        return float(self.value)

    @property
    def upper(self):
        return float(self.value)

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class PowerProfile(Profile):
    """``k0 + k1 * x**alpha``."""

    k0: float = 0.0
    k1: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.k0 < 0 or self.k1 < 0 or self.alpha <= 0:
            raise ValueError("need k0 >= 0, k1 >= 0, alpha > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.k0 + self.k1 * x ** self.alpha

    @property
    def lower(self):
        return float(self.k0)

    @property
    def upper(self):
        return float(self.k0) if self.k1 == 0 else INF

    def to_dict(self):
        return {"kind": "power", "k0": self.k0, "k1": self.k1, "alpha": self.alpha}


@dataclass(frozen=True)
class PiecewiseProfile(Profile):
    """Table of breakpoints and values.

    ``step``: ``values[i]`` on ``[breaks[i], breaks[i+1])``, ``values[0]``
    below the first breakpoint and ``values[-1]`` from the last one on.
    ``linear``: linear interpolation, constant outside the table.
    Values may be ``inf``.
    """

    breaks: tuple
    values: tuple
    kind: str = "step"

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if len(b) == 0 or len(b) != len(v):
            raise ValueError("breaks and values must be non-empty and of equal length")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breaks must increase strictly")
        if self.kind not in ("step", "linear"):
            raise ValueError("kind must be 'step' or 'linear'")
        if self.kind == "linear" and not np.all(np.isfinite(v)):
            raise ValueError("linear profiles need finite values")
        object.__setattr__(self, "breaks", tuple(b.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        b = np.asarray(self.breaks)
        v = np.asarray(self.values)
        if self.kind == "linear":
            return np.interp(x, b, v)
        i = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(v) - 1)
        return v[i]

    @property
    def lower(self):
        return float(min(self.values))

    @property
    def upper(self):
        return float(max(self.values))

    def to_dict(self):
        return {"kind": "piecewise", "breaks": list(self.breaks), "values": list(self.values),
                "mode": self.kind}


@dataclass(frozen=True)
class FunctionProfile(Profile):
    """Wraps a vectorised closure; the caller states its bounds."""

    f: Callable
    lower: float = -INF
    upper: float = INF

    def __call__(self, *args):
        return np.asarray(self.f(*args), dtype=np.float64)


def profile_from_dict(d) -> Profile:
    if isinstance(d, (int, float)):
        return ConstantProfile(float(d))
    kind = d.get("kind")
    if kind == "constant":
        return ConstantProfile(float(d["value"]))
    if kind == "power":
        return PowerProfile(float(d.get("k0", 0.0)), float(d.get("k1", 1.0)), float(d.get("alpha", 1.0)))
    if kind == "piecewise":
        return PiecewiseProfile(tuple(d["breaks"]), tuple(d["values"]), d.get("mode", "step"))
    raise ValueError(f"unknown profile kind {kind!r}")


# ---------------------------------------------------------------- potentials


class Potential:
    """Base class: a hyperedge potential on one structure."""

    structure: StructureId
    max_order = None

    @property
    def structures(self) -> tuple:
        return (self.structure,)

    @property
    def c_phi(self) -> float:
        raise NotImplementedError

    @property
    def hard_exclusion(self) -> bool:
        raise NotImplementedError

    @property
    def scale_invariant(self) -> bool:
        return False

    def values(self, geo: Geometry, table: HyperedgeTable, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} cannot be serialised")


def _neg(x) -> float:
    return max(0.0, -float(x))


def _edge_lengths(pts, members):
    d = pts[members[:, 1]] - pts[members[:, 0]]
    return np.hypot(d[:, 0], d[:, 1])


SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Zero(Potential):
    """The zero potential (on singletons)."""

    structure: StructureId = SG

    @property
    def c_phi(self):
        return 0.0

    @property
    def hard_exclusion(self):
        return False

    @property
    def scale_invariant(self):
        return True

    def values(self, geo, table, rows):
        return np.zeros(len(rows))

    def to_dict(self):
        return {"variant": "Zero"}


@dataclass(frozen=True)
class Singleton(Potential):
    """Constant activity shift ``phi({x}) = c`` on singletons."""

    c: float = 0.0

    structure = SG

    @property
    def c_phi(self):
        return _neg(self.c)

    @property
    def hard_exclusion(self):
        return self.c == INF

    @property
    def scale_invariant(self):
        return True

    def values(self, geo, table, rows):
        return np.full(len(rows), float(self.c))

    def to_dict(self):
        return {"variant": "Singleton", "c": self.c}


@dataclass(frozen=True)
class PolyEdge(Potential):
    """Edge-length potential on Delaunay (or Gabriel) edges.

    The profile defaults to ``k0 + k1 * l**alpha``; a custom profile must
    stay below that bound.
    """

    k0: float = 0.0
    k1: float = 1.0
    alpha: float = 1.0
    profile: Profile | None = None
    gabriel: bool = False

    def __post_init__(self):
        if self.k0 < 0 or self.k1 < 0 or self.alpha <= 0:
            raise ValueError("need k0 >= 0, k1 >= 0, alpha > 0")
        if self.profile is None:
            object.__setattr__(self, "profile", PowerProfile(self.k0, self.k1, self.alpha))

    @property
    def structure(self):
        return GAB2 if self.gabriel else DEL2

    @property
    def c_phi(self):
        return _neg(self.profile.lower)

    @property
    def hard_exclusion(self):
        return self.profile.upper == INF and not isinstance(self.profile, PowerProfile)

    def bound(self, length):
        return self.k0 + self.k1 * np.asarray(length, dtype=np.float64) ** self.alpha

    def values(self, geo, table, rows):
        return self.profile(_edge_lengths(geo.points, table.members[rows]))

    def to_dict(self):
        d = {"variant": "PolyEdge", "k0": self.k0, "k1": self.k1, "alpha": self.alpha,
             "gabriel": self.gabriel}
        if not isinstance(self.profile, PowerProfile):
            d["profile"] = self.profile.to_dict()
        return d


@dataclass(frozen=True)
class LongEdgeExclusion(Potential):
    """Edge potential that forbids Delaunay edges longer than ``l2``.

    ``inner`` gives the value for admissible lengths; ``r0 > 0`` adds a
    hard core below ``r0``.
    """

    l0: float
    l1: float
    l2: float
    inner: Profile = field(default_factory=lambda: ConstantProfile(0.0))
    r0: float = 0.0

    structure = DEL2

    def __post_init__(self):
        if not (0 <= self.l0 < self.l1 <= self.l2):
            raise ValueError("need 0 <= l0 < l1 <= l2")
        if not (0 <= self.r0 <= self.l0 or self.r0 == 0):
            raise ValueError("hard core must lie below l0")
        grid = np.linspace(self.l0, self.l1, 257)
        if not np.all(np.isfinite(self.inner(grid))):
            raise ValueError("inner profile must be finite on [l0, l1]")

    @property
    def c_phi(self):
        return _neg(self.inner.lower)

    @property
    def hard_exclusion(self):
        return True

    def values(self, geo, table, rows):
        ell = _edge_lengths(geo.points, table.members[rows])
        out = np.asarray(self.inner(ell), dtype=np.float64).copy()
        out[ell > self.l2] = INF
        if self.r0 > 0:
            out[ell < self.r0] = INF
        return out

    def to_dict(self):
        return {"variant": "LongEdgeExclusion", "l0": self.l0, "l1": self.l1, "l2": self.l2,
                "r0": self.r0, "inner": self.inner.to_dict()}


def triangle_angles(pts, tris):
    """Smallest and largest interior angle of each triangle (canonical vertex order)."""
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    ang = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u = q - p
        v = r - p
        cos = (u * v).sum(axis=1) / (np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1]))
        ang.append(np.arccos(np.clip(cos, -1.0, 1.0)))
    ang = np.column_stack(ang)
    return ang.min(axis=1), ang.max(axis=1)


@dataclass(frozen=True)
class PolyTriangle(Potential):
    """Triangle potential driven by the circumdiameter ``delta``."""

    k0: float = 0.0
    k1: float = 1.0
    alpha: float = 1.0
    profile: Profile | None = None

    structure = DEL3

    def __post_init__(self):
        if self.k0 < 0 or self.k1 < 0 or self.alpha <= 0:
            raise ValueError("need k0 >= 0, k1 >= 0, alpha > 0")
        if self.profile is None:
            object.__setattr__(self, "profile", PowerProfile(self.k0, self.k1, self.alpha))

    @property
    def c_phi(self):
        return _neg(self.profile.lower)

    @property
    def hard_exclusion(self):
        return self.profile.upper == INF and not isinstance(self.profile, PowerProfile)

    def values(self, geo, table, rows):
        return self.profile(2.0 * geo.tess.cr[rows])

    def to_dict(self):
        d = {"variant": "PolyTriangle", "k0": self.k0, "k1": self.k1, "alpha": self.alpha}
        if not isinstance(self.profile, PowerProfile):
            d["profile"] = self.profile.to_dict()
        return d


@dataclass(frozen=True)
class AngleTriangle(Potential):
    """Shape potential ``phi(beta, gamma)`` of the smallest and largest angle.

    ``profile`` must be finite whenever ``beta > pi/3 - delta``.
    """

    profile: Profile
    delta: float

    structure = DEL3

    def __post_init__(self):
        if not 0 < self.delta:
            raise ValueError("delta must be positive")
        beta = np.linspace(max(math.pi / 3 - self.delta, 0.0) + 1e-9, math.pi / 3, 33)
        bb, gg = np.meshgrid(beta, np.linspace(math.pi / 3, math.pi - 2e-9, 33))
        ok = gg >= bb
        if not np.all(np.isfinite(self.profile(bb[ok], gg[ok]))):
            raise ValueError("profile must be finite above pi/3 - delta")

    @property
    def c_phi(self):
        return _neg(self.profile.lower)

    @property
    def hard_exclusion(self):
        return self.profile.upper == INF

    @property
    def scale_invariant(self):
        return True

    def values(self, geo, table, rows):
        beta, gamma = triangle_angles(geo.points, geo.tess.canon[rows])
        return self.profile(beta, gamma)


@dataclass(frozen=True)
class HardEquilateral(Potential):
    """Forbids Delaunay triangles with an angle at most ``pi/3 - delta``."""

    delta: float

    structure = DEL3

    def __post_init__(self):
        if not 0 < self.delta < math.pi / 3:
            raise ValueError("delta must lie in (0, pi/3)")

    @property
    def c_phi(self):
        return 0.0

    @property
    def hard_exclusion(self):
        return True

    @property
    def scale_invariant(self):
        return True

    def values(self, geo, table, rows):
        beta, _ = triangle_angles(geo.points, geo.tess.canon[rows])
        return np.where(beta <= math.pi / 3 - self.delta, INF, 0.0)

    def to_dict(self):
        return {"variant": "HardEquilateral", "delta": self.delta}


def _zero_cluster(points):
    return np.zeros(len(points))


@dataclass(frozen=True)
class ForcedClustering(Potential):
    """k-nearest-neighbour potential forcing each point's k neighbours within ``delta``.

    ``phi`` maps an ``(m, k+1, d)`` array (the point followed by its
    neighbours in order) to ``m`` values with ``|phi| <= phi_sup``.
    """

    k: int
    delta: float
    phi: Callable = _zero_cluster
    phi_sup: float = 0.0

    def __post_init__(self):
        if self.k < 1 or self.delta <= 0:
            raise ValueError("need k >= 1 and delta > 0")

    @property
    def structure(self):
        return SGk(self.k)

    @property
    def c_phi(self):
        return float(self.phi_sup)

    @property
    def hard_exclusion(self):
        return True

    def values(self, geo, table, rows):
        if len(rows) == 0:
            return np.zeros(0)
        nb = table.extra["knn"][rows]
        pts = geo.points
        cluster = np.concatenate([pts[rows][:, None, :], pts[nb]], axis=1)
        diff = cluster[:, :, None, :] - cluster[:, None, :, :]
        diam = np.sqrt((diff * diff).sum(-1)).max(axis=(1, 2))
        out = np.asarray(self.phi(cluster), dtype=np.float64).copy()
        out[~(diam < self.delta)] = INF
        return out

    def to_dict(self):
        if self.phi is not _zero_cluster:
            raise TypeError("custom cluster functions cannot be serialised")
        return {"variant": "ForcedClustering", "k": self.k, "delta": self.delta}


def cell_features(geo: Geometry, verts: np.ndarray) -> dict:
    """Faces, area and perimeter of the bounded Voronoi cells of ``verts``.

    Each cell is the counter-clockwise ring of circumcenters of the star,
    started at its lexicographically smallest vertex.
    """
    tess = geo.tess
    ptr, tri = tess.star()
    verts = np.asarray(verts, dtype=np.int64)
    counts = ptr[verts + 1] - ptr[verts]
    if len(verts) == 0:
        z = np.zeros(0)
        return {"faces": z.astype(np.int64), "area": z, "perimeter": z}
    if tess.hull_vertex[verts].any():
        raise GeometryDegenerate("cell is unbounded")
    starts = np.repeat(ptr[verts], counts)
    gid = np.repeat(np.arange(len(verts)), counts)
    first = np.r_[0, np.cumsum(counts)[:-1]]
    local = np.arange(len(gid)) - first[gid]
    c = tess.cc[tri[starts + local]] - geo.points[verts][gid]
    order = np.lexsort((c[:, 1], c[:, 0], gid))
    lead = local[order[first]]
    pos = (local - lead[gid]) % counts[gid]
    ring = np.empty_like(c)
    ring[first[gid] + pos] = c
    succ = ring[first[gid] + (local + 1) % counts[gid]]
    cross = ring[:, 0] * succ[:, 1] - succ[:, 0] * ring[:, 1]
    edge = np.hypot(succ[:, 0] - ring[:, 0], succ[:, 1] - ring[:, 1])
    area = 0.5 * np.add.reduceat(cross, first)
    perim = np.add.reduceat(edge, first)
    return {"faces": counts.astype(np.int64), "area": area, "perimeter": perim}


CELL_FEATURES = ("faces", "area", "perimeter")


@dataclass(frozen=True)
class VoronoiCell(Potential):
    """``phi(Vor(x))`` for bounded cells, as a profile of one cell feature."""

    feature: str
    profile: Profile

    structure = SGB

    def __post_init__(self):
        if self.feature not in CELL_FEATURES:
            raise ValueError(f"feature must be one of {CELL_FEATURES}")

    @property
    def c_phi(self):
        return _neg(self.profile.lower)

    @property
    def hard_exclusion(self):
        return self.profile.upper == INF

    @property
    def scale_invariant(self):
        return self.feature == "faces"

    def values(self, geo, table, rows):
        feats = cell_features(geo, table.members[rows, 0])
        return self.profile(feats[self.feature].astype(np.float64))

    def to_dict(self):
        return {"variant": "VoronoiCell", "feature": self.feature, "profile": self.profile.to_dict()}


@dataclass(frozen=True)
class DistortedTriangular(Potential):
    """0 if the bounded Voronoi cell has six edges, inf otherwise."""

    structure = SGB

    @property
    def c_phi(self):
        return 0.0

    @property
    def hard_exclusion(self):
        return True

    @property
    def scale_invariant(self):
        return True

    def values(self, geo, table, rows):
        ptr, _ = geo.tess.star()
        v = table.members[rows, 0]
        return np.where(ptr[v + 1] - ptr[v] == 6, 0.0, INF)

    def to_dict(self):
        return {"variant": "DistortedTriangular"}


PAIR_FEATURES = ("common_edge", "area_ratio")


@dataclass(frozen=True)
class AdjacentVoronoi(Potential):
    """Bounded functional of two adjacent bounded Voronoi cells.

    ``common_edge`` is the length of the shared Voronoi edge and
    ``area_ratio`` the smaller cell area over the larger one.
    """

    feature: str
    profile: Profile

    structure = DEL2B

    def __post_init__(self):
        if self.feature not in PAIR_FEATURES:
            raise ValueError(f"feature must be one of {PAIR_FEATURES}")
        if not (np.isfinite(self.profile.lower) and np.isfinite(self.profile.upper)):
            raise ValueError("profile must be bounded")

    @property
    def c_phi(self):
        return _neg(self.profile.lower)

    @property
    def hard_exclusion(self):
        return False

    @property
    def scale_invariant(self):
        return self.feature == "area_ratio"

    def values(self, geo, table, rows):
        tess = geo.tess
        m = table.members[rows]
        if self.feature == "common_edge":
            key = {tuple(e): i for i, e in enumerate(tess.edges.tolist())}
            e = np.array([key[(int(a), int(b))] for a, b in m], dtype=np.int64)
            t = tess.edge_tri[e]
            d = tess.cc[t[:, 0]] - tess.cc[t[:, 1]]
            x = np.hypot(d[:, 0], d[:, 1])
        else:
            u, inv = np.unique(m.ravel(), return_inverse=True)
            area = cell_features(geo, u)["area"][inv].reshape(-1, 2)
            x = area.min(axis=1) / area.max(axis=1)
        return self.profile(x)

    def to_dict(self):
        return {"variant": "AdjacentVoronoi", "feature": self.feature,
                "profile": self.profile.to_dict()}


@dataclass(frozen=True)
class ManyBody(Potential):
    """Finite-range many-body potential on ``LC_r``.

    ``terms`` maps a cardinality to a constant, to a profile of the
    distance (pairs) or to a profile of the ``(m, s, d)`` point array
    (lexicographically sorted within each hyperedge). Missing orders are 0.
    """

    r: float
    terms: tuple = ()

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        t = dict(self.terms) if not isinstance(self.terms, dict) else self.terms
        t = {int(k): (ConstantProfile(float(v)) if isinstance(v, (int, float)) else v)
             for k, v in t.items()}
        if any(k < 1 for k in t):
            raise ValueError("orders must be >= 1")
        object.__setattr__(self, "terms", tuple(sorted(t.items())))

    @property
    def structure(self):
        return LC(self.r)

    @property
    def max_order(self):
        return max((k for k, _ in self.terms), default=1)

    @property
    def c_phi(self):
        return max((_neg(p.lower) for _, p in self.terms), default=0.0)

    @property
    def hard_exclusion(self):
        return any(p.upper == INF for _, p in self.terms)

    def values(self, geo, table, rows):
        out = np.zeros(len(rows))
        sizes = table.sizes[rows]
        pts = geo.points
        for order, prof in self.terms:
            sel = np.flatnonzero(sizes == order)
            if len(sel) == 0:
                continue
            mem = table.members[rows[sel], :order]
            if isinstance(prof, ConstantProfile):
                out[sel] = prof.value
            elif order == 2:
                out[sel] = prof(_edge_lengths_nd(pts, mem))
            else:
                arr = pts[mem]
                keys = [arr[:, :, j] for j in range(arr.shape[2] - 1, -1, -1)]
                idx = np.lexsort(keys, axis=-1) if keys else None
                arr = np.take_along_axis(arr, idx[:, :, None], axis=1)
                out[sel] = prof(arr)
        return out

    def to_dict(self):
        return {"variant": "ManyBody", "r": self.r,
                "terms": {str(k): p.to_dict() for k, p in self.terms}}


def _edge_lengths_nd(pts, members):
    d = pts[members[:, 1]] - pts[members[:, 0]]
    return np.sqrt((d * d).sum(axis=1))


@dataclass(frozen=True)
class Sum(Potential):
    """Sum of potentials; summands on the same structure add per hyperedge."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("Sum needs at least one summand")
        flat = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, Sum) else (p,))
        object.__setattr__(self, "parts", tuple(flat))

    @property
    def structures(self):
        seen = []
        for p in self.parts:
            if p.structure not in seen:
                seen.append(p.structure)
        return tuple(seen)

    @property
    def structure(self):
        s = self.structures
        if len(s) != 1:
            raise StructureMismatch("summands live on several structures")
        return s[0]

    def on(self, structure) -> list:
        return [p for p in self.parts if p.structure == structure]

    def max_order_for(self, structure):
        orders = [p.max_order for p in self.on(structure) if p.max_order is not None]
        return max(orders) if orders else None

    @property
    def max_order(self):
        return self.max_order_for(self.structure)

    @property
    def c_phi(self):
        return sum(p.c_phi for p in self.parts)

    def c_phi_for(self, structure):
        return sum(p.c_phi for p in self.on(structure))

    @property
    def hard_exclusion(self):
        return any(p.hard_exclusion for p in self.parts)

    @property
    def scale_invariant(self):
        return all(p.scale_invariant for p in self.parts)

    def values(self, geo, table, rows):
        out = np.zeros(len(rows))
        for p in self.on(table.structure):
            out = out + p.values(geo, table, rows)
        return out

    def to_dict(self):
        return {"variant": "Sum", "parts": [p.to_dict() for p in self.parts]}


def parts_on(potential: Potential, structure: StructureId) -> list:
    if isinstance(potential, Sum):
        return potential.on(structure)
    return [potential] if potential.structure == structure else []


def max_order_for(potential: Potential, structure: StructureId):
    if isinstance(potential, Sum):
        return potential.max_order_for(structure)
    return potential.max_order


def c_phi_for(potential: Potential, structure: StructureId) -> float:
    return sum(p.c_phi for p in parts_on(potential, structure))


def table_values(potential, structure, geo, table, rows) -> np.ndarray:
    """Potential values of the given table rows, summed over summands on ``structure``."""
    rows = np.asarray(rows, dtype=np.int64)
    parts = parts_on(potential, structure)
    if not parts:
        raise StructureMismatch(f"no summand lives on {structure.tag}")
    out = np.zeros(len(rows))
    if len(rows) == 0:
        return out
    for p in parts:
        out = out + p.values(geo, table, rows)
    return out


# ---------------------------------------------------------------- operations


def evaluate(potential: Potential, eta: Hyperedge, config) -> float:
    """Value of ``potential`` at hyperedge ``eta`` of ``config``."""
    if eta.structure not in potential.structures:
        raise StructureMismatch(f"{eta.structure.tag} does not match the potential")
    pts = as_points(config)
    geo = Geometry(pts)
    s = eta.structure
    order = len(eta.indices) if s.kind == "LC" else None
    table = geo.table(s, order)
    try:
        row = _locate(table, pts, eta)
    except NotAHyperedge:
        raise
    return float(table_values(potential, s, geo, table, np.array([row]))[0])


def stability_constant(potential: Potential):
    """``c_S = sum over structures of C * c_phi`` (None when no linear bound is known)."""
    total = 0.0
    for s in potential.structures:
        c = c_phi_for(potential, s)
        if c == 0:
            continue
        C = SUBLINEARITY.get(s.kind)
        if C is None:
            return None
        total += C * c
    return total


def metadata(potential: Potential) -> dict:
    s = potential.structures
    return {
        "c_phi": float(potential.c_phi),
        "c_S": stability_constant(potential),
        "hard_exclusion": bool(potential.hard_exclusion),
        "scale_invariant": bool(potential.scale_invariant),
        "structure": s[0] if len(s) == 1 else s,
    }


def shift_check(potential: Potential, eta: Hyperedge, config, x, rtol: float = 0.0) -> bool:
    """Whether ``evaluate`` is unchanged when ``eta`` and ``config`` are shifted by ``x``."""
    x = np.asarray(x, dtype=np.float64)
    pts = as_points(config)
    v0 = evaluate(potential, eta, pts)
    moved = pts + x
    idx = eta.indices
    eta2 = Hyperedge(eta.structure, idx, tuple(tuple(moved[i].tolist()) for i in idx))
    v1 = evaluate(potential, eta2, moved)
    if v0 == v1:
        return True
    if not (np.isfinite(v0) and np.isfinite(v1)):
        return False
    return abs(v0 - v1) <= rtol * max(abs(v0), abs(v1))


def potential_from_dict(d: dict) -> Potential:
    """Inverse of ``Potential.to_dict`` for the serialisable variants."""
    d = dict(d)
    v = d.pop("variant")
    if v == "Zero":
        return Zero()
    if v == "Singleton":
        return Singleton(float(d["c"]))
    if v in ("PolyEdge", "PolyTriangle"):
        prof = profile_from_dict(d.pop("profile")) if "profile" in d else None
        cls = PolyEdge if v == "PolyEdge" else PolyTriangle
        return cls(profile=prof, **{k: (bool(x) if k == "gabriel" else float(x)) for k, x in d.items()})
    if v == "LongEdgeExclusion":
        inner = profile_from_dict(d.pop("inner", 0.0))
        return LongEdgeExclusion(inner=inner, **{k: float(x) for k, x in d.items()})
    if v == "HardEquilateral":
        return HardEquilateral(float(d["delta"]))
    if v == "ForcedClustering":
        return ForcedClustering(int(d["k"]), float(d["delta"]))
    if v == "VoronoiCell":
        return VoronoiCell(d["feature"], profile_from_dict(d["profile"]))
    if v == "DistortedTriangular":
        return DistortedTriangular()
    if v == "AdjacentVoronoi":
        return AdjacentVoronoi(d["feature"], profile_from_dict(d["profile"]))
    if v == "ManyBody":
        return ManyBody(float(d["r"]), tuple((int(k), profile_from_dict(p))
                                             for k, p in d.get("terms", {}).items()))
    if v == "Sum":
        return Sum(tuple(potential_from_dict(p) for p in d["parts"]))
    raise ValueError(f"unknown potential variant {v!r}")


def non_hereditary_witness():
    """A forced-clustering configuration with finite energy that becomes forbidden
    after removing one point.

    Returns ``(potential, points, removed_index)``.
    """
    pot = ForcedClustering(k=2, delta=1.0)
    pts = np.array([[0.0, 0.0], [0.3, 0.0], [0.0, 0.3],
                    [10.0, 0.0], [10.3, 0.0], [10.0, 0.3]])
    return pot, pts, 0
