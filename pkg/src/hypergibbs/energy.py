"""Finite-volume Hamiltonians with boundary conditions."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (IllegalMove, NegativePartDivergent, NotConfined)
from .geometry import Configuration, Window
from .geometry.primitives import as_points
from .kernels import DelaunayBase
from .hypergraph import (BoundaryCertificate, Geometry, _hyperedge, combined_points,
                         confinement)
from .potential import Potential, max_order_for, stability_constant, table_values

NEG_CAP = 1e6
# interior sizes up to this reuse the cached boundary triangulation
MAX_EXTRA = 64


@dataclass(frozen=True)
class GibbsSpec:
    """Potential, activity, window and boundary condition of a finite-volume Gibbs distribution.

    ``boundary`` is the configuration outside the window. ``certificates``
    holds one confinement certificate per structure, and only boundary
    points within the largest radius enter the Hamiltonian. With
    ``exact_boundary`` the boundary is taken as the complete outside
    configuration, so no confinement is needed.
    """

    potential: Potential
    z: float
    window: Window
    boundary: Configuration
    certificates: tuple
    boundary_points: np.ndarray
    exact_boundary: bool = False
    c_S: float | None = None
    neg_cap: float = NEG_CAP
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(cls, potential: Potential, z: float, window: Window, boundary=None, lattice=None,
              exact_boundary: bool = False, c_S: float | None = None, neg_cap: float = NEG_CAP):
        if not z > 0:
            raise ValueError("activity must be positive")
        if boundary is None:
            boundary = Configuration(np.zeros((0, window.d)), d=window.d)
        elif not isinstance(boundary, Configuration):
            boundary = Configuration(boundary, d=window.d)
        bp = boundary.points
        if len(bp) and window.contains(bp).any():
            raise ValueError("boundary configuration must lie outside the window")
        if exact_boundary and lattice is None:
            # the boundary is the whole outside configuration: nothing to certify
            certs = tuple(BoundaryCertificate(s, window, math.inf, boundary, True, method="exact")
                          for s in potential.structures)
        else:
            certs = tuple(confinement(s, bp, window, lattice=lattice)
                          for s in potential.structures)
        if exact_boundary:
            kept = np.array(bp, dtype=np.float64).reshape(-1, window.d)
        elif all(c.ok for c in certs):
            r = max(c.r for c in certs)
            kept = bp[window.distance(bp) <= r] if len(bp) else bp
            kept = np.array(kept, dtype=np.float64).reshape(-1, window.d)
        else:
            kept = np.zeros((0, window.d))
        if c_S is None:
            c_S = stability_constant(potential)
        kept.flags.writeable = False
        return cls(potential, float(z), window, boundary, certs, kept, exact_boundary, c_S, neg_cap)

    @property
    def structures(self):
        return self.potential.structures

    @property
    def confinement(self) -> BoundaryCertificate:
        """Certificate with the largest radius."""
        return max(self.certificates, key=lambda c: c.r)

    @property
    def ok(self) -> bool:
        return self.exact_boundary or all(c.ok for c in self.certificates)

    @property
    def r(self) -> float:
        return max(c.r for c in self.certificates)

    @property
    def volume(self) -> float:
        return self.window.volume

    def with_window(self, window: Window, boundary) -> "GibbsSpec":
        return GibbsSpec.build(self.potential, self.z, window, boundary,
                               exact_boundary=self.exact_boundary, c_S=self.c_S,
                               neg_cap=self.neg_cap)


@dataclass
class EnergyBreakdown:
    """Total energy, its negative part and the contributing hyperedges."""

    total: float
    negative_part: float
    count: int
    _parts: list = field(default_factory=list, repr=False)

    @property
    def per_hyperedge(self) -> list:
        out = []
        for s, geo, table, rows, vals in self._parts:
            for i, v in zip(rows.tolist(), vals.tolist()):
                out.append((_hyperedge(s, geo.points, table.members[i, :table.sizes[i]]), v))
        return out

    @property
    def values(self) -> np.ndarray:
        if not self._parts:
            return np.zeros(0)
        return np.concatenate([p[4] for p in self._parts])

    @property
    def finite(self) -> bool:
        return math.isfinite(self.total)

    def report(self, top: int = 10) -> dict:
        terms = self.per_hyperedge
        terms.sort(key=lambda t: -abs(t[1]) if math.isfinite(t[1]) else -math.inf)
        return {
            "total": _num(self.total),
            "negative_part": _num(self.negative_part),
            "hyperedges": self.count,
            "top": [{"structure": h.structure.tag, "points": [list(p) for p in h.points],
                     "value": _num(v)} for h, v in terms[:top]],
        }

    def write_report(self, path, top: int = 10):
        with open(path, "w") as fh:
            json.dump(self.report(top), fh, indent=2)


def _num(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _interior_points(spec: GibbsSpec, interior, check: bool) -> np.ndarray:
    p = np.asarray(as_points(interior), dtype=np.float64)
    p = p.reshape(-1, spec.window.d) if p.size else np.zeros((0, spec.window.d))
    if check and len(p):
        if not spec.window.contains(p).all():
            raise IllegalMove("interior points must lie in the window")
        if len(p) > 1 and len(np.unique(p, axis=0)) != len(p):
            raise ValueError("duplicate interior points")
    return p


def _evaluate(spec: GibbsSpec, zeta: np.ndarray, keep_parts: bool):
    if not spec.ok:
        raise NotConfined("no confinement certificate for the boundary condition")
    pts = combined_points(zeta, spec.boundary_points)
    triangulation = None
    if any(s.planar for s in spec.structures):
        base = spec._cache.get("delaunay")
        if base is None:
            base = spec._cache["delaunay"] = DelaunayBase(spec.boundary_points, MAX_EXTRA)
        triangulation = base.with_points(zeta, True)
    geo = Geometry(pts, triangulation=triangulation)
    nint = len(zeta)
    parts = []
    for s in spec.structures:
        table = geo.table(s, max_order_for(spec.potential, s))
        hit, reach = table.scan(nint, spec.window)
        rows = np.flatnonzero(hit)
        if not spec.exact_boundary:
            cert = next(c for c in spec.certificates if c.structure == s)
            if len(rows) and s.kind != "LC":
                if reach[rows].max() > cert.r * (1 + 1e-7) + 1e-9:
                    raise NotConfined(f"{s.tag} horizon leaves the certified region")
        vals = table_values(spec.potential, s, geo, table, rows)
        parts.append((s, geo, table, rows, vals))
    return parts


def _summarise(spec: GibbsSpec, parts, keep_parts: bool) -> EnergyBreakdown:
    vals = np.concatenate([p[4] for p in parts]) if len(parts) != 1 else parts[0][4]
    if len(vals) == 0:
        return EnergyBreakdown(0.0, 0.0, 0, parts if keep_parts else [])
    lo = float(vals.min())
    hi = float(vals.max())
    if math.isnan(lo) or math.isnan(hi):
        raise ValueError("potential returned NaN")
    negative = math.fsum(vals[vals < 0].tolist()) if lo < 0 else 0.0
    if -negative > spec.neg_cap:
        raise NegativePartDivergent(f"negative part {negative} exceeds the cap {spec.neg_cap}")
    total = math.inf if hi == math.inf else math.fsum(vals.tolist())
    return EnergyBreakdown(total, negative, len(vals), parts if keep_parts else [])


def hamiltonian(spec: GibbsSpec, interior, check: bool = True) -> EnergyBreakdown:
    """``H_{Lambda, omega}(zeta)`` over the affected hyperedges of ``zeta`` plus the boundary."""
    zeta = _interior_points(spec, interior, check)
    return _summarise(spec, _evaluate(spec, zeta, True), True)


def energy(spec: GibbsSpec, interior, check: bool = False) -> float:
    """Total energy only (no breakdown kept)."""
    zeta = _interior_points(spec, interior, check)
    return _summarise(spec, _evaluate(spec, zeta, False), False).total


# ---------------------------------------------------------------- moves


@dataclass(frozen=True)
class Insert:
    x: tuple


@dataclass(frozen=True)
class Delete:
    x: tuple


@dataclass(frozen=True)
class Translate:
    x: tuple
    y: tuple


def apply_move(spec: GibbsSpec, interior, move) -> np.ndarray:
    """Interior configuration after ``move`` (raises IllegalMove)."""
    p = _interior_points(spec, interior, False)
    d = spec.window.d

    def find(x):
        x = np.asarray(x, dtype=np.float64).reshape(d)
        hit = np.flatnonzero(np.all(p == x, axis=1)) if len(p) else []
        if len(hit) == 0:
            raise IllegalMove(f"{tuple(x)} is not an interior point")
        return int(hit[0])

    def inside(x):
        x = np.asarray(x, dtype=np.float64).reshape(1, d)
        if not spec.window.contains(x)[0]:
            raise IllegalMove(f"{tuple(x[0])} is outside the window")
        if len(p) and np.any(np.all(p == x, axis=1)):
            raise IllegalMove(f"{tuple(x[0])} is already present")
        return x

    if isinstance(move, Insert):
        return np.vstack([p, inside(move.x)])
    if isinstance(move, Delete):
        return np.delete(p, find(move.x), axis=0)
    if isinstance(move, Translate):
        i = find(move.x)
        y = inside(move.y)
        q = p.copy()
        q[i] = y[0]
        return q
    raise IllegalMove(f"unknown move {move!r}")


def delta(before: float, after: float) -> float:
    """Energy difference with the conventions for forbidden states."""
    if after == math.inf:
        return math.inf
    if before == math.inf:
        return -math.inf
    return after - before


def energy_delta(spec: GibbsSpec, interior, move) -> float:
    """``H(after) - H(before)``, both recomputed from scratch.

    ``inf`` when the move enters a forbidden state and ``-inf`` when it
    leaves one.
    """
    before = energy(spec, interior, check=True)
    after = energy(spec, apply_move(spec, interior, move))
    return delta(before, after)


# ---------------------------------------------------------------- audits


def decomposition_difference(outer: GibbsSpec, inner: GibbsSpec, zeta) -> float:
    """``H_outer(zeta + xi) - H_inner(zeta)`` summed exactly over both term lists.

    ``inner`` must use the outer boundary plus ``xi`` (the outer interior
    points outside the inner window) as its boundary condition. The
    difference is rounded once, so it is a function of the multiset of
    surplus terms only.
    """
    zeta = _interior_points(inner, zeta, True)
    xi = inner.boundary.points[outer.window.contains(inner.boundary.points)] \
        if len(inner.boundary) else np.zeros((0, inner.window.d))
    full = np.vstack([zeta, xi])
    a = _summarise(outer, _evaluate(outer, full, True), True)
    b = _summarise(inner, _evaluate(inner, zeta, True), True)
    if not (a.finite and b.finite):
        return math.nan
    return math.fsum(a.values.tolist() + (-b.values).tolist())


def admissibility_audit(spec: GibbsSpec, mc_samples: int, rng, lattice=None, template=None) -> dict:
    """Monte Carlo check of ``H^- < inf`` and a crude bracket for ``Z``.

    Draws come from the Poisson process of intensity ``z`` in the window.
    The upper end of the bracket is the stability bound
    ``E exp(c_S (N + #boundary))``. With a lattice and template tiling the
    window, the lower end also uses a sampled pseudo-periodic state.
    """
    lam = spec.z * spec.volume
    finite_neg = 0
    weights = np.empty(mc_samples)
    for i in range(mc_samples):
        n = rng.poisson(lam)
        zeta = spec.window.sample(rng, n)
        try:
            e = hamiltonian(spec, zeta, check=False)
            finite_neg += 1
            weights[i] = math.exp(-e.total) if e.total < 700 else 0.0
        except NegativePartDivergent:
            weights[i] = 0.0
    mean = float(weights.mean()) if mc_samples else math.nan
    se = float(weights.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else math.inf
    lower = max(0.0, mean - 3 * se)
    if spec.c_S is None:
        upper = math.inf
    else:
        nb = len(spec.boundary_points)
        upper = math.exp(lam * math.expm1(spec.c_S) + spec.c_S * nb)
    out = {"neg_part_finite_fraction": finite_neg / mc_samples if mc_samples else math.nan,
           "Z_estimate": mean, "Z_se": se, "Z_bracket": (lower, upper)}
    if lattice is not None and template is not None:
        from .conditions import gamma_weight
        from .geometry import pseudo_periodic

        cells = lattice.cells_meeting(spec.window)
        zeta = pseudo_periodic(lattice, template, spec.window, rng).points
        zeta = zeta[spec.window.contains(zeta)]
        h = energy(spec, zeta)
        pw = gamma_weight(spec.z, lattice, template)["value"]
        out["feasible_energy"] = h
        out["feasible_cells"] = len(cells)
        out["feasible_log_weight"] = (len(cells) * math.log(pw) - h) if pw > 0 else -math.inf
    return out


def stability_audit(samples, c_S: float | None = None) -> dict:
    """Worst ratio ``H / #(zeta + boundary)`` over ``(spec, interior)`` samples."""
    worst = math.inf
    n = 0
    holds = True
    for spec, zeta in samples:
        c = spec.c_S if c_S is None else c_S
        e = energy(spec, zeta)
        count = len(as_points(zeta)) + len(spec.boundary_points)
        if count == 0 or not math.isfinite(e):
            continue
        ratio = e / count
        worst = min(worst, ratio)
        n += 1
        if c is not None and e < -c * count * (1 + 1e-12):
            holds = False
    return {"worst_ratio": worst, "c_S": c_S, "samples": n, "holds": holds}
