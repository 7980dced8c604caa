"""Checkers for stability, range and upper regularity, and activity thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentSum, TemplateDoesNotFitCell, UnsupportedDimension, UnsupportedModel
from .geometry import (RHO0_2D, TRIANGULAR_OFFSETS, ClusterTemplate, Explicit, LatticeSpec,
                       SingletonBall, fill_outside, pseudo_periodic, unit_ball_volume)
from .hypergraph import Geometry, StructureId, confinement
from .potential import (AdjacentVoronoi, AngleTriangle, DistortedTriangular, ForcedClustering,
                        HardEquilateral, LongEdgeExclusion, ManyBody, PolyEdge, PolyTriangle,
                        Potential, Singleton, Sum, VoronoiCell, Zero, max_order_for, parts_on,
                        stability_constant, table_values)

# cells on each side of the bulk cell in the periodic-extension patch
PATCH_HALF = 3
SUM_CAP = 1e12
DRAWS = 100

KNOWN = (Zero, Singleton, PolyEdge, LongEdgeExclusion, PolyTriangle, AngleTriangle,
         HardEquilateral, ForcedClustering, VoronoiCell, DistortedTriangular, AdjacentVoronoi,
         ManyBody)


# ---------------------------------------------------------------- lattice constants


def lattice_constants(d: int, structure: StructureId | None = None) -> dict:
    """Lattice recipe for dimension ``d``.

    In the plane the cells come from the triangular lattice, whose bulk
    points have six Delaunay neighbours; elsewhere only the cubic recipe
    and the neighbour bound ``3^d - 1`` are available.
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be positive")
    planar = structure is not None and structure.planar
    if d == 2:
        return {"d": 2, "recipe": "triangular", "M": LatticeSpec.triangular(1.0).M.copy(),
                "column_length": "a", "column_angle": math.pi / 3, "rho0": RHO0_2D,
                "gamma_d": 6, "offsets": TRIANGULAR_OFFSETS, "nu_d": unit_ball_volume(2)}
    if planar:
        raise UnsupportedDimension(
            f"{structure.tag} needs d = 2; in d = {d} only gamma_{d} <= {3 ** d - 1} is known")
    return {"d": d, "recipe": "cubic", "M": np.eye(d), "column_length": "a",
            "column_angle": math.pi / 2, "rho0": None, "gamma_d": 3 ** d - 1, "offsets": None,
            "nu_d": unit_ball_volume(d)}


def delaunay_offsets(lattice: LatticeSpec, template=None, rng=None) -> list:
    """Lattice offsets of the Delaunay neighbours of the point in cell 0 of a fill."""
    if lattice.d != 2:
        raise UnsupportedDimension("Delaunay offsets need d = 2")
    template = SingletonBall(0.25 * lattice.inner_diameter) if template is None else template
    pts = pseudo_periodic(lattice, template, lattice.box(PATCH_HALF), rng).points
    geo = Geometry(pts)
    cells = lattice.cell_of(pts)
    own = np.flatnonzero(np.all(cells == 0, axis=1))
    out = set()
    for i in own:
        for j in geo.tess.neighbours(int(i)):
            out.add(tuple(int(c) for c in cells[j]))
    out.discard((0, 0))
    return sorted(out)


# ---------------------------------------------------------------- reference weights


def template_volume(template, d: int) -> float:
    if isinstance(template, SingletonBall):
        return unit_ball_volume(d) * template.b ** d
    raise TypeError("only singleton templates have a volume")


def gamma_weight(z: float, lattice: LatticeSpec, template, rng=None, mc: int = 20000) -> dict:
    """``Pi^z_C(Gamma)`` for the template event, with ``scaled = e^{z|C|} Pi``.

    Singleton balls are exact. Cluster templates report the labelled lower
    bound as ``value`` and an importance-sampled estimate of the full event
    in ``mc_estimate``. An explicit finite configuration carries no mass.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    template.check(lattice)
    d = lattice.d
    C = lattice.cell_volume
    damp = math.exp(-z * C)
    nu = unit_ball_volume(d)
    if isinstance(template, SingletonBall):
        scaled = z * nu * template.b ** d
        return {"value": damp * scaled, "scaled": scaled, "exact": True,
                "lower_bound": damp * scaled, "mc_estimate": None, "mc_se": None}
    if isinstance(template, ClusterTemplate):
        k = template.k
        h = 0.5 * template.delta
        labelled = nu ** (k + 1) * template.b ** d * h ** (k * d)
        coef = z ** (k + 1) / math.factorial(k + 1)
        lower = coef * labelled
        out = {"value": damp * lower, "scaled": lower, "exact": False,
               "lower_bound": damp * lower, "mc_estimate": None, "mc_se": None}
        if mc > 0:
            est, se = _cluster_measure(template, d, mc, np.random.default_rng(rng))
            out["mc_estimate"] = damp * coef * labelled * est
            out["mc_se"] = damp * coef * labelled * se
        return out
    if isinstance(template, Explicit):
        return {"value": 0.0, "scaled": 0.0, "exact": True, "lower_bound": 0.0,
                "mc_estimate": None, "mc_se": None}
    raise TemplateDoesNotFitCell(f"unknown template {type(template).__name__}")


def _in_ball(rng, n, d, r):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (r * rng.random((n, 1)) ** (1.0 / d))


def _cluster_measure(template: ClusterTemplate, d: int, mc: int, rng):
    """Ratio of the unordered cluster event's measure to one labelled event.

    Draws from the labelled event (point 0 is the centre) and weights by
    ``(k+1)/N`` where ``N`` counts the points that could serve as centre.
    """
    k, b, h = template.k, template.b, 0.5 * template.delta
    x0 = _in_ball(rng, mc, d, b)
    rest = x0[:, None, :] + _in_ball(rng, mc * k, d, h).reshape(mc, k, d)
    pts = np.concatenate([x0[:, None, :], rest], axis=1)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    dist = np.sqrt((diff * diff).sum(-1))
    centre_ok = np.linalg.norm(pts, axis=2) < b
    near = (dist < h).sum(axis=2) - 1 == k
    count = (centre_ok & near).sum(axis=1)
    w = (k + 1) / np.maximum(count, 1)
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(mc))


# ---------------------------------------------------------------- per-cell sums


def _patch(lattice: LatticeSpec, template, rng):
    pts = pseudo_periodic(lattice, template, lattice.box(PATCH_HALF), rng).points
    return pts, lattice.cell_of(pts)


def _cell_sum(structure, potential, lattice, template, rng, plus: bool) -> float:
    pts, cells = _patch(lattice, template, rng)
    geo = Geometry(pts)
    table = geo.table(structure, max_order_for(potential, structure))
    if len(table) == 0:
        return 0.0
    own = np.all(cells == 0, axis=1)
    sizes = table.sizes
    mem = table.members
    safe = np.where(mem >= 0, mem, 0)
    valid = np.arange(mem.shape[1])[None, :] < sizes[:, None]
    touches = (own[safe] & valid).any(axis=1)
    rows = np.flatnonzero(touches)
    if len(rows) == 0:
        return 0.0
    vals = table_values(potential, structure, geo, table, rows)
    # number of distinct cells met by each hyperedge
    flat = np.ravel_multi_index((cells + 4 * PATCH_HALF).T, (8 * PATCH_HALF + 1,) * lattice.d)
    ncell = np.array([len(np.unique(flat[mem[i, :sizes[i]]])) for i in rows], dtype=np.float64)
    if plus:
        vals = np.maximum(vals, 0.0)
    if np.any(np.isnan(vals)):
        raise DivergentSum("undefined potential value in the bulk cell")
    if np.any(vals == math.inf):
        return math.inf
    return math.fsum((vals / ncell).tolist())


def c_gamma(structure, potential, lattice: LatticeSpec, template, sign: str = "plus",
            draws: int = DRAWS, rng=0, cap: float = SUM_CAP) -> float:
    """Per-cell energy ``sup sum phi(eta) / #cells(eta)`` over the template fills.

    Evaluated on the bulk cell of a periodic patch for the canonical fill and
    ``draws`` randomised fills. ``sign="plus"`` uses the positive part.
    ``structure=None`` sums over every structure of the potential.
    """
    if sign not in ("plus", "signed"):
        raise ValueError("sign must be 'plus' or 'signed'")
    template.check(lattice)
    structures = potential.structures if structure is None else (structure,)
    for s in structures:
        if s.planar and lattice.d != 2:
            raise UnsupportedDimension(f"{s.tag} needs d = 2")
    gen = np.random.default_rng(rng)
    best = -math.inf
    for i in range(draws + 1):
        draw_rng = None if i == 0 else gen
        total = 0.0
        for s in structures:
            if not parts_on(potential, s):
                continue
            total += _cell_sum(s, potential, lattice, template, draw_rng, sign == "plus")
        if total > cap:
            raise DivergentSum(f"per-cell sum {total:g} exceeds {cap:g}")
        best = max(best, total)
    return float(best)


def confinement_radius(potential, lattice: LatticeSpec, template, draws: int = 4,
                       rng=0) -> float:
    """Largest confinement radius of ``Lambda_1`` under template boundary fills."""
    box = lattice.box(1)
    extent = 4.0 * lattice.outer_diameter
    gen = np.random.default_rng(rng)
    worst = 0.0
    for i in range(draws + 1):
        for s in potential.structures:
            ext = extent + (s.r if s.kind == "LC" else 0.0)
            _, outside = fill_outside(lattice, template, box, ext, None if i == 0 else gen)
            cert = confinement(s, outside.points, box)
            worst = max(worst, cert.r if cert.ok else math.inf)
    return worst


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class ThresholdInput:
    """Edge (``PolyEdge``) or triangle (``PolyTriangle``) power potential."""

    model: str
    k0: float = 0.0
    k1: float = 1.0
    alpha: float = 1.0
    rho0: float = RHO0_2D

    def __post_init__(self):
        if self.model not in ("PolyEdge", "PolyTriangle"):
            raise ValueError("model must be PolyEdge or PolyTriangle")
        if self.k0 < 0 or self.k1 < 0 or not self.alpha > 0:
            raise ValueError("need k0 >= 0, k1 >= 0, alpha > 0")
        if not 0 < self.rho0 <= RHO0_2D:
            raise ValueError("rho0 must lie in (0, sqrt(3)/6]")

    @classmethod
    def of(cls, potential) -> "ThresholdInput":
        if isinstance(potential, ThresholdInput):
            return potential
        if isinstance(potential, (PolyEdge, PolyTriangle)):
            return cls(type(potential).__name__, potential.k0, potential.k1, potential.alpha)
        raise UnsupportedModel(f"no threshold formula for {type(potential).__name__}")


def threshold(model) -> float:
    """Activity above which the power potential satisfies upper regularity."""
    t = ThresholdInput.of(model)
    if t.k1 == 0:
        return 0.0
    r, a, e2 = t.rho0, t.alpha, math.e ** 2
    if t.model == "PolyEdge":
        lead = (1 + 2 * r) * math.exp(3 * t.k0) * (3 * a * e2 * t.k1 / 2) ** (1 / a)
    else:
        lead = (2 / math.sqrt(3) + 2 * r) * math.exp(2 * t.k0) * (a * e2 * t.k1) ** (1 / a)
    return lead / (math.pi * r * r)


def threshold_grid(model: str, k0s, k1s, alphas) -> list:
    """Rows ``(k0, k1, alpha, z_min)`` over the product grid."""
    rows = []
    for k0 in k0s:
        for k1 in k1s:
            for a in alphas:
                rows.append((float(k0), float(k1), float(a),
                             threshold(ThresholdInput(model, k0, k1, a))))
    return rows


def c_a_bound(model, a: float) -> float:
    """Worst-case per-cell sum for the singleton template with ``b = rho0 a``."""
    t = ThresholdInput.of(model)
    if t.model == "PolyEdge":
        return 3 * (t.k0 + t.k1 * a ** t.alpha * (1 + 2 * t.rho0) ** t.alpha)
    return 2 * (t.k0 + t.k1 * a ** t.alpha * (2 / math.sqrt(3) + 2 * t.rho0) ** t.alpha)


def suggest_lattice(model, a: float | None = None):
    """Triangular lattice and singleton template minimising the worst-case bound."""
    t = ThresholdInput.of(model)
    if a is None:
        if t.k1 == 0:
            a = 1.0
        else:
            per = 3 * (1 + 2 * t.rho0) ** t.alpha if t.model == "PolyEdge" else \
                2 * (2 / math.sqrt(3) + 2 * t.rho0) ** t.alpha
            a = (2.0 / (t.alpha * per * t.k1)) ** (1.0 / t.alpha)
    return LatticeSpec.triangular(a), SingletonBall(t.rho0 * a)


# ---------------------------------------------------------------- lower density


@dataclass(frozen=True)
class DensityBound:
    """``#zeta >= count(window)`` from disjoint discs that must each hold a point."""

    radius: float
    a: float
    construction: str
    heuristic: bool = True

    def count(self, window) -> int:
        """Disjoint closed discs of ``radius`` on a grid inside a box window."""
        step = 2.0 * self.radius * (1 + 1e-9)
        span = window.hi - window.lo
        per = np.floor((span - 2.0 * self.radius * (1 + 1e-9)) / step) + 1
        per = np.where(span >= 2.0 * self.radius * (1 + 1e-9), per, 0)
        return int(np.prod(per))

    def b(self, window) -> float:
        return self.a * window.volume - self.count(window)

    def holds(self, window, n: int) -> bool:
        return n >= self.count(window)


def density_bound(potential) -> DensityBound | None:
    """Lower density constants for a potential forbidding long Delaunay edges.

    A triangle with sides at most ``l`` lies in the union of the discs of
    radius ``l/sqrt(3)`` around its vertices, so every such disc centred in
    the window holds a point of a finite-energy configuration.
    """
    parts = potential.parts if isinstance(potential, Sum) else (potential,)
    lens = [p.l2 for p in parts if isinstance(p, LongEdgeExclusion)]
    if not lens:
        return None
    rho = min(lens) / math.sqrt(3.0)
    return DensityBound(rho, 1.0 / (2 * rho) ** 2,
                        f"disjoint discs of radius l2/sqrt(3) = {rho:.6g} on a square grid")


# ---------------------------------------------------------------- report


@dataclass
class RegularityReport:
    r_gamma: float
    c_gamma: float
    c_gamma_plus: float
    pi_gamma: float
    scaled_pi: float
    u3_holds: bool
    hat_u3_holds: bool
    constants: dict
    decisions: dict
    verdict: bool
    route: str | None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"r_gamma": self.r_gamma, "c_gamma": self.c_gamma,
                "c_gamma_plus": self.c_gamma_plus, "pi_gamma": self.pi_gamma,
                "scaled_pi": self.scaled_pi, "u3_holds": self.u3_holds,
                "hat_u3_holds": self.hat_u3_holds, "verdict": self.verdict, "route": self.route,
                **{f"constants.{k}": v for k, v in self.constants.items()},
                **{f"decisions.{k}": v for k, v in self.decisions.items()}}

    def to_text(self) -> str:
        lines = [f"{k}: {_fmt(v)}" for k, v in self.to_dict().items()]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def parse_report(text: str) -> dict:
    """``key: value`` lines back to a dict of strings."""
    out = {}
    for line in text.splitlines():
        if ": " in line and not line.startswith("note: "):
            k, v = line.split(": ", 1)
            out[k] = v
    return out


def _supported(potential):
    parts = potential.parts if isinstance(potential, Sum) else (potential,)
    for p in parts:
        if not isinstance(p, KNOWN):
            raise UnsupportedModel(f"no condition checker for {type(p).__name__}")
    return parts


def check_conditions(structure, potential: Potential, z: float, lattice: LatticeSpec, template,
                     samples=None, draws: int = DRAWS, rng=0) -> RegularityReport:
    """Evaluate the hypotheses for one lattice and template.

    Three routes are tried: the strong route (confinement, summability and
    strong non-rigidity), the lower-density route with weak non-rigidity,
    and the scale-invariant route, where weak non-rigidity suffices.
    ``samples`` holds ``(window, interior points)`` pairs of finite-energy
    states used to check the lower density bound.
    """
    if not isinstance(potential, Potential):
        raise UnsupportedModel(f"{type(potential).__name__} is not a potential")
    parts = _supported(potential)
    if structure is not None and structure not in potential.structures:
        raise UnsupportedModel(f"{structure.tag} does not carry the potential")
    if not z > 0:
        raise ValueError("z must be positive")
    d = lattice.d
    for s in potential.structures:
        if s.planar:
            lattice_constants(d, s)
    template.check(lattice)
    notes = []

    c_S = stability_constant(potential)
    s_ok = c_S is not None
    ranges = {s.tag: s.range_constants for s in potential.structures}

    pw = gamma_weight(z, lattice, template, rng=rng)
    pi = pw["value"]
    log_pi = math.log(pi) if pi > 0 else -math.inf
    try:
        cg = c_gamma(structure, potential, lattice, template, "signed", draws, rng)
        cgp = c_gamma(structure, potential, lattice, template, "plus", draws, rng)
    except DivergentSum as exc:
        cg = cgp = math.inf
        notes.append(str(exc))
    r_gamma = confinement_radius(potential, lattice, template, rng=rng)
    C = lattice.cell_volume
    u1 = math.isfinite(r_gamma)
    u2 = math.isfinite(cgp)
    u3 = bool(math.isfinite(cg) and z * C + log_pi > cg)
    hat_u3 = pi > 0

    dens = density_bound(potential)
    if dens is not None:
        hat_u1 = True
        hat_u1_status = "derived (heuristic)"
        if samples is not None:
            checked = [(w, len(np.asarray(p).reshape(-1, d))) for w, p in samples]
            bad = [n for w, n in checked if not dens.holds(w, n)]
            hat_u1 = not bad
            hat_u1_status = f"empirical {len(checked) - len(bad)}/{len(checked)}"
    else:
        hat_u1 = False
        hat_u1_status = "not verified" if any(isinstance(p, ForcedClustering) for p in parts) \
            else "not derived"
    if any(p.structure.kind == "Gab2" for p in parts):
        notes.append("the Gabriel subgraph has no lower density bound")

    base = s_ok and u1 and u2
    route_u = base and u3
    route_hat = base and hat_u1 and hat_u3
    route_scale = base and bool(potential.scale_invariant) and hat_u3
    route = "U" if route_u else "U-hat" if route_hat else "scale-invariant" if route_scale else None

    nu = unit_ball_volume(d)
    b = getattr(template, "b", None)
    a = float(np.linalg.norm(lattice.M[:, 0]))
    constants = {"a": a, "b": b, "rho0": RHO0_2D if d == 2 else None,
                 "gamma_d": 6 if d == 2 else 3 ** d - 1, "nu_d": nu, "cell_volume": C}
    decisions = {"S": s_ok, "c_S": c_S,
                 "R": "; ".join(f"{k}=({v[0]}, {v[1]}, {v[2]:g})" for k, v in ranges.items()),
                 "U1": u1, "U2": u2, "U3": u3, "hat_U1": hat_u1_status, "hat_U3": hat_u3,
                 "route_U": route_u, "route_hat_U": route_hat, "route_scale_invariant": route_scale,
                 "log_pi_gamma": log_pi}
    if dens is not None:
        decisions["density_radius"] = dens.radius
        decisions["density_a"] = dens.a
        decisions["density_construction"] = dens.construction
    threshold_parts = [p for p in parts if isinstance(p, (PolyEdge, PolyTriangle))]
    if len(threshold_parts) == 1 and len(parts) == 1:
        zt = threshold(threshold_parts[0])
        decisions["threshold"] = zt
        decisions["above_threshold"] = z > zt
    return RegularityReport(float(r_gamma), float(cg), float(cgp), float(pi), float(pw["scaled"]),
                            u3, bool(hat_u3), constants, decisions, bool(route is not None),
                            route, notes)
