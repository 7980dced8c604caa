"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that is repeated in the terminal summary.
"""
import math
import time

import mpmath
import numpy as np
import pytest
from scipy.spatial import Delaunay, cKDTree

from hypergibbs.conditions import (ThresholdInput, c_a_bound, c_gamma, delaunay_offsets,
                                   gamma_weight, threshold)
from hypergibbs.energy import GibbsSpec, decomposition_difference, energy, hamiltonian
from hypergibbs.geometry import (RHO0_2D, TRIANGULAR_OFFSETS, ClusterTemplate, LatticeSpec,
                                 SingletonBall, Tessellation, Window, delaunay, fill_outside,
                                 pseudo_periodic, voronoi_cell)
from hypergibbs.hypergraph import DEL2
from hypergibbs.oracle import (bump_functions, consistency_check, entropy_diagnostic,
                               inner_spec, partition_function)
from hypergibbs.potential import (DistortedTriangular, ForcedClustering, HardEquilateral,
                                  LongEdgeExclusion, ManyBody, PiecewiseProfile, PolyEdge, Zero)
from hypergibbs.sampler import SamplerConfig, init_feasible, run, total_variation

pytestmark = pytest.mark.slow


def boxed_spec(pot, lat, template, n, z, seed):
    box = lat.box(n)
    _, out = fill_outside(lat, template, box, 3.0, np.random.default_rng(seed))
    return GibbsSpec.build(pot, z, box, out)


# ---------------------------------------------------------------- 1


def test_duality(criterion):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    bad = checked = 0
    for _ in range(200):
        n = int(rng.integers(3, 51))
        pts = rng.random((n, 2))
        tess = Tessellation(pts)
        for i in np.flatnonzero(~tess.hull_vertex):
            cell = voronoi_cell(pts, int(i))
            cc = tess.cc[np.any(tess.tris == i, axis=1)]
            same_nb = set(cell.neighbours.tolist()) == set(tess.neighbours(int(i)).tolist())
            d = np.linalg.norm(cell.vertices[:, None] - cc[None], axis=2)
            tol = 1e-9 * max(1.0, float(np.abs(cc).max()))
            same_v = len(cc) == len(cell.vertices) and d.min(axis=1).max() < tol
            bad += not (same_nb and same_v)
            checked += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 10.0
    criterion(1, ok, f"200 configs, {checked} bounded cells, {bad} mismatches, {dt:.1f} s")
    assert ok


# ---------------------------------------------------------------- 2


def test_euler_bounds(criterion):
    rng = np.random.default_rng(2)
    worst = 0
    cases = 0
    for n in list(range(3, 60)) + [100, 200, 400]:
        for kind in ("uniform", "clustered", "thin"):
            if kind == "uniform":
                pts = rng.random((n, 2))
            elif kind == "clustered":
                pts = rng.random((n, 2)) * 1e-3 + rng.integers(0, 3, (n, 1))
            else:
                pts = np.c_[rng.random(n), 1e-6 * rng.random(n)]
            d = delaunay(pts)
            worst = max(worst, len(d[2]) - (3 * n - 6), len(d[3]) - (2 * n - 5))
            cases += 1
    ok = worst <= 0
    criterion(2, ok, f"{cases} configs, max excess over 3n-6 / 2n-5 = {worst}")
    assert ok


# ---------------------------------------------------------------- 3


def test_consistency(criterion):
    outer = Window.square(1.0)
    inner = Window.box([0.25, 0.25], [0.75, 0.75])
    pots = {
        "Zero": Zero(),
        "ManyBody": ManyBody(0.3, ((2, PiecewiseProfile((0.0, 0.1, 0.2), (1.0, 0.5, 0.2))),
                                   (3, 0.3))),
        "Del2": PolyEdge(0.3, 1.0, 2.0),
    }
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, pot in pots.items():
        spec = GibbsSpec.build(pot, 0.5, outer, exact_boundary=True)
        F = bump_functions(outer, 20, 0)
        res = consistency_check(spec, inner, F, n_max=8, mc=1500, rng=1, inner_mc=96)
        good = res.holds and res.budget <= 1e-2
        ok &= good
        parts.append(f"{name} dev={res.deviation:.2g} budget={res.budget:.2g}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    criterion(3, ok, "; ".join(parts) + f"; {dt:.0f} s")
    assert ok


# ---------------------------------------------------------------- 4


def test_sampler_matches_oracle(criterion):
    spec = GibbsSpec.build(PolyEdge(0.3, 1.0, 2.0), 4.0, Window.square(0.5), exact_boundary=True)
    t0 = time.perf_counter()
    z = partition_function(spec, n_max=12, mc_per_n=4000, rng=0)
    p = np.array(z.terms) / z.value
    res = run(spec, SamplerConfig(steps=1_000_000, burn_in=1000, thin=10, seed=1),
              keep_samples=False)
    tv = total_variation(res.histogram(), p)
    dt = time.perf_counter() - t0
    ok = tv <= 0.02 and dt < 300
    criterion(4, ok, f"TV(N) = {tv:.4f} over 1e6 steps, {dt:.0f} s")
    assert ok


# ---------------------------------------------------------------- 5


def test_thresholds(criterion):
    zero = threshold(ThresholdInput("PolyEdge", 0.0, 0.0, 2.0))
    mpmath.mp.dps = 40
    r = mpmath.sqrt(3) / 6
    ref = float((1 + 2 * r) * mpmath.sqrt(3 * mpmath.e ** 2) / (mpmath.pi * r * r))
    got = threshold(ThresholdInput("PolyEdge", 0.0, 1.0, 2.0))
    rel = abs(got - ref) / ref
    ok = zero == 0.0 and rel <= 1e-6 and round(got, 2) == 28.37
    criterion(5, ok, f"k1=0 -> {zero}; (0,1,2) -> {got!r} (rel err {rel:.1e})")
    assert ok


# ---------------------------------------------------------------- 6


def test_lattice(criterion):
    offs = [delaunay_offsets(LatticeSpec.triangular(1.0), SingletonBall(0.2),
                             rng=None if s is None else np.random.default_rng(s))
            for s in (None, 1, 2)]
    offs_ok = all(o == sorted(TRIANGULAR_OFFSETS) for o in offs)
    werr = 0.0
    for z, a, b in ((1.0, 1.0, 0.2), (7.5, 0.3, 0.05), (0.01, 2.0, 0.5)):
        lat = LatticeSpec.triangular(a)
        got = gamma_weight(z, lat, SingletonBall(b))["value"]
        want = math.exp(-z * lat.cell_volume) * z * math.pi * b * b
        werr = max(werr, abs(got - want) / want)
    worst = -math.inf
    for k0, k1, alpha, a in ((0, 1, 2, 0.3), (0.5, 2, 1, 0.5), (1, 0.5, 3, 1.0), (0, 4, 0.5, 0.2)):
        pot = PolyEdge(k0, k1, alpha)
        lat = LatticeSpec.triangular(a)
        cg = c_gamma(DEL2, pot, lat, SingletonBall(RHO0_2D * a), draws=30)
        bound = 3 * (k0 + k1 * a ** alpha * (1 + 2 * RHO0_2D) ** alpha)
        assert bound == pytest.approx(c_a_bound(pot, a))
        worst = max(worst, cg - bound)
    ok = offs_ok and werr <= 1e-12 and worst <= 0
    criterion(6, ok, f"offsets ok={offs_ok}; gamma_weight rel err {werr:.1e}; "
                     f"max c_A+ - bound = {worst:.3g}")
    assert ok


# ---------------------------------------------------------------- 7


def _violations(name, pot, interior, boundary):
    """Constraint check on the interior points with scipy's geometry (independent code)."""
    n = len(interior)
    if n == 0:
        return 0
    pts = np.vstack([interior, boundary])
    if name == "ForcedClustering":
        _, nb = cKDTree(pts).query(interior, k=pot.k + 1)
        cl = pts[nb]
        diam = np.sqrt(((cl[:, :, None] - cl[:, None]) ** 2).sum(-1)).max(axis=(1, 2))
        return int((diam >= pot.delta).sum())
    tri = Delaunay(pts)
    simp = tri.simplices
    if name == "DistortedTriangular":
        ptr, _ = tri.vertex_neighbor_vertices
        return int((np.diff(ptr)[:n] != 6).sum())
    simp = simp[(simp < n).any(axis=1)]
    if name == "LongEdgeExclusion":
        e = np.vstack([simp[:, [0, 1]], simp[:, [1, 2]], simp[:, [0, 2]]])
        e = e[(e < n).any(axis=1)]
        return int((np.linalg.norm(pts[e[:, 0]] - pts[e[:, 1]], axis=1) > pot.l2).sum())
    a, b, c = (pts[simp[:, i]] for i in range(3))

    def angle(p, q, r):
        u, v = q - p, r - p
        cos = (u * v).sum(1) / np.linalg.norm(u, axis=1) / np.linalg.norm(v, axis=1)
        return np.arccos(np.clip(cos, -1, 1))

    smallest = np.minimum(np.minimum(angle(a, b, c), angle(b, c, a)), angle(c, a, b))
    return int((smallest <= math.pi / 3 - pot.delta).sum())



def test_hard_exclusion_support(criterion):
    tri = LatticeSpec.triangular(0.25)
    small = SingletonBall(0.02)
    cases = {
        "LongEdgeExclusion": (LongEdgeExclusion(0.1, 0.3, 0.4), tri, small, 2, 30.0),
        "HardEquilateral": (HardEquilateral(0.5), tri, small, 2, 30.0),
        "ForcedClustering": (ForcedClustering(2, 0.5), LatticeSpec.cubic(1.0),
                             ClusterTemplate(2, 0.1, 0.3), 1, 3.0),
        "DistortedTriangular": (DistortedTriangular(), tri, small, 2, 30.0),
    }
    parts, ok = [], True
    for name, (pot, lat, t, n, z) in cases.items():
        spec = boxed_spec(pot, lat, t, n, z, 0)
        state = init_feasible(spec, lat, t, 1)
        res = run(spec, SamplerConfig(steps=11_000, burn_in=1000, thin=10, seed=1,
                                      check_every=1000), state=state)
        finite = sum(math.isfinite(energy(spec, s)) for s in res.samples)
        viol = sum(_violations(name, pot, s, spec.boundary.points) > 0 for s in res.samples)
        good = len(res.samples) >= 1000 and finite == len(res.samples) and viol == 0
        ok &= good
        acc = res.acceptance()
        parts.append(f"{name} {finite}/{len(res.samples)} finite, {viol} violating "
                     f"(acc b/d/t {acc['birth']:.2f}/{acc['death']:.2f}/{acc['translate']:.2f})")
    criterion(7, ok, "; ".join(parts))
    assert ok


# ---------------------------------------------------------------- 8


def test_entropy(criterion):
    a = 0.6
    lat = LatticeSpec.triangular(a)
    t = SingletonBall(RHO0_2D * a)
    pot = PolyEdge(0.0, 0.5, 2.0)
    worst = -math.inf
    fails = 0
    for n in (1, 2):
        for seed in range(10):
            d = entropy_diagnostic(None, pot, 3.0, lat, t, n, mc_per_n=30, rng=seed)
            margin = d.lhs - (d.rhs + 3 * d.lhs_se)
            worst = max(worst, margin)
            fails += margin > 0
    ok = fails == 0
    criterion(8, ok, f"20 runs (n = 1, 2 x 10 seeds), max lhs - (rhs + 3 se) = {worst:.3g}")
    assert ok


# ---------------------------------------------------------------- 9


def test_decomposition(criterion):
    lat = LatticeSpec.triangular(0.25)
    t = SingletonBall(0.03)
    outer_w = Window.square(1.0)
    pot = PolyEdge(0.1, 1.0, 2.0)
    rng = np.random.default_rng(9)
    bad = 0
    for trip in range(50):
        _, out = fill_outside(lat, t, outer_w, 3.0, np.random.default_rng(trip))
        outer = GibbsSpec.build(pot, 1.0, outer_w, out)
        lo = rng.uniform(0.1, 0.4, 2)
        inner_w = Window.box(lo, lo + rng.uniform(0.2, 0.5, 2))
        xi = outer_w.sample(rng, int(rng.integers(4, 15)))
        xi = xi[~inner_w.contains(xi)]
        inner = inner_spec(outer, inner_w, xi)
        vals = {decomposition_difference(outer, inner,
                                         inner_w.sample(rng, int(rng.integers(0, 8))))
                for _ in range(20)}
        bad += len(vals) != 1
    ok = bad == 0
    criterion(9, ok, f"50 (omega, Lambda, xi) triples x 20 zeta, {bad} non-constant")
    assert ok


# ---------------------------------------------------------------- 10


def test_scale_invariance(criterion):
    lat = LatticeSpec.triangular(0.25)
    t = SingletonBall(0.03)
    box = lat.box(2)
    rng = np.random.default_rng(10)
    parts, ok = [], True
    for pot in (HardEquilateral(0.5), DistortedTriangular()):
        bad = finite = 0
        for k in range(50):
            _, out = fill_outside(lat, t, box, 3.0, np.random.default_rng(k))
            spec = GibbsSpec.build(pot, 1.0, box, out)
            if k % 2:
                zeta = box.sample(rng, int(rng.integers(0, 30)))
            else:
                zeta = pseudo_periodic(lat, t, box, rng).points
                zeta = zeta[box.contains(zeta)]
            base = hamiltonian(spec, zeta)
            finite += base.finite
            for r in (0.5, 2.0, 10.0):
                s = GibbsSpec.build(pot, 1.0, box.scaled(r), spec.boundary.scaled(r))
                e = hamiltonian(s, zeta * r)
                same = (e.total == base.total and e.count == base.count
                        and np.array_equal(np.sort(e.values), np.sort(base.values)))
                bad += not same
        ok &= bad == 0
        parts.append(f"{type(pot).__name__}: {bad} mismatches over 150 ({finite}/50 finite)")
    criterion(10, ok, "; ".join(parts))
    assert ok

