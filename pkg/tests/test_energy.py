import json
import math

import numpy as np
import pytest

from hypergibbs.energy import (Delete, GibbsSpec, Insert, Translate, admissibility_audit,
                               decomposition_difference, energy, energy_delta, hamiltonian,
                               stability_audit)
from hypergibbs.errors import IllegalMove, NegativePartDivergent, NotConfined
from hypergibbs.geometry import (RHO0_2D, Configuration, LatticeSpec, SingletonBall, Window,
                                 circumball, fill_outside)
from hypergibbs.oracle import inner_spec
from hypergibbs.potential import (ConstantProfile, HardEquilateral, LongEdgeExclusion, ManyBody,
                                  PolyEdge, PolyTriangle, Singleton, Zero)

W = Window.square(1.0)


def lattice_spec(pot, a=0.25, window=W, z=1.0, b=None, seed=0):
    lat = LatticeSpec.triangular(a)
    t = SingletonBall(RHO0_2D * a if b is None else b)
    _, out = fill_outside(lat, t, window, 3.0, np.random.default_rng(seed) if b else None)
    return GibbsSpec.build(pot, z, window, out), lat, t


def brute_edges(pts):
    n = len(pts)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                c, r = circumball(pts[[i, j, k]])
                d = np.delete(np.linalg.norm(pts - c, axis=1), [i, j, k])
                if np.all(d > r):
                    edges |= {(i, j), (i, k), (j, k)}
    return edges


# ---------------------------------------------------------------- hamiltonian


def test_empty_everything_is_zero():
    for pot in (Zero(), PolyEdge(0, 1, 2), HardEquilateral(0.3)):
        spec = GibbsSpec.build(pot, 1.0, W, exact_boundary=True)
        e = hamiltonian(spec, np.zeros((0, 2)))
        assert e.total == 0.0 and e.count == 0


def test_manybody_pair_count():
    spec = GibbsSpec.build(ManyBody(0.5, ((2, 1.0),)), 1.0, W, exact_boundary=True)
    assert energy(spec, [(0.1, 0.1), (0.2, 0.1), (0.1, 0.2)]) == 3.0


def test_polyedge_matches_brute_force_edges():
    rng = np.random.default_rng(0)
    pot = PolyEdge(0, 1, 1)
    spec = GibbsSpec.build(pot, 1.0, W, exact_boundary=True)
    for _ in range(5):
        pts = rng.random((4, 2))
        want = math.fsum(float(np.linalg.norm(pts[i] - pts[j])) for i, j in brute_edges(pts))
        assert energy(spec, pts) == pytest.approx(want, rel=1e-14)


def test_breakdown_and_report(tmp_path):
    spec, _, _ = lattice_spec(PolyEdge(0.1, 1, 2))
    zeta = W.sample(np.random.default_rng(1), 6)
    e = hamiltonian(spec, zeta)
    assert e.total == pytest.approx(math.fsum(v for _, v in e.per_hyperedge))
    assert e.negative_part == 0.0
    e.write_report(tmp_path / "r.json")
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["hyperedges"] == e.count and len(rep["top"]) == 10


def test_not_confined_without_boundary():
    spec = GibbsSpec.build(PolyEdge(0, 1, 1), 1.0, W)
    assert not spec.ok
    with pytest.raises(NotConfined):
        hamiltonian(spec, [(0.5, 0.5)])


def test_negative_cap():
    pot = ManyBody(0.5, ((2, -1.0),))
    spec = GibbsSpec.build(pot, 1.0, W, exact_boundary=True, neg_cap=5.0)
    pts = np.random.default_rng(2).random((6, 2)) * 0.3
    with pytest.raises(NegativePartDivergent):
        hamiltonian(spec, pts)


def test_interior_must_lie_in_window():
    spec = GibbsSpec.build(Zero(), 1.0, W, exact_boundary=True)
    with pytest.raises(ValueError):
        hamiltonian(spec, [(2.0, 2.0)])
    with pytest.raises(ValueError):
        GibbsSpec.build(Zero(), 1.0, W, boundary=[(0.5, 0.5)])
    with pytest.raises(ValueError):
        GibbsSpec.build(Zero(), 0.0, W)


def test_hard_exclusion_infinite():
    spec, _, _ = lattice_spec(LongEdgeExclusion(0.0, 0.1, 0.3), b=0.02)
    assert energy(spec, np.zeros((0, 2))) == math.inf


# ---------------------------------------------------------------- moves


def test_insert_singleton_potential():
    spec = GibbsSpec.build(Singleton(0.7), 1.0, W, exact_boundary=True)
    assert energy_delta(spec, np.zeros((0, 2)), Insert((0.3, 0.3))) == 0.7


def test_delete_reinsert_cancels():
    spec, _, _ = lattice_spec(PolyEdge(0.1, 1, 2))
    rng = np.random.default_rng(3)
    zeta = W.sample(rng, 5)
    x = tuple(zeta[2])
    d1 = energy_delta(spec, zeta, Delete(x))
    d2 = energy_delta(spec, np.delete(zeta, 2, axis=0), Insert(x))
    assert d1 + d2 == 0.0


def test_delta_matches_recomputation():
    spec, _, _ = lattice_spec(PolyEdge(0.1, 1, 2))
    rng = np.random.default_rng(4)
    for _ in range(10):
        zeta = W.sample(rng, 5)
        y = tuple(W.sample(rng, 1)[0])
        mv = Translate(tuple(zeta[0]), y)
        after = zeta.copy()
        after[0] = y
        assert energy_delta(spec, zeta, mv) == energy(spec, after) - energy(spec, zeta)


def test_forbidden_conventions():
    spec = GibbsSpec.build(Singleton(math.inf), 1.0, W, exact_boundary=True)
    assert energy_delta(spec, np.zeros((0, 2)), Insert((0.5, 0.5))) == math.inf
    assert energy_delta(spec, [(0.5, 0.5)], Delete((0.5, 0.5))) == -math.inf


def test_illegal_moves():
    spec = GibbsSpec.build(Zero(), 1.0, W, exact_boundary=True)
    with pytest.raises(IllegalMove):
        energy_delta(spec, [(0.5, 0.5)], Delete((0.1, 0.1)))
    with pytest.raises(IllegalMove):
        energy_delta(spec, [(0.5, 0.5)], Insert((1.5, 0.5)))
    with pytest.raises(IllegalMove):
        energy_delta(spec, [(0.5, 0.5)], Insert((0.5, 0.5)))


# ---------------------------------------------------------------- audits


def test_admissibility_zero():
    spec = GibbsSpec.build(Zero(), 2.0, W, exact_boundary=True)
    rep = admissibility_audit(spec, 50, np.random.default_rng(5))
    assert rep["neg_part_finite_fraction"] == 1.0
    assert rep["Z_estimate"] == 1.0 and rep["Z_se"] == 0.0


def test_admissibility_hard_equilateral():
    spec, lat, t = lattice_spec(HardEquilateral(0.4), b=0.02, seed=1)
    rep = admissibility_audit(spec, 100, np.random.default_rng(6))
    assert rep["neg_part_finite_fraction"] == 1.0
    assert 0.0 <= rep["Z_estimate"] <= 1.0
    assert rep["Z_bracket"][1] == 1.0


def test_admissibility_long_edge_lower_bound():
    a = 0.25
    pot = LongEdgeExclusion(0.1, 0.3, 0.4)
    lat = LatticeSpec.triangular(a)
    t = SingletonBall(0.02)
    box = lat.box(2)
    _, out = fill_outside(lat, t, box, 3.0, np.random.default_rng(2))
    spec = GibbsSpec.build(pot, 1.0, box, out)
    rep = admissibility_audit(spec, 20, np.random.default_rng(7), lattice=lat, template=t)
    assert math.isfinite(rep["feasible_energy"])
    assert math.isfinite(rep["feasible_log_weight"])


def test_stability_del2():
    pot = PolyEdge(0, 0, 1, profile=ConstantProfile(-1.0))
    rng = np.random.default_rng(8)
    samples = [(GibbsSpec.build(pot, 1.0, W, exact_boundary=True), rng.random((n, 2)))
               for n in range(3, 40, 4)]
    rep = stability_audit(samples, c_S=3.0)
    assert rep["holds"] and rep["worst_ratio"] >= -3.0
    assert not stability_audit(samples, c_S=1.0)["holds"]


def test_stability_del3():
    pot = PolyTriangle(0, 0, 1, profile=ConstantProfile(-1.0))
    rng = np.random.default_rng(9)
    samples = [(GibbsSpec.build(pot, 1.0, W, exact_boundary=True), rng.random((n, 2)))
               for n in range(3, 40, 4)]
    rep = stability_audit(samples)
    assert rep["holds"] and rep["worst_ratio"] >= -2.0


def test_stability_nonnegative():
    spec, _, _ = lattice_spec(PolyEdge(0, 1, 1))
    rng = np.random.default_rng(10)
    rep = stability_audit([(spec, W.sample(rng, 5)) for _ in range(5)], c_S=0.0)
    assert rep["holds"]


# ---------------------------------------------------------------- invariants


def test_decomposition_constant():
    pot = PolyEdge(0.1, 1.0, 2.0)
    outer_w = Window.box([0, 0], [1, 1])
    inner_w = Window.box([0.25, 0.25], [0.75, 0.75])
    outer, _, _ = lattice_spec(pot, window=outer_w)
    rng = np.random.default_rng(11)
    for _ in range(3):
        xi = outer_w.sample(rng, 8)
        xi = xi[~inner_w.contains(xi)]
        inner = inner_spec(outer, inner_w, xi)
        vals = {decomposition_difference(outer, inner, inner_w.sample(rng, int(rng.integers(0, 6))))
                for _ in range(10)}
        assert len(vals) == 1


def test_translation_covariance():
    pot = PolyEdge(0.1, 1.0, 2.0)
    spec, lat, t = lattice_spec(pot, b=0.03, seed=3)
    x = np.array([3.0, -7.5])
    moved = GibbsSpec.build(pot, 1.0, W.translated(x), spec.boundary.translated(x))
    zeta = W.sample(np.random.default_rng(12), 7)
    assert energy(moved, zeta + x) == pytest.approx(energy(spec, zeta), rel=1e-12)


def test_scale_covariance_exact():
    pot = HardEquilateral(0.5)
    spec, lat, t = lattice_spec(pot, b=0.01, seed=4)
    zeta = W.sample(np.random.default_rng(13), 4)
    base = energy(spec, zeta)
    for r in (0.5, 2.0, 10.0):
        s = GibbsSpec.build(pot, 1.0, W.scaled(r), spec.boundary.scaled(r))
        assert energy(s, zeta * r) == base


def test_pseudo_periodic_upper_bound():
    from hypergibbs.conditions import c_gamma
    a = 0.25
    pot = PolyEdge(0.1, 1.0, 2.0)
    lat = LatticeSpec.triangular(a)
    t = SingletonBall(0.2 * a)
    box = lat.box(2)
    inside, out = fill_outside(lat, t, box, 3.0, np.random.default_rng(14))
    spec = GibbsSpec.build(pot, 1.0, box, out)
    cg = c_gamma(None, pot, lat, t)
    cells = 25
    layers = int(math.ceil(spec.r / lat.inner_diameter))
    ring = (2 * (2 + layers) + 1) ** 2 - cells
    assert energy(spec, inside.points) <= cg * (cells + ring)


def test_spec_with_window_keeps_settings():
    spec = GibbsSpec.build(Zero(), 1.5, W, exact_boundary=True)
    other = spec.with_window(Window.square(0.5), Configuration(np.zeros((0, 2))))
    assert other.z == 1.5 and other.exact_boundary
