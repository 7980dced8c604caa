import math

import numpy as np
import pytest

from hypergibbs.errors import StructureMismatch
from hypergibbs.geometry import RHO0_2D, LatticeSpec, SingletonBall, Window, pseudo_periodic
from hypergibbs.hypergraph import DEL2, DEL2B, DEL3, LC, SGB, Geometry, SGk, enumerate_hyperedges
from hypergibbs.potential import (AdjacentVoronoi, AngleTriangle, ConstantProfile,
                                  DistortedTriangular, ForcedClustering, FunctionProfile,
                                  HardEquilateral, LongEdgeExclusion, ManyBody, PiecewiseProfile,
                                  PolyEdge, PolyTriangle, PowerProfile, Singleton, Sum,
                                  VoronoiCell, Zero, cell_features, evaluate, metadata,
                                  non_hereditary_witness, potential_from_dict, shift_check,
                                  stability_constant, table_values)


def only(structure, pts):
    (h,) = enumerate_hyperedges(structure, pts)
    return h


def all_values(pot, structure, pts):
    geo = Geometry(np.asarray(pts, dtype=float))
    table = geo.table(structure, getattr(pot, "max_order", None))
    return table_values(pot, structure, geo, table, np.arange(len(table)))


def lattice_points(a=1.0, half=4.0, b=None, rng=None):
    lat = LatticeSpec.triangular(a)
    t = SingletonBall(RHO0_2D * a if b is None else b)
    return pseudo_periodic(lat, t, Window.box([-half, -half], [half, half]), rng).points


def random_points(seed, n=40):
    return np.random.default_rng(seed).random((n, 2)) * 3


CORPUS = [
    (PolyEdge(0.5, 1.0, 2.0), DEL2),
    (PolyEdge(0, 0, 1, profile=PiecewiseProfile((0.0, 0.2), (-1.0, 0.5))), DEL2),
    (LongEdgeExclusion(0.1, 0.4, 0.6, inner=ConstantProfile(-0.2)), DEL2),
    (PolyTriangle(0.1, 2.0, 1.5), DEL3),
    (AngleTriangle(FunctionProfile(lambda b, g: g - b, lower=0.0, upper=math.pi), 0.5), DEL3),
    (HardEquilateral(0.4), DEL3),
    (ForcedClustering(2, 0.5), SGk(2)),
    (VoronoiCell("area", PowerProfile(0, 1, 1)), SGB),
    (VoronoiCell("faces", PiecewiseProfile((0.0, 5.5, 6.5), (1.0, 0.0, -0.5))), SGB),
    (DistortedTriangular(), SGB),
    (AdjacentVoronoi("common_edge", PiecewiseProfile((0.0, 0.1), (-0.3, 0.2))), DEL2B),
    (AdjacentVoronoi("area_ratio", PiecewiseProfile((0.0, 0.5), (0.4, -0.1))), DEL2B),
    (ManyBody(0.3, ((2, PiecewiseProfile((0.0, 0.1), (1.0, -0.2))), (3, 0.5))), LC(0.3)),
]
IDS = [f"{type(p).__name__}-{i}" for i, (p, _) in enumerate(CORPUS)]


# ---------------------------------------------------------------- values


def test_polyedge_square_length():
    pts = [(0.0, 0.0), (2.0, 0.0), (1.0, 5.0)]
    h = next(h for h in enumerate_hyperedges(DEL2, pts) if set(h.points) == {pts[0], pts[1]})
    assert evaluate(PolyEdge(0, 1, 2), h, pts) == 4.0


def test_hard_equilateral_angles():
    pot = HardEquilateral(math.pi / 12)
    eq = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    assert evaluate(pot, only(DEL3, eq), eq) == 0.0
    # a right triangle with smallest angle pi/6
    thin = [(0.0, 0.0), (math.sqrt(3), 0.0), (0.0, 1.0)]
    assert evaluate(pot, only(DEL3, thin), thin) == math.inf


def test_forced_clustering_wide_cluster_forbidden():
    pot = ForcedClustering(2, 1.0)
    pts = [(0.0, 0.0), (0.75, 0.0), (-0.75, 0.0), (20.0, 0.0)]
    h = next(h for h in enumerate_hyperedges(SGk(2), pts) if h.points == ((0.0, 0.0),))
    assert evaluate(pot, h, pts) == math.inf
    tight = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.3)]
    assert np.all(all_values(pot, SGk(2), tight) == 0.0)


def bulk_rows(pts, table, radius=2.5):
    return np.flatnonzero(np.linalg.norm(pts[table.members[:, 0]], axis=1) < radius)


def test_distorted_triangular_on_lattice():
    pts = lattice_points()
    geo = Geometry(pts)
    table = geo.table(SGB)
    rows = bulk_rows(pts, table)
    vals = table_values(DistortedTriangular(), SGB, geo, table, rows)
    assert len(vals) > 10 and np.all(vals == 0.0)


def test_distorted_triangular_detects_defect():
    pts = lattice_points(b=0.25, rng=np.random.default_rng(1))
    vals = all_values(DistortedTriangular(), SGB, pts)
    assert np.isinf(vals).any()


def test_polytriangle_uses_circumdiameter():
    eq = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    v = evaluate(PolyTriangle(0.0, 1.0, 1.0), only(DEL3, eq), eq)
    assert v == pytest.approx(2 / math.sqrt(3))


def test_long_edge_exclusion():
    pot = LongEdgeExclusion(0.1, 0.4, 0.6)
    pts = [(0.0, 0.0), (0.5, 0.0), (0.25, 0.3)]
    assert np.all(all_values(pot, DEL2, pts) == 0.0)
    far = [(0.0, 0.0), (0.7, 0.0), (0.35, 0.3)]
    assert np.isinf(all_values(pot, DEL2, far)).any()
    with pytest.raises(ValueError):
        LongEdgeExclusion(0.5, 0.4, 0.6)


def test_voronoi_cell_features_on_lattice():
    a = 0.8
    pts = lattice_points(a)
    geo = Geometry(pts)
    table = geo.table(SGB)
    f = cell_features(geo, table.members[bulk_rows(pts, table), 0])
    assert np.all(f["faces"] == 6)
    assert np.allclose(f["area"], a * a * math.sqrt(3) / 2)
    assert np.allclose(f["perimeter"], 6 * a / math.sqrt(3))


def test_adjacent_voronoi_common_edge_on_lattice():
    a = 0.8
    pts = lattice_points(a)
    pot = AdjacentVoronoi("common_edge", PiecewiseProfile((0.0, 1.0), (0.0, 1.0), "linear"))
    geo = Geometry(pts)
    table = geo.table(DEL2B)
    rows = bulk_rows(pts, table)
    vals = table_values(pot, DEL2B, geo, table, rows)
    assert len(vals) and np.allclose(vals, a / math.sqrt(3))
    with pytest.raises(ValueError):
        AdjacentVoronoi("area_ratio", PowerProfile(0, 1, 1))


def test_manybody_counts():
    pts = [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1)]
    pot = ManyBody(0.5, ((2, 1.0),))
    assert math.fsum(all_values(pot, LC(0.5), pts)) == 3.0


def test_structure_mismatch():
    pts = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8)]
    with pytest.raises(StructureMismatch):
        evaluate(HardEquilateral(0.3), next(iter(enumerate_hyperedges(DEL2, pts))), pts)


def test_sum_adds_per_hyperedge():
    pts = random_points(2)
    a, b = PolyEdge(0, 1, 1), PolyEdge(0.2, 0.0, 1.0)
    s = all_values(Sum((a, b)), DEL2, pts)
    assert np.allclose(s, all_values(a, DEL2, pts) + all_values(b, DEL2, pts))
    mixed = Sum((a, HardEquilateral(0.3)))
    assert mixed.structures == (DEL2, DEL3)
    with pytest.raises(StructureMismatch):
        mixed.structure


# ---------------------------------------------------------------- metadata


def test_metadata_lower_bound_from_profile():
    pot = PolyEdge(0, 0, 1, profile=PiecewiseProfile((0.0, 1.0), (-1.0, 2.0)))
    assert metadata(pot)["c_phi"] == 1.0
    assert metadata(pot)["c_S"] == 3.0


def test_metadata_flags():
    assert metadata(HardEquilateral(0.2))["scale_invariant"]
    assert metadata(DistortedTriangular())["scale_invariant"]
    assert not metadata(ManyBody(1.0, ((2, 1.0),)))["scale_invariant"]
    assert metadata(LongEdgeExclusion(0, 1, 2))["hard_exclusion"]
    assert not metadata(PolyEdge(0, 1, 2))["hard_exclusion"]
    assert metadata(PolyTriangle(0, 0, 1, profile=ConstantProfile(-1.0)))["c_S"] == 2.0
    assert stability_constant(Zero()) == 0.0


@pytest.mark.parametrize("pot,structure", CORPUS, ids=IDS)
def test_lower_bound_holds(pot, structure):
    for seed in range(3):
        pts = random_points(seed) if structure.kind != "LC" else random_points(seed) / 5
        vals = all_values(pot, structure, pts)
        assert np.all(vals >= -pot.c_phi)


@pytest.mark.parametrize("pot,structure", CORPUS, ids=IDS)
def test_shift_invariance(pot, structure):
    pts = random_points(5)
    if structure.kind == "LC":
        pts = pts / 5
    edges = sorted(enumerate_hyperedges(structure, pts, max_order=getattr(pot, "max_order", None)),
                   key=lambda h: h.indices)
    x = np.array([0.5, -1.5])
    assert shift_check(pot, edges[0], pts, np.zeros(2))
    for h in edges[:5]:
        assert shift_check(pot, h, pts, x, rtol=1e-9)


@pytest.mark.parametrize("pot,structure", [c for c in CORPUS if c[0].scale_invariant],
                         ids=[i for i, c in zip(IDS, CORPUS) if c[0].scale_invariant])
def test_scale_invariance(pot, structure):
    pts = random_points(6)
    base = all_values(pot, structure, pts)
    for r in (0.5, 2.0, 10.0):
        got = all_values(pot, structure, pts * r)
        if isinstance(pot, (HardEquilateral, DistortedTriangular, VoronoiCell)):
            assert np.array_equal(got, base)
        else:
            assert np.allclose(got, base, rtol=1e-12)


@pytest.mark.parametrize("pot,structure", [c for c in CORPUS if c[1].kind != "LC"],
                         ids=[i for i, c in zip(IDS, CORPUS) if c[1].kind != "LC"])
def test_locality(pot, structure):
    """Points outside the horizon do not change a hyperedge's value."""
    from hypergibbs.hypergraph import horizon
    pts = lattice_points(0.5, 3.0, b=0.08, rng=np.random.default_rng(7))
    edges = [h for h in enumerate_hyperedges(structure, pts)
             if np.linalg.norm(np.mean(h.points, axis=0)) < 0.5]
    assert edges
    for h in edges[:3]:
        hz = horizon(structure, h, pts)
        v = evaluate(pot, h, pts)
        far = np.array([not hz.contains(p) for p in pts])
        far &= np.linalg.norm(pts, axis=1) > 2.5
        assert far.any()
        assert evaluate(pot, h, pts[~far]) == v


def test_non_hereditary_witness():
    pot, pts, i = non_hereditary_witness()
    s = pot.structure
    assert np.all(np.isfinite(all_values(pot, s, pts)))
    assert np.isinf(all_values(pot, s, np.delete(pts, i, axis=0))).any()


# ---------------------------------------------------------------- serialisation


@pytest.mark.parametrize("pot", [
    Zero(), Singleton(0.3), PolyEdge(0.1, 2.0, 1.5), PolyEdge(0, 1, 1, gabriel=True),
    PolyEdge(0, 0, 1, profile=PiecewiseProfile((0.0, 0.5), (0.0, 1.0), "linear")),
    LongEdgeExclusion(0.1, 0.2, 0.3, r0=0.05), PolyTriangle(0, 1, 2), HardEquilateral(0.5),
    ForcedClustering(2, 0.3), VoronoiCell("faces", ConstantProfile(1.0)), DistortedTriangular(),
    AdjacentVoronoi("area_ratio", PiecewiseProfile((0.0,), (1.0,))),
    ManyBody(0.5, ((2, 1.0), (3, PiecewiseProfile((0.0, 0.2), (0.0, 1.0))))),
    Sum((PolyEdge(0, 1, 1), HardEquilateral(0.2))),
])
def test_to_dict_roundtrip(pot):
    back = potential_from_dict(pot.to_dict())
    assert back.to_dict() == pot.to_dict()


def test_profiles():
    p = PiecewiseProfile((0.0, 1.0, 2.0), (3.0, math.inf, -1.0))
    assert p(np.array([-1.0, 0.5, 1.5, 9.0])).tolist() == [3.0, 3.0, math.inf, -1.0]
    assert p.lower == -1.0 and p.upper == math.inf
    lin = PiecewiseProfile((0.0, 1.0), (0.0, 2.0), "linear")
    assert lin(np.array([0.25]))[0] == 0.5
    with pytest.raises(ValueError):
        PiecewiseProfile((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        PowerProfile(-1.0, 1.0, 1.0)
