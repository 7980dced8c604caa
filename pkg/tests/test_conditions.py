import math

import mpmath
import numpy as np
import pytest

from hypergibbs.conditions import (ThresholdInput, c_a_bound, c_gamma, check_conditions,
                                   delaunay_offsets, density_bound, gamma_weight,
                                   lattice_constants, parse_report, suggest_lattice, threshold,
                                   threshold_grid)
from hypergibbs.errors import UnsupportedDimension, UnsupportedModel
from hypergibbs.geometry import (RHO0_2D, TRIANGULAR_OFFSETS, ClusterTemplate, LatticeSpec,
                                 SingletonBall, Window)
from hypergibbs.hypergraph import DEL2
from hypergibbs.potential import (ForcedClustering, HardEquilateral, LongEdgeExclusion, PolyEdge,
                                  PolyTriangle, Zero)


def test_lattice_constants_plane():
    c = lattice_constants(2, DEL2)
    assert c["gamma_d"] == 6 and c["recipe"] == "triangular"
    assert c["column_angle"] == pytest.approx(math.pi / 3)
    assert c["rho0"] == pytest.approx(math.sqrt(3) / 6)


def test_lattice_constants_higher_dimension():
    with pytest.raises(UnsupportedDimension):
        lattice_constants(3, DEL2)
    c = lattice_constants(3)
    assert c["recipe"] == "cubic" and c["gamma_d"] == 26


def test_delaunay_offsets_are_hexagonal():
    got = delaunay_offsets(LatticeSpec.triangular(1.0))
    assert got == sorted(TRIANGULAR_OFFSETS)


def test_singleton_weight_exact():
    lat = LatticeSpec.cubic(2.0)
    w = gamma_weight(1.0, lat, SingletonBall(0.9))
    assert w["exact"]
    assert w["value"] == pytest.approx(math.exp(-4.0) * math.pi * 0.81, rel=1e-12)


def test_cluster_weight_lower_bound():
    lat = LatticeSpec.cubic(1.0)
    t = ClusterTemplate(2, 0.1, 0.3)
    z = 50.0
    w = gamma_weight(z, lat, t, rng=0, mc=20000)
    want = math.exp(-z) * z ** 3 / 6 * math.pi ** 3 * 0.1 ** 2 * 0.15 ** 4
    assert w["lower_bound"] == pytest.approx(want, rel=1e-12)
    assert w["mc_estimate"] >= w["lower_bound"] - 3 * w["mc_se"]


def test_gamma_weight_rejects_bad_input():
    with pytest.raises(ValueError):
        gamma_weight(0.0, LatticeSpec.cubic(1.0), SingletonBall(0.1))


def test_c_gamma_zero():
    lat = LatticeSpec.triangular(1.0)
    assert c_gamma(None, Zero(), lat, SingletonBall(0.2), draws=3) == 0.0


@pytest.mark.parametrize("k0,k1,alpha,a", [(0, 1, 2, 0.3), (0.5, 2, 1, 0.5), (1, 0.5, 3, 1.0)])
def test_c_gamma_below_worst_case(k0, k1, alpha, a):
    pot = PolyEdge(k0, k1, alpha)
    lat = LatticeSpec.triangular(a)
    cg = c_gamma(DEL2, pot, lat, SingletonBall(RHO0_2D * a), draws=20)
    assert 0 < cg <= c_a_bound(pot, a)


def test_c_gamma_forced_clustering():
    pot = ForcedClustering(2, 0.5)
    lat = LatticeSpec.cubic(1.0)
    cg = c_gamma(None, pot, lat, ClusterTemplate(2, 0.1, 0.3), draws=5)
    assert cg <= 3 * pot.phi_sup


def test_threshold_zero_and_reference():
    assert threshold(ThresholdInput("PolyEdge", 0, 0, 2)) == 0.0
    mpmath.mp.dps = 50
    r = mpmath.sqrt(3) / 6
    ref = (1 + 2 * r) * mpmath.sqrt(3 * mpmath.e ** 2) / (mpmath.pi * r * r)
    got = threshold(ThresholdInput("PolyEdge", 0, 1, 2))
    assert got == pytest.approx(float(ref), rel=1e-12)
    assert got == pytest.approx(28.37, rel=1e-3)


def test_threshold_monotone():
    z = [threshold(ThresholdInput("PolyEdge", 0, k1, 2)) for k1 in (0.5, 1, 2, 4)]
    assert z == sorted(z)
    z = [threshold(ThresholdInput("PolyTriangle", k0, 1, 2)) for k0 in (0, 0.5, 1)]
    assert z == sorted(z) and z[0] > 0
    rows = threshold_grid("PolyEdge", [0, 1], [1, 2], [1, 2, 3])
    assert len(rows) == 12


def test_threshold_rejects_other_models():
    with pytest.raises(UnsupportedModel):
        threshold(HardEquilateral(0.3))
    with pytest.raises(ValueError):
        ThresholdInput("Voronoi")


def test_suggest_lattice():
    lat, t = suggest_lattice(PolyEdge(0, 1, 2))
    a = float(np.linalg.norm(lat.M[:, 0]))
    assert t.b == pytest.approx(RHO0_2D * a)


def test_density_bound():
    d = density_bound(LongEdgeExclusion(0.1, 0.3, 0.4))
    assert d.radius == pytest.approx(0.4 / math.sqrt(3))
    assert d.count(Window.square(1.0)) == 4
    assert density_bound(PolyEdge(0, 1, 1)) is None


def test_route_u_for_polyedge_above_threshold():
    pot = PolyEdge(0, 1, 2)
    rep = check_conditions(DEL2, pot, 200.0, LatticeSpec.triangular(0.3),
                           SingletonBall(0.0866), draws=10)
    assert rep.verdict and rep.route == "U"
    assert rep.decisions["above_threshold"]


def test_route_hat_for_long_edge():
    pot = LongEdgeExclusion(0.1, 0.3, 0.4)
    rep = check_conditions(None, pot, 1.0, LatticeSpec.triangular(0.25), SingletonBall(0.02),
                           draws=5)
    assert not rep.u3_holds
    assert rep.verdict and rep.route == "U-hat"


def test_route_scale_invariant():
    rep = check_conditions(None, HardEquilateral(0.3), 1.0, LatticeSpec.triangular(0.5),
                           SingletonBall(0.02), draws=5)
    assert rep.verdict and rep.route == "scale-invariant"


def test_forced_clustering_needs_u3():
    pot = ForcedClustering(2, 0.5)
    lat = LatticeSpec.cubic(1.0)
    t = ClusterTemplate(2, 0.1, 0.3)
    hi = check_conditions(None, pot, 50.0, lat, t, draws=5)
    lo = check_conditions(None, pot, 5.0, lat, t, draws=5)
    assert hi.verdict and hi.route == "U"
    assert not lo.verdict and lo.route is None


def test_u3_equivalence():
    lat = LatticeSpec.triangular(0.4)
    t = SingletonBall(RHO0_2D * 0.4)
    seen = set()
    for z in (1.0, 30.0, 300.0):
        rep = check_conditions(DEL2, PolyEdge(0, 1, 2), z, lat, t, draws=3)
        C = lat.cell_volume
        assert rep.u3_holds == (z * C + math.log(rep.pi_gamma) > rep.c_gamma)
        seen.add(rep.u3_holds)
    assert seen == {True, False}


def test_unsupported_inputs():
    lat = LatticeSpec.triangular(1.0)
    with pytest.raises(UnsupportedModel):
        check_conditions(None, object(), 1.0, lat, SingletonBall(0.1))
    with pytest.raises(UnsupportedModel):
        check_conditions(DEL2, PolyTriangle(0, 1, 1), 1.0, lat, SingletonBall(0.1))


def test_report_roundtrip():
    rep = check_conditions(DEL2, PolyEdge(0, 1, 2), 50.0,
                           LatticeSpec.triangular(0.3), SingletonBall(0.05), draws=3)
    back = parse_report(rep.to_text())
    assert back["verdict"] == str(rep.verdict).lower()
    assert float(back["c_gamma"]) == rep.c_gamma
    assert back["route"] == (rep.route or "none")
    assert set(back) == set(rep.to_dict())
