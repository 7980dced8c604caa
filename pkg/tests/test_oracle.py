import math

import numpy as np
import pytest
from scipy import integrate, stats

from hypergibbs.energy import GibbsSpec
from hypergibbs.errors import TailNotConverged
from hypergibbs.geometry import RHO0_2D, LatticeSpec, SingletonBall, Window
from hypergibbs.oracle import (bump_functions, consistency_check, entropy_diagnostic,
                               gibbs_expectation, log_tail_bound, partition_function,
                               poisson_allocation)
from hypergibbs.potential import ManyBody, PolyEdge, Zero

W = Window.square(1.0)


def square_distance_density(d):
    # distance between two uniform points of the unit square
    if d <= 1:
        return 2 * d * (d * d - 4 * d + math.pi)
    return 2 * d * (4 * math.sqrt(d * d - 1) - (d * d + 2 - math.pi) - 4 * math.acos(1 / d))


def test_zero_potential_series_sums_to_one():
    spec = GibbsSpec.build(Zero(), 2.0, W, exact_boundary=True)
    est = partition_function(spec, n_max=12, mc_per_n=3, rng=0)
    assert est.mc_error == 0.0
    assert est.value + est.tail_bound == pytest.approx(1.0, abs=1e-12)
    assert est.bracket[0] <= 1.0 <= est.bracket[1]


def test_hard_core_partition_function():
    lam = 2.0
    spec = GibbsSpec.build(ManyBody(2.0, ((2, math.inf),)), lam, W, exact_boundary=True)
    est = partition_function(spec, n_max=6, mc_per_n=20, rng=1, tail_tol=None)
    assert est.value == pytest.approx(math.exp(-lam) * (1 + lam), rel=1e-12)


def test_hard_core_mean_count():
    lam = 2.0
    spec = GibbsSpec.build(ManyBody(2.0, ((2, math.inf),)), lam, W, exact_boundary=True)
    est = gibbs_expectation(spec, len, n_max=6, mc_per_n=20, rng=2, tail_tol=None)
    assert est.value == pytest.approx(lam / (1 + lam), rel=1e-12)


def test_constant_expectation_is_one():
    spec = GibbsSpec.build(PolyEdge(0, 1, 2), 1.0, W, exact_boundary=True)
    ests = gibbs_expectation(spec, [lambda p: 1.0, len], n_max=6, mc_per_n=50, rng=3)
    assert ests[0].value == pytest.approx(1.0, rel=1e-12)
    assert ests[0].mc_error == pytest.approx(0.0, abs=1e-12)
    assert 0 < ests[1].value < 6


def test_density_oracle_integrates_to_one():
    a, _ = integrate.quad(square_distance_density, 0, 1)
    b, _ = integrate.quad(square_distance_density, 1, math.sqrt(2))
    assert a + b == pytest.approx(1.0, rel=1e-10)


def test_two_point_term_matches_quadrature():
    lam = 1.5
    spec = GibbsSpec.build(PolyEdge(0, 1, 2), lam, W, exact_boundary=True)
    est = partition_function(spec, n_max=2, mc_per_n=4000, rng=4, tail_tol=None)
    g = lambda d: square_distance_density(d) * math.exp(-d * d)
    m = integrate.quad(g, 0, 1)[0] + integrate.quad(g, 1, math.sqrt(2))[0]
    want = math.exp(-lam) * lam * lam / 2 * m
    assert abs(est.terms[2] - want) <= 4 * est.term_errors[2]
    assert est.terms[1] == pytest.approx(math.exp(-lam) * lam, rel=1e-12)


def test_log_tail_bound_matches_direct_sum():
    lam, n_max, c, nb = 1.3, 7, 0.4, 5
    direct = sum(stats.poisson.pmf(n, lam) * math.exp(c * (n + nb)) for n in range(n_max + 1, 200))
    assert math.exp(log_tail_bound(lam, n_max, c, nb)) == pytest.approx(direct, rel=1e-9)
    assert log_tail_bound(lam, n_max, None, 0) == math.inf


def test_poisson_allocation():
    alloc = poisson_allocation(2.0, 8, 1000)
    assert alloc[0] == 1 and len(alloc) == 9
    assert min(alloc[1:]) >= 1
    assert alloc[2] >= alloc[6]


def test_volume_cap_and_tail():
    spec = GibbsSpec.build(Zero(), 1.0, Window.square(2.0), exact_boundary=True)
    with pytest.raises(TailNotConverged):
        partition_function(spec, n_max=4, mc_per_n=2, volume_cap=1.0)
    with pytest.raises(TailNotConverged):
        partition_function(spec, n_max=2, mc_per_n=2, tail_tol=1e-9)


def test_bump_functions_bounded():
    F = bump_functions(W, 20, 0)
    assert F(np.zeros((0, 2))).shape == (20,)
    v = F(np.random.default_rng(1).random((30, 2)))
    assert np.all((0 <= v) & (v < 1))


def test_consistency_small():
    spec = GibbsSpec.build(Zero(), 1.0, W, exact_boundary=True)
    inner = Window.box([0.25, 0.25], [0.75, 0.75])
    res = consistency_check(spec, inner, bump_functions(W, 5, 1), n_max=6, mc=300, rng=5,
                            inner_mc=24)
    assert res.holds
    assert res.deviation <= res.budget


def test_consistency_rejects_outside_window():
    spec = GibbsSpec.build(Zero(), 1.0, W, exact_boundary=True)
    with pytest.raises(ValueError):
        consistency_check(spec, Window.box([0.5, 0.5], [1.5, 1.5]), [len], n_max=2, mc=10)


def test_entropy_diagnostic_small():
    a = 0.6
    lat = LatticeSpec.triangular(a)
    d = entropy_diagnostic(None, PolyEdge(0, 0.5, 2), 3.0, lat, SingletonBall(RHO0_2D * a), 1,
                           mc_per_n=30, rng=6)
    assert math.isfinite(d.lhs) and math.isfinite(d.rhs)
    assert d.rhs_finite >= d.rhs
    assert d.report()["cells"] == 9
