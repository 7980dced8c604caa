import math

import numpy as np
import pytest
from scipy import stats

from hypergibbs.energy import GibbsSpec, energy
from hypergibbs.errors import NoFeasibleStart
from hypergibbs.geometry import (ClusterTemplate, LatticeSpec, SingletonBall, Window, fill_outside,
                                 read_points)
from hypergibbs.potential import ForcedClustering, LongEdgeExclusion, ManyBody, PolyEdge, Zero
from hypergibbs.sampler import (SamplerConfig, acceptance_probability, detailed_balance_residuals,
                                init_feasible, run, step, total_variation)

W = Window.square(1.0)


def boxed(pot, lat, t, n=2, z=1.0, seed=0):
    box = lat.box(n)
    _, out = fill_outside(lat, t, box, 3.0, np.random.default_rng(seed))
    return GibbsSpec.build(pot, z, box, out)


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(p_birth=0.5, p_death=0.5, p_translate=0.5)
    with pytest.raises(ValueError):
        SamplerConfig(p_birth=0.0, p_death=0.7, p_translate=0.3)
    with pytest.raises(ValueError):
        SamplerConfig(thin=0)
    with pytest.raises(ValueError):
        SamplerConfig(sigma=-1.0)


def test_empty_start_for_nonnegative_potential():
    spec = GibbsSpec.build(PolyEdge(0, 1, 2), 1.0, W, exact_boundary=True)
    s = init_feasible(spec)
    assert s.n == 0 and s.cached_energy == 0.0


def test_template_start_for_long_edge():
    lat = LatticeSpec.triangular(0.25)
    t = SingletonBall(0.02)
    spec = boxed(LongEdgeExclusion(0.1, 0.3, 0.4), lat, t)
    s = init_feasible(spec, lat, t, 0)
    assert s.n == 25 and math.isfinite(s.cached_energy)
    with pytest.raises(NoFeasibleStart):
        init_feasible(spec)


def test_cluster_start():
    lat = LatticeSpec.cubic(1.0)
    t = ClusterTemplate(2, 0.1, 0.3)
    spec = boxed(ForcedClustering(2, 0.5), lat, t, n=1)
    s = init_feasible(spec, lat, t, 0)
    assert s.n == 27 and math.isfinite(s.cached_energy)


def test_acceptance_probability_values():
    spec = GibbsSpec.build(Zero(), 10.0, W, exact_boundary=True)
    cfg = SamplerConfig(p_birth=0.5, p_death=0.5, p_translate=0.0)
    assert acceptance_probability(spec, cfg, 0, "birth", 0.0) == 1.0
    assert acceptance_probability(spec, cfg, 0, "birth", math.inf) == 0.0
    assert acceptance_probability(spec, cfg, 1, "death", 0.0) == pytest.approx(0.1)
    assert acceptance_probability(spec, cfg, 3, "translate", 0.5) == pytest.approx(math.exp(-0.5))
    with pytest.raises(ValueError):
        acceptance_probability(spec, cfg, 0, "swap", 0.0)


def test_poisson_counts_for_zero_potential():
    lam = 3.0
    spec = GibbsSpec.build(Zero(), lam, W, exact_boundary=True)
    res = run(spec, SamplerConfig(steps=60_000, burn_in=1000, thin=5, seed=1), keep_samples=False)
    h = res.histogram()
    p = stats.poisson.pmf(np.arange(len(h)), lam)
    assert total_variation(h, p) <= 0.03


def test_hard_core_counts():
    lam = 2.0
    spec = GibbsSpec.build(ManyBody(2.0, ((2, math.inf),)), lam, W, exact_boundary=True)
    res = run(spec, SamplerConfig(steps=30_000, burn_in=500, thin=3, seed=2), keep_samples=False)
    assert res.counts.max() <= 1
    assert res.histogram()[1] == pytest.approx(lam / (1 + lam), abs=0.03)


def test_support_is_respected():
    lat = LatticeSpec.triangular(0.25)
    t = SingletonBall(0.02)
    spec = boxed(LongEdgeExclusion(0.1, 0.3, 0.4), lat, t, z=30.0)
    res = run(spec, SamplerConfig(steps=3000, thin=30, seed=3, check_every=500), lattice=lat,
              template=t)
    assert res.checks == 6
    assert all(math.isfinite(energy(spec, s)) for s in res.samples)
    assert np.all(np.isfinite(res.trace_energy))


def test_detailed_balance():
    spec = GibbsSpec.build(PolyEdge(0.1, 1, 2), 4.0, W, exact_boundary=True)
    cfg = SamplerConfig()
    rng = np.random.default_rng(4)
    samples = [W.sample(rng, n) for n in range(0, 8)]
    r = detailed_balance_residuals(spec, cfg, samples, 5, pairs=3)
    assert len(r) == 24
    assert np.abs(r).max() < 1e-12


def test_determinism(tmp_path):
    spec = GibbsSpec.build(PolyEdge(0.1, 1, 2), 5.0, W, exact_boundary=True)
    cfg = SamplerConfig(steps=2000, thin=100, seed=7)
    a, b = run(spec, cfg), run(spec, cfg)
    a.write_trace(tmp_path / "a.csv", {"seed": 7})
    b.write_trace(tmp_path / "b.csv", {"seed": 7})
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = run(spec, SamplerConfig(steps=2000, thin=100, seed=8))
    assert not np.array_equal(a.trace_energy, c.trace_energy)


def test_write_samples(tmp_path):
    spec = GibbsSpec.build(PolyEdge(0.1, 1, 2), 5.0, W, exact_boundary=True)
    res = run(spec, SamplerConfig(steps=500, thin=100, seed=9), collectors={"N": len})
    paths = res.write_samples(tmp_path / "s", meta={"seed": 9})
    assert len(paths) == 5 == len(res.collected["N"])
    assert len(read_points(paths[-1])) == res.collected["N"][-1]


def test_step_updates_acceptance_counts():
    spec = GibbsSpec.build(Zero(), 5.0, W, exact_boundary=True)
    cfg = SamplerConfig(seed=0)
    s = init_feasible(spec, rng=0)
    for _ in range(200):
        step(s, spec, cfg)
    assert s.step_count == 200
    assert sum(s.proposed) == 200
    assert abs(s.cached_energy) == 0.0
    assert W.contains(s.points).all()


def test_total_variation_pads():
    assert total_variation([1.0], [0.5, 0.5]) == 0.5
