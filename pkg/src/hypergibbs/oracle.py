"""Series and Monte Carlo oracles for Gibbs distributions on small windows.

Integrals over the Poisson process are split by the number of points:
``Z = sum_n p_n E[exp(-H(U_n))]`` where ``p_n`` is the Poisson(z|window|)
probability of ``n`` points and ``U_n`` is ``n`` independent uniform points.
Each stratum is a plain Monte Carlo average, and the truncated tail is bounded
with the stability constant. All results carry standard errors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc

from .energy import GibbsSpec, energy
from .errors import TailNotConverged
from .geometry import Configuration, Window

TAIL_TOL = 1e-3
# windows larger than this are refused by default (the series would not converge)
VOLUME_CAP = 16.0


def log_poisson(lam: float, n: int) -> float:
    if lam == 0:
        return 0.0 if n == 0 else -math.inf
    return -lam + n * math.log(lam) - math.lgamma(n + 1)


def log_tail_bound(lam: float, n_max: int, c_S, n_boundary: int) -> float:
    """Log of ``sum_{n > n_max} p_n exp(c_S (n + n_boundary))``."""
    if c_S is None:
        return math.inf
    x = lam * math.exp(c_S)
    p = float(gammainc(n_max + 1, x))
    if p <= 0.0:
        return -math.inf
    return -lam + c_S * n_boundary + x + math.log(p)


def poisson_allocation(lam: float, n_max: int, total: int, minimum: int = 1) -> list:
    """Samples per stratum ``n = 0..n_max``, proportional to the Poisson weights.

    Stratum 0 has no randomness and gets one sample.
    """
    w = np.array([math.exp(log_poisson(lam, n)) for n in range(1, n_max + 1)])
    if w.sum() == 0:
        return [1] + [minimum] * n_max
    share = np.maximum(minimum, np.floor(total * w / w.sum())).astype(int)
    return [1] + share.tolist()


def _allocation(mc_per_n, n_max: int) -> list:
    if np.isscalar(mc_per_n):
        return [1] + [int(mc_per_n)] * n_max
    alloc = [int(m) for m in mc_per_n]
    if len(alloc) != n_max + 1:
        raise ValueError("need one sample count per n = 0..n_max")
    if min(alloc[1:], default=1) < 1:
        raise ValueError("every stratum needs at least one sample")
    return alloc


@dataclass
class SeriesEstimate:
    """Truncated series estimate with Monte Carlo and truncation error."""

    value: float
    truncation_n: int
    mc_error: float
    tail_bound: float
    terms: tuple = ()
    term_errors: tuple = ()
    log_value: float = math.nan
    samples: tuple = ()

    @property
    def bracket(self) -> tuple:
        e = self.mc_error + self.tail_bound
        return (self.value - e, self.value + e)

    @property
    def error(self) -> float:
        return self.mc_error + self.tail_bound

    def report(self) -> dict:
        return {"value": self.value, "log_value": self.log_value,
                "truncation_n": self.truncation_n, "mc_error": self.mc_error,
                "tail_bound": self.tail_bound, "bracket": list(self.bracket),
                "terms": [{"n": n, "value": v, "se": e, "samples": m}
                          for n, (v, e, m) in enumerate(zip(self.terms, self.term_errors,
                                                            self.samples))]}

    def write_report(self, path):
        with open(path, "w") as fh:
            json.dump(self.report(), fh, indent=2)


@dataclass
class _Strata:
    """Sampled interiors per stratum with their energies."""

    lam: float
    log_p: np.ndarray
    energies: list
    configs: list
    n_boundary: int
    c_S: float | None

    @property
    def n_max(self) -> int:
        return len(self.energies) - 1

    def weights(self):
        """Weights ``exp(-H - shift)`` per stratum and the shift."""
        finite = [-h[np.isfinite(h)] for h in self.energies]
        top = max((f.max() for f in finite if len(f)), default=0.0)
        with np.errstate(over="ignore"):
            return [np.exp(-h - top) for h in self.energies], float(top)


def _sample(spec: GibbsSpec, n_max: int, alloc: list, rng, keep: bool) -> _Strata:
    lam = spec.z * spec.volume
    energies, configs = [], []
    d = spec.window.d
    for n in range(n_max + 1):
        m = alloc[n]
        h = np.empty(m)
        cs = []
        for i in range(m):
            zeta = spec.window.sample(rng, n) if n else np.zeros((0, d))
            h[i] = energy(spec, zeta)
            if keep:
                cs.append(zeta)
        energies.append(h)
        configs.append(cs)
    log_p = np.array([log_poisson(lam, n) for n in range(n_max + 1)])
    return _Strata(lam, log_p, energies, configs, len(spec.boundary_points), spec.c_S)


def _series(strata: _Strata, tail_tol) -> SeriesEstimate:
    w, top = strata.weights()
    p = np.exp(strata.log_p)
    terms, errs = [], []
    for n, wn in enumerate(w):
        m = len(wn)
        t = float(p[n] * wn.mean())
        if n == 0 and np.ptp(wn) == 0:
            e = 0.0
        elif m > 1:
            e = float(p[n] * wn.std(ddof=1)) / math.sqrt(m)
        else:
            e = t
        terms.append(t)
        errs.append(e)
    scaled = math.fsum(terms)
    log_tail = log_tail_bound(strata.lam, strata.n_max, strata.c_S, strata.n_boundary)
    log_value = math.log(scaled) + top if scaled > 0 else -math.inf
    scale = math.exp(top) if top < 700 else math.inf
    tail = math.exp(log_tail) if log_tail < 700 else math.inf
    est = SeriesEstimate(scaled * scale, strata.n_max,
                         math.sqrt(math.fsum(e * e for e in errs)) * scale, tail,
                         tuple(t * scale for t in terms), tuple(e * scale for e in errs),
                         log_value, tuple(len(x) for x in w))
    if tail_tol is not None:
        rel = math.exp(log_tail - log_value) if log_value > -math.inf else math.inf
        if not rel <= tail_tol:
            raise TailNotConverged(
                f"tail bound {tail:.3g} exceeds {tail_tol} x Z at n_max={strata.n_max}")
    return est


def _check_volume(spec: GibbsSpec, volume_cap):
    if volume_cap is not None and spec.volume > volume_cap:
        raise TailNotConverged(f"window volume {spec.volume} exceeds the cap {volume_cap}")


def partition_function(spec: GibbsSpec, n_max: int = 8, mc_per_n=2000, rng=None,
                       tail_tol: float | None = TAIL_TOL,
                       volume_cap: float | None = VOLUME_CAP) -> SeriesEstimate:
    """``Z_{Lambda, omega}`` by the truncated stratified series."""
    rng = np.random.default_rng(rng)
    _check_volume(spec, volume_cap)
    strata = _sample(spec, n_max, _allocation(mc_per_n, n_max), rng, False)
    return _series(strata, tail_tol)


def _ratio(strata: _Strata, fvals: list, tail_tol, f_bound=None):
    """Estimates ``E[f_j]`` for the columns of ``fvals`` (one array per stratum)."""
    z = _series(strata, tail_tol)
    w, _ = strata.weights()
    p = np.exp(strata.log_p)
    k = fvals[0].shape[1]
    num = np.zeros(k)
    den = 0.0
    for n, wn in enumerate(w):
        num += p[n] * (wn[:, None] * fvals[n]).mean(axis=0)
        den += p[n] * wn.mean()
    R = num / den
    var = np.zeros(k)
    for n, wn in enumerate(w):
        m = len(wn)
        if m < 2:
            continue
        resid = wn[:, None] * (fvals[n] - R)
        var += p[n] ** 2 * resid.var(axis=0, ddof=1) / m
    se = np.sqrt(var) / den
    if f_bound is None:
        f_bound = max(float(np.abs(f).max()) if f.size else 0.0 for f in fvals)
    rel_tail = z.tail_bound / z.value if z.value > 0 else math.inf
    tail = (f_bound + np.abs(R)) * rel_tail
    return R, se, tail, z


def _columns(f, configs) -> list:
    fs = f if isinstance(f, (list, tuple)) else [f]
    out = []
    for cs in configs:
        out.append(np.array([[float(g(c)) for g in fs] for c in cs]).reshape(len(cs), len(fs)))
    return out


def gibbs_expectation(spec: GibbsSpec, f, n_max: int = 8, mc_per_n=2000, rng=None,
                      tail_tol: float | None = TAIL_TOL, f_bound: float | None = None,
                      volume_cap: float | None = VOLUME_CAP):
    """``E[f(zeta)]`` under the Gibbs distribution, ``f`` a function of the interior points.

    ``f`` may be a list of functions evaluated on the same samples, in which
    case a list of estimates is returned.
    """
    rng = np.random.default_rng(rng)
    _check_volume(spec, volume_cap)
    strata = _sample(spec, n_max, _allocation(mc_per_n, n_max), rng, True)
    R, se, tail, z = _ratio(strata, _columns(f, strata.configs), tail_tol, f_bound)
    out = [SeriesEstimate(float(R[j]), n_max, float(se[j]), float(tail[j]), log_value=math.nan,
                          samples=z.samples) for j in range(len(R))]
    return out if isinstance(f, (list, tuple)) else out[0]


# ---------------------------------------------------------------- consistency


@dataclass
class ConsistencyResult:
    """Both sides of ``E_outer[f] = E_outer[E_inner[f]]`` per test function."""

    deviation: float
    budget: float
    lhs: np.ndarray
    rhs: np.ndarray
    se: np.ndarray
    tail: np.ndarray
    lhs_se: np.ndarray = field(default=None)
    rhs_se: np.ndarray = field(default=None)

    @property
    def holds(self) -> bool:
        return bool(np.all(np.abs(self.lhs - self.rhs) <= 3 * self.se + self.tail))

    def report(self) -> dict:
        return {"deviation": self.deviation, "budget": self.budget, "holds": self.holds,
                "functions": [{"lhs": float(a), "rhs": float(b), "se": float(s), "tail": float(t)}
                              for a, b, s, t in zip(self.lhs, self.rhs, self.se, self.tail)]}


def inner_spec(outer: GibbsSpec, inner_window: Window, zeta) -> GibbsSpec:
    """Spec on ``inner_window`` with the outer boundary plus the outer points outside it."""
    zeta = np.asarray(zeta, dtype=np.float64).reshape(-1, outer.window.d)
    xi = zeta[~inner_window.contains(zeta)]
    bnd = np.vstack([outer.boundary.points, xi])
    return GibbsSpec.build(outer.potential, outer.z, inner_window,
                           Configuration(bnd, d=outer.window.d),
                           exact_boundary=outer.exact_boundary, c_S=outer.c_S,
                           neg_cap=outer.neg_cap)


def bump_functions(window: Window, count: int = 20, rng=None):
    """Vector of ``count`` bounded smooth statistics ``tanh(sum_x exp(-|x-c|^2 / 2w^2))``.

    Centres are uniform in the middle of ``window`` and widths between
    0.1 and 0.4 of its diameter.
    """
    rng = np.random.default_rng(rng)
    u = rng.uniform(0.2, 0.8, (count, window.d))
    centres = window.origin + u @ window.vectors
    widths = rng.uniform(0.1, 0.4, count) * window.diameter / math.sqrt(window.d)

    def F(points):
        p = np.asarray(points, dtype=np.float64).reshape(-1, window.d)
        if len(p) == 0:
            return np.zeros(count)
        d2 = ((p[:, None, :] - centres[None]) ** 2).sum(-1)
        return np.tanh(np.exp(-d2 / (2 * widths * widths)).sum(0))

    return F


def consistency_check(spec_outer: GibbsSpec, inner_window: Window, test_functions: list,
                      n_max: int = 8, mc=2000, rng=None, inner_mc=96,
                      tail_tol: float | None = TAIL_TOL,
                      volume_cap: float | None = VOLUME_CAP) -> ConsistencyResult:
    """Compare ``E_outer[f]`` with ``E_outer[E_inner[f]]`` for each test function.

    Each ``f`` takes the outer interior points; ``test_functions`` may also
    be one callable returning the vector of values. Both sides are averaged over
    the same outer samples, and the inner expectation for every outer sample
    comes from its own series run, so the standard error is that of the
    paired difference. ``mc`` and ``inner_mc`` are either totals (split by
    the Poisson weights) or explicit per-stratum counts.
    """
    rng = np.random.default_rng(rng)
    _check_volume(spec_outer, volume_cap)
    w = spec_outer.window
    if not (w.contains(inner_window.vertices()).all()):
        raise ValueError("inner window must lie in the outer window")
    F = _vectorise(test_functions)
    lam = spec_outer.z * spec_outer.volume
    alloc = poisson_allocation(lam, n_max, mc) if np.isscalar(mc) else _allocation(mc, n_max)
    # the empty outer stratum is replicated so that its inner noise averages out
    alloc[0] = max(alloc[0], alloc[1] // 8 if n_max else 1)
    lam_in = spec_outer.z * inner_window.volume
    ialloc = (poisson_allocation(lam_in, n_max, inner_mc) if np.isscalar(inner_mc)
              else _allocation(inner_mc, n_max))
    strata = _sample(spec_outer, n_max, alloc, rng, True)
    lhs_vals, rhs_vals = [], []
    empty_inner = None
    for n, cs in enumerate(strata.configs):
        fl = [None] * len(cs)
        fr = [None] * len(cs)
        for i, zeta in enumerate(cs):
            fl[i] = F(zeta)
            keep = zeta[~inner_window.contains(zeta)] if len(zeta) else zeta
            if len(keep) == 0 and empty_inner is None:
                empty_inner = inner_spec(spec_outer, inner_window, keep)
            sub = empty_inner if len(keep) == 0 else inner_spec(spec_outer, inner_window, keep)
            fr[i] = _inner_expectation(sub, keep, F, n_max, ialloc, rng)
        lhs_vals.append(np.array(fl, dtype=float).reshape(len(cs), -1))
        rhs_vals.append(np.array(fr, dtype=float).reshape(len(cs), -1))
    diff = [a - b for a, b in zip(lhs_vals, rhs_vals)]
    D, se, tail, _ = _ratio(strata, diff, tail_tol, f_bound=2 * _bound(lhs_vals))
    L, lse, _, _ = _ratio(strata, lhs_vals, tail_tol)
    Rr, rse, _, _ = _ratio(strata, rhs_vals, tail_tol)
    dev = float(np.abs(D).max()) if len(D) else 0.0
    budget = float((3 * se + tail).max()) if len(D) else 0.0
    return ConsistencyResult(dev, budget, L, Rr, se, tail, lse, rse)


def _bound(vals) -> float:
    return max(float(np.abs(v).max()) if v.size else 0.0 for v in vals)


def _vectorise(test_functions):
    """One callable returning the vector of all test-function values."""
    if callable(test_functions):
        return lambda p: np.atleast_1d(np.asarray(test_functions(p), dtype=float))
    fs = list(test_functions)
    return lambda p: np.array([g(p) for g in fs], dtype=float)


def _inner_expectation(spec: GibbsSpec, xi, F, n_max, alloc, rng) -> np.ndarray:
    strata = _sample(spec, n_max, alloc, rng, True)
    cols = [np.array([F(np.vstack([c, xi]) if len(xi) else c) for c in cs], dtype=float)
            .reshape(len(cs), -1) for cs in strata.configs]
    R, _, _, _ = _ratio(strata, cols, None)
    return R


# ---------------------------------------------------------------- entropy


@dataclass
class EntropyDiagnostic:
    """Finite-box relative entropy estimate against the template bound."""

    lhs: float
    lhs_se: float
    rhs: float
    rhs_finite: float
    log_Z: float
    mean_energy: float
    intensity: float
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs_finite + 3 * self.lhs_se

    def report(self) -> dict:
        return {"lhs": self.lhs, "lhs_se": self.lhs_se, "rhs": self.rhs,
                "rhs_finite": self.rhs_finite, "log_Z": self.log_Z,
                "mean_energy": self.mean_energy, "intensity": self.intensity,
                "holds": self.holds, **self.details}


def entropy_diagnostic(structure, potential, z: float, lattice, template, n: int,
                       chain_samples: int | None = None, n_max: int | None = None,
                       mc_per_n=400, rng=None,
                       tail_tol: float | None = TAIL_TOL) -> EntropyDiagnostic:
    """Relative entropy per volume of the Gibbs distribution in the lattice box of scale ``n``.

    The box carries the canonical pseudo-periodic boundary condition. ``lhs``
    is ``(-<H> - ln Z)/v_n - c_S <N>/v_n``; ``<H>`` and ``<N>`` come from a
    sampler run with ``chain_samples`` retained states, or from the series
    when ``chain_samples`` is None. ``rhs`` is the per-cell template bound
    ``(c_Gamma - ln Pi_C(Gamma))/|C|`` and ``rhs_finite`` adds the boundary
    corrections that vanish as ``n`` grows.
    """
    from .conditions import c_gamma, gamma_weight
    from .geometry import fill_outside

    rng = np.random.default_rng(rng)
    if structure is not None and structure not in potential.structures:
        raise ValueError("structure does not match the potential")
    box = lattice.box(n)
    extent = 6.0 * lattice.outer_diameter * (n + 2)
    _, outside = fill_outside(lattice, template, box, extent)
    spec = GibbsSpec.build(potential, z, box, outside, lattice=lattice)
    c_S = spec.c_S if spec.c_S is not None else math.inf
    lam = z * spec.volume
    if n_max is None:
        n_max = max(8, int(math.ceil(lam + 8 * math.sqrt(lam) + 8)))
    alloc = _allocation(mc_per_n, n_max)
    strata = _sample(spec, n_max, alloc, rng, True)
    zest = _series(strata, tail_tol)
    counts = [np.array([[len(c)] for c in cs], dtype=float).reshape(len(cs), 1)
              for cs in strata.configs]
    energies = [h.reshape(-1, 1) for h in strata.energies]
    if chain_samples is None:
        (meanH,), (seH,), _, _ = _ratio(strata, energies, None)
        (meanN,), (seN,), _, _ = _ratio(strata, counts, None)
        source = "series"
    else:
        from .sampler import SamplerConfig, run

        steps = max(1, chain_samples) * 20
        cfg = SamplerConfig(steps=steps, burn_in=steps // 10, thin=20,
                            seed=int(rng.integers(2**63)))
        res = run(spec, cfg, lattice=lattice, template=template, collectors={"N": len})
        H = np.asarray(res.energies)
        N = np.asarray(res.collected["N"], dtype=float)
        meanH, seH = float(H.mean()), _batch_se(H)
        meanN, seN = float(N.mean()), _batch_se(N)
        source = "chain"
    v = spec.volume
    cells = (2 * n + 1) ** lattice.d
    lhs = (-meanH - zest.log_value) / v - c_S * meanN / v
    log_z_se = zest.mc_error / zest.value if zest.value > 0 else math.inf
    lhs_se = math.sqrt(seH ** 2 + log_z_se ** 2 + (c_S * seN) ** 2) / v
    pw = gamma_weight(z, lattice, template, rng=rng)
    log_pi = math.log(pw["value"]) if pw["value"] > 0 else -math.inf
    cg = c_gamma(potential.structures[0], potential, lattice, template, sign="signed")
    cgp = c_gamma(potential.structures[0], potential, lattice, template, sign="plus")
    C = lattice.cell_volume
    rhs = (cg - log_pi) / C
    # cell layers within the certified radius of the box
    layers = int(math.ceil(spec.r / lattice.inner_diameter)) if math.isfinite(spec.r) else n + 1
    ring = (2 * (n + layers) + 1) ** lattice.d - cells
    nb = len(spec.boundary_points)
    rhs_finite = rhs + (c_S * nb + max(cgp, 0.0) * ring) / v
    details = {"source": source, "n_max": n_max, "cells": cells, "boundary_points": nb,
               "c_gamma": cg, "c_gamma_plus": cgp, "log_pi_gamma": log_pi,
               "ring_cells": ring, "Z_mc_error": zest.mc_error, "Z_tail": zest.tail_bound}
    return EntropyDiagnostic(lhs, lhs_se, rhs, rhs_finite, zest.log_value, meanH, meanN / v,
                             details)


def _batch_se(x: np.ndarray, batches: int = 20) -> float:
    x = np.asarray(x, dtype=float)
    if len(x) < 2 * batches:
        return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return float(means.std(ddof=1) / math.sqrt(batches))
