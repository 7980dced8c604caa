"""Metropolis-Hastings birth, death and translation chain for finite-volume Gibbs distributions.

The chain lives on the finite-energy configurations of the window: any
proposal with infinite energy is rejected, so a chain started from a
feasible state never leaves the support. For non-hereditary models the
support need not be connected under single-point moves; acceptance rates
and energy traces are recorded so this can be monitored.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import GibbsSpec, energy
from .errors import GeneralPositionViolation, NoFeasibleStart
from .geometry import Configuration, pseudo_periodic, write_points

MOVES = ("birth", "death", "translate")
BIRTH, DEATH, TRANSLATE = 0, 1, 2


@dataclass(frozen=True)
class SamplerConfig:
    """Move probabilities, run length and seed.

    ``sigma`` is the translation step (default 0.1 x window diameter);
    ``check_every`` is the period of the full energy recomputation.
    """

    p_birth: float = 0.35
    p_death: float = 0.35
    p_translate: float = 0.30
    steps: int = 10_000
    burn_in: int = 0
    thin: int = 1
    seed: int = 0
    sigma: float | None = None
    check_every: int = 10_000

    def __post_init__(self):
        p = (self.p_birth, self.p_death, self.p_translate)
        if min(p) < 0 or abs(sum(p) - 1.0) > 1e-12:
            raise ValueError("move probabilities must be non-negative and sum to 1")
        if self.p_birth == 0 or self.p_death == 0:
            raise ValueError("birth and death must both be proposed")
        if self.steps < 0 or self.burn_in < 0 or self.thin < 1:
            raise ValueError("need steps >= 0, burn_in >= 0, thin >= 1")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be positive")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("p_birth", "p_death", "p_translate", "steps",
                                            "burn_in", "thin", "seed", "check_every")}
        if self.sigma is not None:
            d["sigma"] = self.sigma
        return d


@dataclass
class ChainState:
    """Current interior, its cached energy and the move tallies."""

    points: np.ndarray
    cached_energy: float
    rng: np.random.Generator
    step_count: int = 0
    proposed: list = field(default_factory=lambda: [0, 0, 0])
    accepted: list = field(default_factory=lambda: [0, 0, 0])
    # proposals rejected because their tessellation was degenerate
    degenerate: int = 0

    @property
    def interior(self) -> Configuration:
        return Configuration(self.points, d=self.points.shape[1])

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state

    @property
    def n(self) -> int:
        return len(self.points)

    def acceptance(self) -> dict:
        return {m: (self.accepted[i] / self.proposed[i] if self.proposed[i] else math.nan)
                for i, m in enumerate(MOVES)}


def init_feasible(spec: GibbsSpec, lattice=None, template=None, rng=None) -> ChainState:
    """Feasible starting state: the canonical template fill of the window, or the empty set.

    Raises NoFeasibleStart when neither has finite energy.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    d = spec.window.d
    candidates = []
    if lattice is not None and template is not None:
        fill = pseudo_periodic(lattice, template, spec.window).points
        candidates.append(np.ascontiguousarray(fill[spec.window.contains(fill)]))
    candidates.append(np.zeros((0, d)))
    for pts in candidates:
        try:
            e = energy(spec, pts, check=True)
        except GeneralPositionViolation:
            continue
        if math.isfinite(e):
            return ChainState(pts, e, rng)
    raise NoFeasibleStart("the template fill and the empty interior both have infinite energy")


def _reflect(y, lo, hi):
    span = hi - lo
    t = np.mod(y - lo, 2.0 * span)
    return lo + np.where(t > span, 2.0 * span - t, t)


class _Kernel:
    """Precomputed constants of one (spec, config) pair."""

    def __init__(self, spec: GibbsSpec, cfg: SamplerConfig):
        w = spec.window
        self.spec = spec
        self.window = w
        self.cum = (cfg.p_birth, cfg.p_birth + cfg.p_death)
        self.lam = spec.z * w.volume
        self.log_bd = math.log(cfg.p_death / cfg.p_birth)
        self.sigma = cfg.sigma if cfg.sigma is not None else 0.1 * w.diameter
        self.lo, self.hi = w.lo, w.hi
        self.box = w.is_box
        self.d = w.d

    def propose(self, state: ChainState):
        """``(move, new points, log proposal ratio)`` or ``(move, None, 0)`` for a null move."""
        rng = state.rng
        u = rng.random()
        pts = state.points
        n = len(pts)
        if u < self.cum[0]:
            x = self.window.sample(rng, 1)
            return BIRTH, np.concatenate([pts, x]), self.log_bd + math.log(self.lam / (n + 1))
        if u < self.cum[1]:
            if n == 0:
                return DEATH, None, 0.0
            i = int(rng.integers(n))
            return DEATH, np.delete(pts, i, axis=0), -self.log_bd + math.log(n / self.lam)
        if n == 0:
            return TRANSLATE, None, 0.0
        i = int(rng.integers(n))
        y = pts[i] + self.sigma * rng.standard_normal(self.d)
        if self.box:
            y = _reflect(y, self.lo, self.hi)
        elif not self.window.contains(y)[0]:
            return TRANSLATE, None, 0.0
        if (pts == y).all(axis=1).any():
            return TRANSLATE, None, 0.0
        new = pts.copy()
        new[i] = y
        return TRANSLATE, new, 0.0


def _advance(kern: _Kernel, state: ChainState):
    """One step in place; returns ``(move, accepted, proposed energy)``."""
    move, new, log_q = kern.propose(state)
    state.step_count += 1
    state.proposed[move] += 1
    if new is None:
        return move, False, math.nan
    try:
        e = energy(kern.spec, new)
    except GeneralPositionViolation:
        # a null set for continuous proposals, reachable from exact lattice states
        state.degenerate += 1
        return move, False, math.nan
    if e == math.inf:
        return move, False, e
    log_a = log_q - (e - state.cached_energy)
    if log_a >= 0 or state.rng.random() < math.exp(log_a):
        state.points = new
        state.cached_energy = e
        state.accepted[move] += 1
        return move, True, e
    return move, False, e


def step(state: ChainState, spec: GibbsSpec, cfg: SamplerConfig) -> ChainState:
    """Advance the chain by one Metropolis-Hastings step (in place)."""
    _advance(_Kernel(spec, cfg), state)
    return state


def acceptance_probability(spec: GibbsSpec, cfg: SamplerConfig, n: int, move: str,
                           delta_h: float) -> float:
    """Acceptance probability of a birth (from ``n`` points) or death (to ``n - 1``)."""
    if delta_h == math.inf:
        return 0.0
    lam = spec.z * spec.volume
    if move == "birth":
        log_q = math.log(cfg.p_death / cfg.p_birth) + math.log(lam / (n + 1))
    elif move == "death":
        log_q = math.log(cfg.p_birth / cfg.p_death) + math.log(n / lam)
    elif move == "translate":
        log_q = 0.0
    else:
        raise ValueError(move)
    return math.exp(min(0.0, log_q - delta_h))


class EnergyCacheMismatch(RuntimeError):
    pass


@dataclass
class RunResult:
    """Trace of every step and the retained states."""

    state: ChainState
    trace_energy: np.ndarray
    trace_n: np.ndarray
    trace_move: np.ndarray
    trace_accepted: np.ndarray
    retained_steps: np.ndarray
    energies: np.ndarray
    counts: np.ndarray
    collected: dict
    samples: list
    checks: int

    def acceptance(self) -> dict:
        return self.state.acceptance()

    def histogram(self, n_max: int | None = None) -> np.ndarray:
        """Empirical distribution of the retained point counts."""
        top = int(self.counts.max()) if len(self.counts) else 0
        n_max = top if n_max is None else max(n_max, top)
        h = np.bincount(self.counts, minlength=n_max + 1).astype(float)
        return h / h.sum() if h.sum() else h

    def write_trace(self, path, meta: dict | None = None):
        """CSV with columns step, energy, n, move, accepted."""
        with open(path, "w", newline="") as fh:
            for k, v in (meta or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "energy", "n", "move", "accepted"])
            for i in range(len(self.trace_energy)):
                w.writerow([i + 1, repr(float(self.trace_energy[i])), int(self.trace_n[i]),
                            MOVES[self.trace_move[i]], int(self.trace_accepted[i])])

    def write_samples(self, directory, stem: str = "sample", meta: dict | None = None) -> list:
        """One point-pattern file per retained sample, named ``<stem>_<index>.csv``."""
        out = []
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for j, (s, pts) in enumerate(zip(self.retained_steps.tolist(), self.samples)):
            p = d / f"{stem}_{j:05d}.csv"
            write_points(p, pts, {**(meta or {}), "step": s})
            out.append(p)
        return out


def run(spec: GibbsSpec, cfg: SamplerConfig, collectors: dict | None = None, lattice=None,
        template=None, state: ChainState | None = None, keep_samples: bool = True) -> RunResult:
    """Run ``cfg.steps`` steps from ``state`` (default: ``init_feasible``).

    States after ``burn_in`` steps are retained every ``thin`` steps;
    ``collectors`` maps names to functions of the interior points evaluated
    on retained states. Every ``check_every`` steps the cached energy is
    compared with a full recomputation.
    """
    if state is None:
        state = init_feasible(spec, lattice, template, np.random.default_rng(cfg.seed))
    kern = _Kernel(spec, cfg)
    collectors = dict(collectors or {})
    T = cfg.steps
    tr_e = np.empty(T)
    tr_n = np.empty(T, dtype=np.int64)
    tr_m = np.empty(T, dtype=np.int8)
    tr_a = np.empty(T, dtype=bool)
    kept_steps, kept_e, kept_n, samples = [], [], [], []
    collected = {k: [] for k in collectors}
    checks = 0
    for t in range(T):
        move, acc, _ = _advance(kern, state)
        tr_e[t] = state.cached_energy
        tr_n[t] = len(state.points)
        tr_m[t] = move
        tr_a[t] = acc
        s = t + 1
        if s % cfg.check_every == 0:
            fresh = energy(spec, state.points)
            if fresh != state.cached_energy:
                raise EnergyCacheMismatch(f"step {s}: cached {state.cached_energy} vs {fresh}")
            checks += 1
        if s > cfg.burn_in and (s - cfg.burn_in) % cfg.thin == 0:
            kept_steps.append(s)
            kept_e.append(state.cached_energy)
            kept_n.append(len(state.points))
            if keep_samples:
                samples.append(state.points)
            for k, f in collectors.items():
                collected[k].append(f(state.points))
    return RunResult(state, tr_e, tr_n, tr_m, tr_a, np.array(kept_steps, dtype=np.int64),
                     np.array(kept_e), np.array(kept_n, dtype=np.int64), collected, samples,
                     checks)


def total_variation(p, q) -> float:
    n = max(len(p), len(q))
    a = np.zeros(n)
    b = np.zeros(n)
    a[:len(p)] = p
    b[:len(q)] = q
    return 0.5 * float(np.abs(a - b).sum())


def detailed_balance_residuals(spec: GibbsSpec, cfg: SamplerConfig, samples: list, rng,
                               pairs: int = 1) -> np.ndarray:
    """Log residuals of ``pi(x) q(x, y) a(x, y) = pi(y) q(y, x) a(y, x)`` for birth/death pairs.

    For each sampled interior a birth point is drawn uniformly; the forward
    birth and the reverse death of the same point are scored. Pairs where
    the birth is forbidden are skipped. Residuals are zero up to rounding
    for a correct acceptance rule.
    """
    rng = np.random.default_rng(rng)
    lam = spec.z * spec.volume
    out = []
    for pts in samples:
        h0 = energy(spec, pts)
        n = len(pts)
        for _ in range(pairs):
            x = spec.window.sample(rng, 1)
            h1 = energy(spec, np.concatenate([pts, x]))
            if not math.isfinite(h1):
                continue
            a_f = acceptance_probability(spec, cfg, n, "birth", h1 - h0)
            a_r = acceptance_probability(spec, cfg, n + 1, "death", h0 - h1)
            # density w.r.t. sum_n (dx / |window|)^n / n!: lam^n e^{-H}
            lp0 = n * math.log(lam) - h0
            lp1 = (n + 1) * math.log(lam) - h1
            fwd = lp0 + math.log(cfg.p_birth) + math.log(a_f)
            rev = lp1 + math.log(cfg.p_death) - math.log(n + 1) + math.log(a_r)
            out.append(fwd - rev)
    return np.array(out)
