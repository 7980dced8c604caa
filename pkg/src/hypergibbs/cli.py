"""Command-line front end.

Exit codes: 0 ok, 1 verdict false, 2 configuration error, 3 no feasible
start, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .energy import GibbsSpec
from .errors import (ConfigError, HyperGibbsError, NoFeasibleStart, NotConfined,
                     TailNotConverged, TemplateDoesNotFitCell, UnsupportedDimension,
                     UnsupportedModel)
from .geometry import (ClusterTemplate, LatticeSpec, SingletonBall, Tessellation, Window,
                       fill_outside, parse_points, read_points, voronoi_cell)
from .potential import potential_from_dict

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICS = 0, 1, 2, 3, 4

TOP_KEYS = {"seed", "model", "window", "boundary", "sampler", "oracle", "check"}
MODEL_KEYS = {"structure", "z", "potential"}
WINDOW_KEYS = ({"lo", "hi"}, {"origin", "vectors"})
BOUNDARY_KEYS = {
    "empty": {"kind"},
    "file": {"kind", "path", "exact"},
    "pseudo-periodic": {"kind", "lattice", "a", "template", "randomized", "extent", "exact"},
}
LATTICE_KEYS = {"lattice", "a", "template"}
TEMPLATE_KEYS = {"singleton": {"kind", "b"}, "cluster": {"kind", "k", "b", "delta"}}
SAMPLER_DEFAULTS = {"steps": 10000, "burn_in": 0, "thin": 1, "p_birth": 0.35, "p_death": 0.35,
                    "p_translate": 0.30, "sigma": None, "check_every": 10000}
ORACLE_DEFAULTS = {"n_max": 8, "mc_per_n": 2000, "mc": 2000, "inner_mc": 96, "tail_tol": 1e-3,
                   "volume_cap": 16.0, "inner_lo": None, "inner_hi": None,
                   "test_functions": 20, "entropy_n": 1}


# ---------------------------------------------------------------- configuration


def _fail(msg):
    raise ConfigError(msg)


def _strict(section: str, d, allowed: set):
    if not isinstance(d, dict):
        _fail(f"[{section}] must be a table")
    extra = set(d) - set(allowed)
    if extra:
        _fail(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")


def _floats(x, name, n=None):
    try:
        v = [float(t) for t in x]
    except (TypeError, ValueError):
        _fail(f"{name} must be a list of numbers")
    if n is not None and len(v) != n:
        _fail(f"{name} must have {n} entries")
    return v


def _drop_none(d):
    if isinstance(d, dict):
        return {k: _drop_none(v) for k, v in d.items() if v is not None}
    if isinstance(d, (list, tuple)):
        return [_drop_none(v) for v in d]
    return d


def _template(d):
    _strict("template", d, {"kind", "b", "k", "delta"})
    kind = d.get("kind")
    if kind not in TEMPLATE_KEYS:
        _fail(f"template kind must be one of {sorted(TEMPLATE_KEYS)}")
    _strict("template", d, TEMPLATE_KEYS[kind])
    try:
        if kind == "singleton":
            return {"kind": kind, "b": float(d["b"])}
        return {"kind": kind, "k": int(d["k"]), "b": float(d["b"]), "delta": float(d["delta"])}
    except KeyError as exc:
        _fail(f"template is missing {exc.args[0]!r}")


def _lattice_block(section, d):
    if d.get("lattice") not in ("triangular", "cubic"):
        _fail(f"[{section}] lattice must be 'triangular' or 'cubic'")
    if "a" not in d or "template" not in d:
        _fail(f"[{section}] needs 'a' and 'template'")
    a = float(d["a"])
    if not a > 0:
        _fail(f"[{section}] a must be positive")
    return {"lattice": d["lattice"], "a": a, "template": _template(d["template"])}


@dataclass
class RunConfig:
    """Validated run configuration in canonical form."""

    data: dict
    base: Path

    @classmethod
    def from_dict(cls, raw: dict, base=".") -> "RunConfig":
        raw = copy.deepcopy(raw)
        _strict("top level", raw, TOP_KEYS)
        for key in ("model", "window"):
            if key not in raw:
                _fail(f"missing [{key}]")
        out = {"seed": int(raw.get("seed", 0))}

        m = raw["model"]
        _strict("model", m, MODEL_KEYS)
        if "potential" not in m or "z" not in m:
            _fail("[model] needs 'z' and a [model.potential] table")
        try:
            pot = potential_from_dict(m["potential"])
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, AttributeError) as exc:
            raise ConfigError(f"invalid potential: {exc}") from exc
        tags = [s.tag for s in pot.structures]
        if "structure" in m:
            given = [m["structure"]] if isinstance(m["structure"], str) else list(m["structure"])
            if given != tags:
                _fail(f"structure {given} does not match the potential ({tags})")
        z = float(m["z"])
        if not z > 0:
            _fail("z must be positive")
        out["model"] = {"structure": tags, "z": z, "potential": _drop_none(pot.to_dict())}

        w = raw["window"]
        if not isinstance(w, dict) or set(w) not in WINDOW_KEYS:
            _fail("[window] needs exactly lo/hi or origin/vectors")
        if "lo" in w:
            lo = _floats(w["lo"], "window.lo")
            hi = _floats(w["hi"], "window.hi", len(lo))
            if not all(h > l for l, h in zip(lo, hi)):
                _fail("window.hi must exceed window.lo")
            out["window"] = {"lo": lo, "hi": hi}
        else:
            o = _floats(w["origin"], "window.origin")
            vec = [_floats(v, "window.vectors", len(o)) for v in w["vectors"]]
            out["window"] = {"origin": o, "vectors": vec}

        b = raw.get("boundary", {"kind": "empty"})
        if not isinstance(b, dict) or b.get("kind") not in BOUNDARY_KEYS:
            _fail(f"boundary kind must be one of {sorted(BOUNDARY_KEYS)}")
        kind = b["kind"]
        _strict("boundary", b, BOUNDARY_KEYS[kind])
        if kind == "empty":
            out["boundary"] = {"kind": "empty"}
        elif kind == "file":
            if "path" not in b:
                _fail("file boundary needs 'path'")
            out["boundary"] = {"kind": "file", "path": str(b["path"]),
                               "exact": bool(b.get("exact", False))}
        else:
            blk = _lattice_block("boundary", b)
            ext = b.get("extent")
            out["boundary"] = {"kind": kind, **blk, "randomized": bool(b.get("randomized", False)),
                               "exact": bool(b.get("exact", False))}
            if ext is not None:
                out["boundary"]["extent"] = float(ext)

        s = raw.get("sampler", {})
        _strict("sampler", s, set(SAMPLER_DEFAULTS))
        samp = {k: s.get(k, v) for k, v in SAMPLER_DEFAULTS.items()}
        for k in ("steps", "burn_in", "thin", "check_every"):
            samp[k] = int(samp[k])
        for k in ("p_birth", "p_death", "p_translate"):
            samp[k] = float(samp[k])
        if samp["sigma"] is not None:
            samp["sigma"] = float(samp["sigma"])
        out["sampler"] = _drop_none(samp)

        o = raw.get("oracle", {})
        _strict("oracle", o, set(ORACLE_DEFAULTS))
        orc = {k: o.get(k, v) for k, v in ORACLE_DEFAULTS.items()}
        for k in ("n_max", "mc_per_n", "mc", "inner_mc", "test_functions", "entropy_n"):
            orc[k] = int(orc[k])
        for k in ("tail_tol", "volume_cap"):
            orc[k] = float(orc[k])
        for k in ("inner_lo", "inner_hi"):
            if orc[k] is not None:
                orc[k] = _floats(orc[k], f"oracle.{k}")
        out["oracle"] = _drop_none(orc)

        if "check" in raw:
            c = raw["check"]
            _strict("check", c, LATTICE_KEYS)
            out["check"] = _lattice_block("check", c)
        cfg = cls(out, Path(base))
        cfg.sampler_config()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        try:
            raw = tomllib.loads(p.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"no such config file: {p}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls.from_dict(raw, p.parent)

    def to_toml(self) -> str:
        return tomli_w.dumps(self.data)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_toml().encode()).hexdigest()

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def with_overrides(self, seed=None, steps=None) -> "RunConfig":
        d = copy.deepcopy(self.data)
        if seed is not None:
            d["seed"] = int(seed)
        if steps is not None:
            d["sampler"]["steps"] = int(steps)
        return RunConfig.from_dict(d, self.base)

    # ---- objects

    def potential(self):
        return potential_from_dict(self.data["model"]["potential"])

    def window(self) -> Window:
        w = self.data["window"]
        if "lo" in w:
            return Window.box(w["lo"], w["hi"])
        return Window(w["origin"], w["vectors"])

    def lattice(self, section=None):
        """``(lattice, template)`` from [check] or a pseudo-periodic boundary, else None."""
        blk = self.data.get(section) if section else None
        if blk is None:
            blk = self.data.get("check") or (self.data["boundary"]
                                              if self.data["boundary"]["kind"] == "pseudo-periodic"
                                              else None)
        if blk is None:
            return None, None
        d = self.window().d
        a = blk["a"]
        lat = LatticeSpec.triangular(a) if blk["lattice"] == "triangular" else \
            LatticeSpec.cubic(a, d)
        if lat.d != d:
            _fail("the lattice dimension does not match the window")
        t = blk["template"]
        tem = SingletonBall(t["b"]) if t["kind"] == "singleton" else \
            ClusterTemplate(t["k"], t["b"], t["delta"])
        try:
            tem.check(lat)
        except TemplateDoesNotFitCell as exc:
            raise ConfigError(str(exc)) from exc
        return lat, tem

    def spec(self) -> GibbsSpec:
        pot = self.potential()
        win = self.window()
        b = self.data["boundary"]
        z = self.data["model"]["z"]
        kind = b["kind"]
        if kind == "empty":
            return GibbsSpec.build(pot, z, win, exact_boundary=True)
        if kind == "file":
            path = Path(b["path"])
            path = path if path.is_absolute() else self.base / path
            try:
                pts = read_points(path).points
            except FileNotFoundError as exc:
                raise ConfigError(f"boundary file not found: {path}") from exc
            except ValueError as exc:
                raise ConfigError(f"bad boundary file: {exc}") from exc
            if len(pts) and win.contains(pts).any():
                _fail("boundary points must lie outside the window")
            return GibbsSpec.build(pot, z, win, pts, exact_boundary=b["exact"])
        lat, tem = self.lattice("boundary")
        extent = b.get("extent")
        if extent is None:
            extent = 6.0 * lat.outer_diameter + max(
                (s.r for s in pot.structures if s.kind == "LC"), default=0.0)
        rng = np.random.default_rng([self.seed, 1]) if b["randomized"] else None
        _, outside = fill_outside(lat, tem, win, extent, rng)
        return GibbsSpec.build(pot, z, win, outside, lattice=lat, exact_boundary=b["exact"])

    def sampler_config(self, seed=None):
        from .sampler import SamplerConfig

        s = dict(self.data["sampler"])
        s.setdefault("sigma", None)
        try:
            return SamplerConfig(seed=self.seed if seed is None else seed, **s)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid sampler block: {exc}") from exc


# ---------------------------------------------------------------- helpers


def _header(cfg: RunConfig | None, seed, **extra) -> dict:
    h = {"seed": seed}
    if cfg is not None:
        h["config_sha256"] = cfg.sha256
    h.update(extra)
    return h


def _file_sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n")


def chain_seed(seed: int, chain: int) -> int:
    return int(np.random.SeedSequence([seed, chain]).generate_state(1, np.uint64)[0] >> 1)


def _batch_se(x, batches=20):
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return math.inf
    if len(x) < 2 * batches:
        return float(x.std(ddof=1) / math.sqrt(len(x)))
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return float(means.std(ddof=1) / math.sqrt(batches))


# ---------------------------------------------------------------- commands


def cmd_sample(cfg: RunConfig, out_dir, chains: int = 1) -> int:
    from .sampler import run

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.spec()
    if not spec.ok:
        raise NotConfined("the boundary condition has no confinement certificate")
    lat, tem = cfg.lattice()
    win = spec.window
    wmeta = ({"window_lo": ",".join(repr(float(v)) for v in win.lo),
              "window_hi": ",".join(repr(float(v)) for v in win.hi)} if win.is_box else {})
    report = {"header": _header(cfg, cfg.seed), "chains": [], "files": {}}
    all_n = []
    for c in range(chains):
        cs = chain_seed(cfg.seed, c)
        res = run(spec, cfg.sampler_config(cs), collectors={"N": len}, lattice=lat, template=tem)
        meta = _header(cfg, cfg.seed, chain=c, chain_seed=cs)
        trace = out / f"trace_chain{c}.csv"
        res.write_trace(trace, meta)
        files = res.write_samples(out / f"samples_chain{c}", meta={**meta, **wmeta})
        report["files"][trace.name] = _file_sha(trace)
        for f in files:
            report["files"][f"{f.parent.name}/{f.name}"] = _file_sha(f)
        n = np.asarray(res.collected["N"], dtype=float)
        e = np.asarray(res.energies, dtype=float)
        all_n.append(n)
        report["chains"].append({
            "chain": c, "chain_seed": cs, "retained": len(n),
            "mean_N": float(n.mean()) if len(n) else None, "se_N": _batch_se(n),
            "mean_energy": float(e.mean()) if len(e) else None,
            "acceptance": res.acceptance(), "checks": res.checks,
            "degenerate_rejections": res.state.degenerate})
    n = np.concatenate(all_n) if all_n else np.zeros(0)
    report["mean_N"] = float(n.mean()) if len(n) else None
    report["se_N"] = (math.sqrt(sum(ch["se_N"] ** 2 for ch in report["chains"])) / chains
                      if chains else None)
    report["poisson_mean_N"] = spec.z * spec.volume
    report["config"] = cfg.data
    _write_json(out / "report.json", report)
    return EXIT_OK


def cmd_check(cfg: RunConfig, out=None) -> int:
    from .conditions import check_conditions

    lat, tem = cfg.lattice()
    if lat is None:
        _fail("check needs a lattice: add [check] or a pseudo-periodic boundary")
    rep = check_conditions(None, cfg.potential(), cfg.data["model"]["z"], lat, tem, rng=cfg.seed)
    text = "".join(f"# {k}: {v}\n" for k, v in _header(cfg, cfg.seed).items()) + rep.to_text()
    sys.stdout.write(text)
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return EXIT_OK if rep.verdict else EXIT_VERDICT


def parse_grid(text: str) -> list:
    """``"0,0.5,1"`` or ``"start:stop:num"`` (inclusive linspace)."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def cmd_threshold(model: str, k0s, k1s, alphas, out=None) -> int:
    from .conditions import threshold_grid

    try:
        rows = threshold_grid(model, k0s, k1s, alphas)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    body = "model,k0,k1,alpha,z_min\n" + "".join(
        f"{model},{k0!r},{k1!r},{a!r},{z!r}\n" for k0, k1, a, z in rows)
    text = f"# seed: none\n# sha256: {hashlib.sha256(body.encode()).hexdigest()}\n" + body
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, mode: str, out) -> int:
    from . import oracle

    o = cfg.data["oracle"]
    rng = np.random.default_rng(cfg.seed)
    header = _header(cfg, cfg.seed, mode=mode)
    verdict = True
    if mode == "Z":
        spec = cfg.spec()
        est = oracle.partition_function(spec, o["n_max"], o["mc_per_n"], rng, o["tail_tol"],
                                        o["volume_cap"])
        body = est.report()
    elif mode == "consistency":
        spec = cfg.spec()
        w = spec.window
        if "inner_lo" in o:
            inner = Window.box(o["inner_lo"], o["inner_hi"])
        elif w.is_box:
            mid, half = 0.5 * (w.lo + w.hi), 0.25 * (w.hi - w.lo)
            inner = Window.box(mid - half, mid + half)
        else:
            _fail("consistency mode needs oracle.inner_lo/inner_hi for non-box windows")
        F = oracle.bump_functions(w, o["test_functions"], rng)
        res = oracle.consistency_check(spec, inner, F, o["n_max"], o["mc"], rng, o["inner_mc"],
                                       o["tail_tol"], o["volume_cap"])
        body = res.report()
        verdict = res.holds
    elif mode == "entropy":
        lat, tem = cfg.lattice()
        if lat is None:
            _fail("entropy mode needs a lattice")
        box = lat.box(o["entropy_n"])
        if box.volume > o["volume_cap"]:
            raise TailNotConverged(f"lattice box volume {box.volume:g} exceeds the cap")
        res = oracle.entropy_diagnostic(None, cfg.potential(), cfg.data["model"]["z"], lat, tem,
                                        o["entropy_n"], mc_per_n=max(1, o["mc_per_n"] // 10),
                                        rng=rng, tail_tol=o["tail_tol"])
        body = res.report()
        verdict = res.holds
    else:
        _fail(f"unknown oracle mode {mode!r}")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    _write_json(out, {"header": header, "result": body})
    return EXIT_OK if verdict else EXIT_VERDICT


def _clip_segment(p, q, lo, hi):
    """Liang-Barsky clip of segment ``p q`` to the box, or None."""
    t0, t1 = 0.0, 1.0
    d = q - p
    for k in range(2):
        for num, den in ((p[k] - lo[k], -d[k]), (hi[k] - p[k], d[k])):
            if den == 0:
                if num < 0:
                    return None
                continue
            t = num / den
            if den < 0:
                t0 = max(t0, t)
            else:
                t1 = min(t1, t)
    if t0 > t1:
        return None
    return p + t0 * d, p + t1 * d


def plot_segments(points, lo=None, hi=None):
    """``(delaunay, voronoi)`` segment arrays ``(m, 4)``; Voronoi edges are clipped to the box."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    empty = np.zeros((0, 4))
    if len(pts) < 2:
        return empty, empty
    if lo is None:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.1 * np.maximum(hi - lo, 1.0)
        lo, hi = lo - pad, hi + pad
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    tess = Tessellation(pts, check=False)
    dela = np.hstack([pts[tess.edges[:, 0]], pts[tess.edges[:, 1]]])
    big = 4.0 * (hi - lo) + np.abs(lo) + np.abs(hi)
    box = (*(lo - big), *(hi + big))
    segs = []
    for i in range(len(pts)):
        cell = voronoi_cell(pts, i, box=box)
        v = cell.vertices
        for j, g in enumerate(cell.neighbours.tolist()):
            if g < 0 or g < i:
                continue
            c = _clip_segment(v[j], v[(j + 1) % len(v)], lo, hi)
            if c is not None and np.any(c[0] != c[1]):
                segs.append(np.r_[c[0], c[1]])
    return dela, (np.array(segs) if segs else empty)


def _write_segments(path, segs, meta):
    lines = [f"# {k}: {v}\n" for k, v in meta.items()]
    body = "x0,y0,x1,y1\n" + "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in segs)
    lines.append(f"# sha256: {hashlib.sha256(body.encode()).hexdigest()}\n")
    Path(path).write_text("".join(lines) + body)


def cmd_plotdata(sample_dir, out_dir=None) -> int:
    src = Path(sample_dir)
    files = sorted(src.glob("sample_*.csv")) if src.is_dir() else []
    if not files:
        _fail(f"no sample files in {src}")
    out = Path(out_dir) if out_dir is not None else src
    out.mkdir(parents=True, exist_ok=True)
    for f in files:
        cfgpts, meta = parse_points(f.read_text())
        if cfgpts.points.shape[1] != 2:
            _fail("plot data needs planar samples")
        lo = hi = None
        if "window_lo" in meta:
            lo = [float(v) for v in meta["window_lo"].split(",")]
            hi = [float(v) for v in meta["window_hi"].split(",")]
        dela, vor = plot_segments(cfgpts.points, lo, hi)
        stem = f.stem.replace("sample_", "")
        m = {"seed": meta.get("seed", "none"), "source": f.name,
             "source_sha256": meta.get("sha256", _file_sha(f))}
        _write_segments(out / f"delaunay_{stem}.csv", dela, m)
        _write_segments(out / f"voronoi_{stem}.csv", vor, m)
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypergibbs", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=out_required)
        p.add_argument("--seed", type=int)
        p.add_argument("--steps", type=int)

    p = sub.add_parser("sample", help="run the birth-death-move sampler")
    common(p, True)
    p.add_argument("--chains", type=int, default=1)
    p = sub.add_parser("check", help="check the regularity conditions")
    common(p)
    p = sub.add_parser("threshold", help="tabulate activity thresholds")
    p.add_argument("--model", default="PolyEdge", choices=("PolyEdge", "PolyTriangle"))
    p.add_argument("--k0", default="0")
    p.add_argument("--k1", default="1")
    p.add_argument("--alpha", default="1")
    p.add_argument("--out")
    p = sub.add_parser("oracle", help="series oracle: Z, consistency or entropy")
    common(p, True)
    p.add_argument("--mode", choices=("Z", "consistency", "entropy"), default="Z")
    p = sub.add_parser("plotdata", help="Delaunay and Voronoi segments of sample files")
    p.add_argument("samples")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "threshold":
            return cmd_threshold(args.model, parse_grid(args.k0), parse_grid(args.k1),
                                 parse_grid(args.alpha), args.out)
        if args.command == "plotdata":
            return cmd_plotdata(args.samples, args.out)
        cfg = RunConfig.load(args.config).with_overrides(args.seed, args.steps)
        if args.command == "sample":
            if args.chains < 1:
                _fail("--chains must be positive")
            return cmd_sample(cfg, args.out, args.chains)
        if args.command == "check":
            return cmd_check(cfg, args.out)
        return cmd_oracle(cfg, args.mode, args.out)
    except (ConfigError, UnsupportedModel, UnsupportedDimension, TemplateDoesNotFitCell,
            NotConfined) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoFeasibleStart as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (TailNotConverged, HyperGibbsError, FloatingPointError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
