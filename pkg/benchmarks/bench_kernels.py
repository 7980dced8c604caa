"""Compare the compiled and pure-Python geometry kernels.

Run from the repository root after building the extension:

    python3 benchmarks/bench_kernels.py [--quick]

Each kernel is timed on identical inputs with both backends, then a short
sampler run is timed end to end in a subprocess per backend (the backend
is fixed at import time).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hypergibbs import _pykernels

try:
    from hypergibbs import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time, numpy as np
from hypergibbs import kernels
from hypergibbs.energy import GibbsSpec
from hypergibbs.geometry import LatticeSpec, SingletonBall, fill_outside
from hypergibbs.potential import PolyEdge
from hypergibbs.sampler import SamplerConfig, run
lat = LatticeSpec.triangular(0.25)
box = lat.box(2)
_, out = fill_outside(lat, SingletonBall(0.03), box, 3.0, np.random.default_rng(0))
spec = GibbsSpec.build(PolyEdge(0.1, 1.0, 2.0), 30.0, box, out)
t = time.perf_counter()
run(spec, SamplerConfig(steps={steps}, seed=1), keep_samples=False)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(rng, quick):
    sizes = (50, 500) if quick else (50, 500, 5000)
    for n in sizes:
        pts = rng.random((n, 2))
        tris, nbrs, _ = _pykernels.triangulate(pts, True)
        order = np.argsort(((pts - pts[0]) ** 2).sum(axis=1), kind="stable")
        box = (-10.0, -10.0, 11.0, 11.0)
        yield f"triangulate n={n}", lambda k, p=pts: k.triangulate(p, True)
        yield f"tess_tables n={n}", lambda k, p=pts, t=tris, b=nbrs: k.tess_tables(p, t, b)
        yield f"clip_cell n={n}", lambda k, p=pts, o=order, b=box: k.clip_cell(p, 0, o, b)
    base_pts = rng.random((400, 2)) * 4 - 2
    extra = rng.random((12, 2)) * 0.5
    yield "DelaunayBase 400+12", lambda k: k.DelaunayBase(base_pts, 32).with_points(extra, True)
    q = rng.random((2000, 8)).tolist()
    yield "orient2d x2000", lambda k: [k.orient2d(*r[:6]) for r in q]
    yield "incircle x2000", lambda k: [k.incircle(*r) for r in q]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller inputs and fewer repeats")
    args = ap.parse_args()
    if _ckernels is None:
        sys.exit("compiled kernels not built: python3 setup.py build_ext --inplace")
    repeat = 3 if args.quick else 5
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'cython [s]':>12}{'python [s]':>12}{'speed-up':>10}")
    for name, fn in cases(rng, args.quick):
        tc = best(lambda: fn(_ckernels), repeat)
        tp = best(lambda: fn(_pykernels), repeat if tc > 0.01 else 1)
        print(f"{name:<24}{tc:>12.5f}{tp:>12.5f}{tp / tc:>10.1f}")

    steps = 500 if args.quick else 3000
    times = {}
    for pure in ("0", "1"):
        env = dict(os.environ, HYPERGIBBS_PURE=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(steps=steps)], env=env,
                             capture_output=True, text=True, check=True)
        backend, t = out.stdout.split()
        times[backend] = float(t)
    c, p = times.get("cython"), times.get("python")
    print(f"\nsampler, {steps} steps, PolyEdge on a lattice boundary")
    for k, v in times.items():
        print(f"  {k:<8}{v:8.2f} s")
    if c and p:
        print(f"  speed-up {p / c:.1f}x")


if __name__ == "__main__":
    main()
