import os
import subprocess
import sys

import numpy as np
import pytest

from hypergibbs import _pykernels

ck = pytest.importorskip("hypergibbs._ckernels")


def canon(tris):
    return sorted(tuple(sorted(t)) for t in np.asarray(tris).tolist())


def test_predicates_agree():
    rng = np.random.default_rng(0)
    for _ in range(500):
        p = rng.random(8)
        assert np.sign(ck.orient2d(*p[:6])) == np.sign(_pykernels.orient2d(*p[:6]))
        assert np.sign(ck.incircle(*p)) == np.sign(_pykernels.incircle(*p))


def test_predicates_exact_on_near_degenerate():
    # collinear up to one ulp: the sign must be exact, not rounded
    for impl in (ck, _pykernels):
        assert impl.orient2d(0.5, 0.5, 12.0, 12.0, 24.0, 24.0) == 0
        assert impl.orient2d(0.5, 0.5, 12.0, 12.0, 24.0, np.nextafter(24.0, 25.0)) > 0
        assert impl.incircle(0, 0, 1, 0, 1, 1, 0, 1) == 0


def test_triangulations_agree():
    rng = np.random.default_rng(1)
    for n in (3, 10, 100):
        pts = rng.random((n, 2))
        a = ck.triangulate(pts, True)
        b = _pykernels.triangulate(pts, True)
        assert canon(a[0]) == canon(b[0])
        assert a[2] == b[2]


def test_tables_agree():
    pts = np.random.default_rng(2).random((60, 2))
    tris, nbrs, _ = ck.triangulate(pts, True)
    a = ck.tess_tables(pts, tris, nbrs)
    b = _pykernels.tess_tables(pts, tris, nbrs)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


def test_degenerate_flag_agrees():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 3.0]], dtype=float)
    assert ck.triangulate(pts, True)[2] and _pykernels.triangulate(pts, True)[2]


def test_pure_backend_selected_by_environment():
    env = dict(os.environ, HYPERGIBBS_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import hypergibbs.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == _pykernels.BACKEND
