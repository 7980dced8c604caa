"""Backend selection for the geometry kernels.

The compiled extension is used when it imports; setting
``HYPERGIBBS_PURE=1`` forces the pure-Python reference kernels.
"""
import os

from . import _pykernels

if os.environ.get("HYPERGIBBS_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
orient2d = _impl.orient2d
incircle = _impl.incircle
triangulate = _impl.triangulate
clip_cell = _impl.clip_cell
tess_tables = _impl.tess_tables
DelaunayBase = _impl.DelaunayBase
scan_table = _impl.scan_table
del2_horizons = _impl.del2_horizons

__all__ = ["BACKEND", "orient2d", "incircle", "triangulate", "clip_cell", "tess_tables", "DelaunayBase",
           "scan_table", "del2_horizons"]
