"""Nearest-neighbour orders with lexicographic tie-breaking."""
from __future__ import annotations

import numpy as np

from ..errors import TooFewPoints
from .primitives import Configuration, as_points


def knn_table(points, k: int, rows=None, chunk: int = 512, pad: int = 4):
    """k nearest neighbours of each point (or of ``rows``) within ``points``.

    Neighbours are ordered by distance, ties broken by the lexicographic
    order of coordinates, so the result does not depend on input order.
    Returns ``(idx, dist)`` arrays of shape ``(len(rows), k)``.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n < k + 1:
        raise TooFewPoints(f"need at least {k + 1} points, got {n}")
    rows = np.arange(n) if rows is None else np.asarray(rows, dtype=np.int64)
    lex = np.lexsort(pts.T[::-1])
    rank = np.empty(n, dtype=np.int64)
    rank[lex] = np.arange(n)
    idx = np.empty((len(rows), k), dtype=np.int64)
    dist = np.empty((len(rows), k))
    m = k + 1 + pad
    if n > 4 * m:
        # candidates from a tree, re-sorted by the exact key; rows whose
        # k-th distance ties with the last candidate fall back to brute force
        from scipy.spatial import cKDTree

        _, cand = cKDTree(pts).query(pts[rows], k=m)
        d2 = ((pts[cand] - pts[rows][:, None, :]) ** 2).sum(axis=-1)
        order = np.lexsort((rank[cand], d2), axis=-1)
        cand = np.take_along_axis(cand, order, axis=1)
        d2 = np.take_along_axis(d2, order, axis=1)
        idx[:] = cand[:, 1:k + 1]
        dist[:] = np.sqrt(d2[:, 1:k + 1])
        redo = np.flatnonzero(~(d2[:, k] < d2[:, -1] * (1 - 1e-9)))
    else:
        redo = np.arange(len(rows))
    if len(redo):
        sorted_pts = pts[lex]
        for s in range(0, len(redo), chunk):
            sel = redo[s:s + chunk]
            r = rows[sel]
            d2 = ((pts[r][:, None, :] - sorted_pts[None, :, :]) ** 2).sum(axis=-1)
            # the point itself sorts first at distance zero since points are distinct
            order = np.argsort(d2, axis=1, kind="stable")[:, 1:k + 1]
            idx[sel] = lex[order]
            dist[sel] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return idx, dist


def knn_order(config, x, k: int) -> list:
    """The k nearest neighbours of ``x`` in ``config``, nearest first."""
    if not isinstance(config, Configuration):
        config = Configuration(config)
    i = config.index_of(x)
    idx, _ = knn_table(config.points, k, rows=[i])
    return [tuple(config.points[j]) for j in idx[0]]


def kth_distance(points, k: int, queries=None) -> np.ndarray:
    """Distance from each query (default: each point) to its k-th neighbour."""
    from scipy.spatial import cKDTree

    pts = np.asarray(points, dtype=np.float64)
    tree = cKDTree(pts)
    if queries is None:
        if len(pts) < k + 1:
            return np.full(len(pts), np.inf)
        d, _ = tree.query(pts, k=k + 1)
        return np.asarray(d).reshape(len(pts), -1)[:, k]
    q = np.asarray(queries, dtype=np.float64)
    if len(pts) < k:
        return np.full(len(q), np.inf)
    d, _ = tree.query(q, k=k)
    return np.asarray(d).reshape(len(q), -1)[:, k - 1]


__all__ = ["knn_table", "knn_order", "kth_distance", "as_points"]
