# cython: language_level=3
"""Compiled geometry kernels.

Same algorithms and results as ``_pykernels``: filtered predicates with an
exact fallback, incremental Delaunay insertion with ghost triangles, and
half-plane clipping of Voronoi cells.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, hypot, sqrt, INFINITY
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

from ._exact import incircle_exact, orient2d_exact

cnp.import_array()

BACKEND = "cython"

cdef double EPS = 2.0 ** -53
cdef double CCW_BOUND = (3.0 + 16.0 * EPS) * EPS
cdef double ICC_BOUND = (10.0 + 96.0 * EPS) * EPS


cdef inline int _orient(double ax, double ay, double bx, double by, double cx, double cy):
    cdef double detleft = (ax - cx) * (by - cy)
    cdef double detright = (ay - cy) * (bx - cx)
    cdef double det = detleft - detright
    cdef double bound = CCW_BOUND * (fabs(detleft) + fabs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return orient2d_exact(ax, ay, bx, by, cx, cy)


cdef inline int _incircle(double ax, double ay, double bx, double by, double cx, double cy,
                          double dx, double dy):
    cdef double adx = ax - dx, ady = ay - dy
    cdef double bdx = bx - dx, bdy = by - dy
    cdef double cdx = cx - dx, cdy = cy - dy
    cdef double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy
    cdef double cdxady = cdx * ady, adxcdy = adx * cdy
    cdef double adxbdy = adx * bdy, bdxady = bdx * ady
    cdef double alift = adx * adx + ady * ady
    cdef double blift = bdx * bdx + bdy * bdy
    cdef double clift = cdx * cdx + cdy * cdy
    cdef double det = (alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy)
                       + clift * (adxbdy - bdxady))
    cdef double perm = ((fabs(bdxcdy) + fabs(cdxbdy)) * alift
                        + (fabs(cdxady) + fabs(adxcdy)) * blift
                        + (fabs(adxbdy) + fabs(bdxady)) * clift)
    cdef double bound = ICC_BOUND * perm
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def orient2d(double ax, double ay, double bx, double by, double cx, double cy):
    """Sign of the signed area of (a, b, c); +1 for counter-clockwise."""
    return _orient(ax, ay, bx, by, cx, cy)


def incircle(double ax, double ay, double bx, double by, double cx, double cy,
             double dx, double dy):
    """+1 if d lies inside the circle through counter-clockwise a, b, c."""
    return _incircle(ax, ay, bx, by, cx, cy, dx, dy)


cdef class _Builder:
    cdef const double[::1] X
    cdef const double[::1] Y
    cdef long G
    cdef long cap
    cdef long *buf
    cdef long *V
    cdef long *N
    cdef long *alive
    cdef long *mark
    cdef long *seen
    cdef long *pool
    cdef long nfree
    cdef long ntri
    cdef long stamp
    cdef long last
    cdef long *cavity
    cdef long *bnd
    cdef long *starts
    cdef long *ends
    cdef long *made

    def __cinit__(self, const double[::1] xs, const double[::1] ys):
        cdef long n = xs.shape[0]
        cdef long cap = 2 * n + 8
        cdef long total = 6 * cap + 5 * cap + 3 * (cap + 4) + 2 * (n + 1) + (cap + 4)
        cdef long i
        self.buf = <long *> malloc(total * sizeof(long))
        if self.buf == NULL:
            raise MemoryError()
        for i in range(total):
            self.buf[i] = 0
        self.X = xs
        self.Y = ys
        self.G = n
        self.cap = cap
        self.V = self.buf
        self.N = self.V + 3 * cap
        self.alive = self.N + 3 * cap
        self.mark = self.alive + cap
        self.seen = self.mark + cap
        self.pool = self.seen + cap
        self.cavity = self.pool + cap
        self.bnd = self.cavity + cap
        self.starts = self.bnd + 3 * (cap + 4)
        self.ends = self.starts + (n + 1)
        self.made = self.ends + (n + 1)
        for i in range(3 * cap):
            self.N[i] = -1
        for i in range(n + 1):
            self.starts[i] = -1
            self.ends[i] = -1
        self.nfree = 0
        self.ntri = 0
        self.stamp = 0
        self.last = 0

    def __dealloc__(self):
        if self.buf != NULL:
            free(self.buf)

    cdef long new_tri(self, long a, long b, long c):
        cdef long t
        if self.nfree > 0:
            self.nfree -= 1
            t = self.pool[self.nfree]
        else:
            t = self.ntri
            self.ntri += 1
        self.V[3 * (t) + (0)] = a
        self.V[3 * (t) + (1)] = b
        self.V[3 * (t) + (2)] = c
        self.N[3 * (t) + (0)] = -1
        self.N[3 * (t) + (1)] = -1
        self.N[3 * (t) + (2)] = -1
        self.alive[t] = 1
        return t

    cdef inline int orient(self, long a, long b, long c):
        return _orient(self.X[a], self.Y[a], self.X[b], self.Y[b], self.X[c], self.Y[c])

    cdef bint between(self, long a, long b, long p):
        cdef double lo, hi
        if self.X[a] != self.X[b]:
            lo = min(self.X[a], self.X[b])
            hi = max(self.X[a], self.X[b])
            return lo < self.X[p] < hi
        lo = min(self.Y[a], self.Y[b])
        hi = max(self.Y[a], self.Y[b])
        return lo < self.Y[p] < hi

    cdef bint conflict(self, long t, long p):
        cdef long a = self.V[3 * (t) + (0)], b = self.V[3 * (t) + (1)], c = self.V[3 * (t) + (2)]
        cdef int o
        if c == self.G:
            o = self.orient(a, b, p)
            if o != 0:
                return o > 0
            return self.between(a, b, p)
        return _incircle(self.X[a], self.Y[a], self.X[b], self.Y[b], self.X[c], self.Y[c],
                         self.X[p], self.Y[p]) > 0

    cdef inline int vindex(self, long t, long v):
        if self.V[3 * (t) + (0)] == v:
            return 0
        if self.V[3 * (t) + (1)] == v:
            return 1
        return 2

    cdef int edge_index(self, long t, long u, long v) except -1:
        cdef int i
        for i in range(3):
            if self.V[3 * (t) + ((i + 1) % 3)] == u and self.V[3 * (t) + ((i + 2) % 3)] == v:
                return i
        raise RuntimeError("edge not found")

    cdef void init(self, long a, long b, long c):
        cdef long tmp, G = self.G
        if self.orient(a, b, c) < 0:
            tmp = b
            b = c
            c = tmp
        cdef long t0 = self.new_tri(a, b, c)
        cdef long gab = self.new_tri(b, a, G)
        cdef long gbc = self.new_tri(c, b, G)
        cdef long gca = self.new_tri(a, c, G)
        # t0 = (a,b,c); ghost (u,v,G) lies across u->v; ghosts meet along (x,G)
        self.N[3 * (t0) + (0)] = gbc
        self.N[3 * (t0) + (1)] = gca
        self.N[3 * (t0) + (2)] = gab
        self.N[3 * (gab) + (2)] = t0
        self.N[3 * (gbc) + (2)] = t0
        self.N[3 * (gca) + (2)] = t0
        # gab = (b,a,G): edge a->G opposite b pairs with G->a in gca=(a,c,G)
        self.N[3 * (gab) + (0)] = gca
        self.N[3 * (gca) + (1)] = gab
        # gab edge G->b opposite a pairs with b->G in gbc=(c,b,G)
        self.N[3 * (gab) + (1)] = gbc
        self.N[3 * (gbc) + (0)] = gab
        # gbc edge G->c opposite b pairs with c->G in gca
        self.N[3 * (gbc) + (1)] = gca
        self.N[3 * (gca) + (0)] = gbc
        self.last = t0

    cdef long locate(self, long p) except -1:
        cdef long t = self.last, step, limit = 4 * self.ntri + 16
        cdef int r, i
        cdef bint moved
        for step in range(limit):
            if self.V[3 * (t) + (2)] == self.G:
                if self.conflict(t, p):
                    return t
                t = self.N[3 * (t) + (2)]
                continue
            moved = False
            for r in range(3):
                i = (r + step) % 3
                if self.orient(self.V[3 * (t) + ((i + 1) % 3)], self.V[3 * (t) + ((i + 2) % 3)], p) < 0:
                    t = self.N[3 * (t) + (i)]
                    moved = True
                    break
            if not moved:
                return t
        for t in range(self.ntri):
            if self.alive[t] and self.conflict(t, p):
                return t
        raise RuntimeError("no conflicting triangle")

    cdef int insert(self, long p) except -1:
        cdef long G = self.G
        self.stamp += 1
        cdef long stamp = self.stamp
        cdef long t0 = self.locate(p)
        cdef long nc = 1, nb_count = 0, i = 0, t, nb, u, v, k, j
        self.cavity[0] = t0
        self.mark[t0] = stamp
        while i < nc:
            t = self.cavity[i]
            i += 1
            for k in range(3):
                nb = self.N[3 * (t) + (k)]
                if self.mark[nb] == stamp:
                    continue
                u = self.V[3 * (t) + ((k + 1) % 3)]
                v = self.V[3 * (t) + ((k + 2) % 3)]
                if self.seen[nb] != stamp and self.conflict(nb, p):
                    self.mark[nb] = stamp
                    self.cavity[nc] = nb
                    nc += 1
                else:
                    self.seen[nb] = stamp
                    self.bnd[3 * (nb_count) + (0)] = u
                    self.bnd[3 * (nb_count) + (1)] = v
                    self.bnd[3 * (nb_count) + (2)] = nb
                    nb_count += 1
        for i in range(nc):
            t = self.cavity[i]
            self.alive[t] = 0
            self.pool[self.nfree] = t
            self.nfree += 1
        for j in range(nb_count):
            u = self.bnd[3 * (j) + (0)]
            v = self.bnd[3 * (j) + (1)]
            nb = self.bnd[3 * (j) + (2)]
            if u == G:
                t = self.new_tri(v, p, G)
            elif v == G:
                t = self.new_tri(p, u, G)
            else:
                t = self.new_tri(u, v, p)
            self.N[3 * (t) + (self.vindex(t, p))] = nb
            self.N[3 * (nb) + (self.edge_index(nb, v, u))] = t
            self.starts[u] = t
            self.ends[v] = t
            self.made[j] = t
        for j in range(nb_count):
            t = self.made[j]
            u = self.bnd[3 * (j) + (0)]
            v = self.bnd[3 * (j) + (1)]
            self.N[3 * (t) + (self.vindex(t, u))] = self.starts[v]
            self.N[3 * (t) + (self.vindex(t, v))] = self.ends[u]
        self.last = self.made[0]
        return 0

    def result(self, bint check):
        cdef long G = self.G, t, s, k, j, m = 0, a, b, c, d
        cdef long[::1] index = np.full(self.ntri, -1, dtype=np.int64)
        for t in range(self.ntri):
            if self.alive[t] and self.V[3 * (t) + (2)] != G:
                index[t] = m
                m += 1
        tris = np.zeros((m, 3), dtype=np.int64)
        nbrs = np.zeros((m, 3), dtype=np.int64)
        cdef long[:, ::1] tv = tris
        cdef long[:, ::1] tn = nbrs
        cdef bint degenerate = False
        for t in range(self.ntri):
            if index[t] < 0:
                continue
            for k in range(3):
                tv[index[t], k] = self.V[3 * (t) + (k)]
                s = self.N[3 * (t) + (k)]
                tn[index[t], k] = index[s]
                if check and s > t and index[s] >= 0:
                    if self.N[3 * (s) + (0)] == t:
                        j = 0
                    elif self.N[3 * (s) + (1)] == t:
                        j = 1
                    else:
                        j = 2
                    a = self.V[3 * (t) + (0)]
                    b = self.V[3 * (t) + (1)]
                    c = self.V[3 * (t) + (2)]
                    d = self.V[3 * (s) + (j)]
                    if _incircle(self.X[a], self.Y[a], self.X[b], self.Y[b], self.X[c],
                                 self.Y[c], self.X[d], self.Y[d]) == 0:
                        degenerate = True
        return tris, nbrs, degenerate


def triangulate(points, check=True):
    """Delaunay triangulation of distinct planar points.

    Returns ``(tris, nbrs, degenerate)``; see ``_pykernels.triangulate``.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef long n = pts.shape[0]
    empty = (np.zeros((0, 3), np.int64), np.zeros((0, 3), np.int64), False)
    if n == 0:
        return empty
    cdef const double[::1] xs = np.ascontiguousarray(pts[:, 0])
    cdef const double[::1] ys = np.ascontiguousarray(pts[:, 1])
    cdef long[::1] order = np.lexsort((pts[:, 1], pts[:, 0])).astype(np.int64)
    cdef long k, a, b, j = -1
    for k in range(n - 1):
        a = order[k]
        b = order[k + 1]
        if xs[a] == xs[b] and ys[a] == ys[b]:
            raise ValueError("duplicate points")
    if n < 3:
        return empty
    cdef _Builder bld = _Builder(xs, ys)
    for k in range(2, n):
        if bld.orient(order[0], order[1], order[k]) != 0:
            j = k
            break
    if j < 0:
        return empty
    bld.init(order[0], order[1], order[j])
    for k in range(2, n):
        if k != j:
            bld.insert(order[k])
    return bld.result(check)


def clip_cell(points, long i, order, box):
    """Voronoi cell of ``points[i]`` clipped to ``box``; see ``_pykernels.clip_cell``."""
    cdef const double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const long[::1] cand = np.ascontiguousarray(order, dtype=np.int64)
    cdef long cap = 2 * cand.shape[0] + 8
    cdef double[:, ::1] pa = np.zeros((cap, 2))
    cdef double[:, ::1] pb = np.zeros((cap, 2))
    cdef long[::1] ga = np.zeros(cap, dtype=np.int64)
    cdef long[::1] gb = np.zeros(cap, dtype=np.int64)
    cdef double x = pts[i, 0], y = pts[i, 1]
    cdef double x0 = box[0], y0 = box[1], x1 = box[2], y1 = box[3]
    cdef long m = 4, mo, j, jj, q, g, c
    cdef double reach, d2, nx, ny, mx, my, px, py, sx, sy, sp, ss, t, r2
    pa[0, 0] = x0; pa[0, 1] = y0
    pa[1, 0] = x1; pa[1, 1] = y0
    pa[2, 0] = x1; pa[2, 1] = y1
    pa[3, 0] = x0; pa[3, 1] = y1
    for j in range(4):
        ga[j] = -1
    reach = 0.0
    for j in range(m):
        r2 = (pa[j, 0] - x) ** 2 + (pa[j, 1] - y) ** 2
        if r2 > reach:
            reach = r2
    for c in range(cand.shape[0]):
        q = cand[c]
        if q == i:
            continue
        nx = pts[q, 0] - x
        ny = pts[q, 1] - y
        d2 = nx * nx + ny * ny
        if d2 > 4.0 * reach * (1.0 + 1e-12):
            break
        mx = 0.5 * (x + pts[q, 0])
        my = 0.5 * (y + pts[q, 1])
        mo = 0
        for j in range(m):
            jj = (j + 1) % m
            px = pa[j, 0]; py = pa[j, 1]; g = ga[j]
            sx = pa[jj, 0]; sy = pa[jj, 1]
            sp = (px - mx) * nx + (py - my) * ny
            ss = (sx - mx) * nx + (sy - my) * ny
            if sp <= 0.0:
                pb[mo, 0] = px; pb[mo, 1] = py; gb[mo] = g
                mo += 1
                if ss > 0.0:
                    t = sp / (sp - ss)
                    pb[mo, 0] = px + t * (sx - px); pb[mo, 1] = py + t * (sy - py); gb[mo] = q
                    mo += 1
            elif ss <= 0.0:
                t = sp / (sp - ss)
                pb[mo, 0] = px + t * (sx - px); pb[mo, 1] = py + t * (sy - py); gb[mo] = g
                mo += 1
        pa, pb = pb, pa
        ga, gb = gb, ga
        m = mo
        if m == 0:
            break
        reach = 0.0
        for j in range(m):
            r2 = (pa[j, 0] - x) ** 2 + (pa[j, 1] - y) ** 2
            if r2 > reach:
                reach = r2
    verts = np.array(pa[:m], dtype=np.float64).reshape(-1, 2)
    gens = np.array(ga[:m], dtype=np.int64)
    return verts, gens


cdef inline bint _lexless(double ax, double ay, double bx, double by):
    return ax < bx or (ax == bx and ay < by)


def tess_tables(points, tris, nbrs):
    """Canonical triangles, circumcircles and the edge table of a triangulation.

    See ``_pykernels.tess_tables``.
    """
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const long[:, ::1] T = np.ascontiguousarray(tris, dtype=np.int64)
    cdef const long[:, ::1] Nb = np.ascontiguousarray(nbrs, dtype=np.int64)
    cdef long n = P.shape[0], m = T.shape[0], t, k, s, j, u, v, e = 0, a, b, c, tmp
    canon_a = np.empty((m, 3), dtype=np.int64)
    cc_a = np.empty((m, 2), dtype=np.float64)
    cr_a = np.empty(m, dtype=np.float64)
    cdef long[:, ::1] canon = canon_a
    cdef double[:, ::1] cc = cc_a
    cdef double[::1] cr = cr_a
    cdef double bx, by, cx, cy, bb, c2, den, ux, uy
    for t in range(m):
        a = T[t, 0]
        b = T[t, 1]
        c = T[t, 2]
        if _lexless(P[b, 0], P[b, 1], P[a, 0], P[a, 1]):
            a, b = b, a
        if _lexless(P[c, 0], P[c, 1], P[b, 0], P[b, 1]):
            b, c = c, b
            if _lexless(P[b, 0], P[b, 1], P[a, 0], P[a, 1]):
                a, b = b, a
        canon[t, 0] = a
        canon[t, 1] = b
        canon[t, 2] = c
        bx = P[b, 0] - P[a, 0]
        by = P[b, 1] - P[a, 1]
        cx = P[c, 0] - P[a, 0]
        cy = P[c, 1] - P[a, 1]
        bb = bx * bx + by * by
        c2 = cx * cx + cy * cy
        den = 2.0 * (bx * cy - by * cx)
        ux = (cy * bb - by * c2) / den
        uy = (bx * c2 - cx * bb) / den
        cc[t, 0] = P[a, 0] + ux
        cc[t, 1] = P[a, 1] + uy
        cr[t] = hypot(ux, uy)
    # edges bucketed by their smaller endpoint, each bucket sorted by the larger one
    cdef long ne = 0
    for t in range(m):
        for k in range(3):
            if Nb[t, k] < 0 or Nb[t, k] > t:
                ne += 1
    ptr_a = np.zeros(n + 1, dtype=np.int64)
    cdef long[::1] ptr = ptr_a
    for t in range(m):
        for k in range(3):
            s = Nb[t, k]
            if s >= 0 and s < t:
                continue
            u = T[t, (k + 1) % 3]
            v = T[t, (k + 2) % 3]
            ptr[(u if u < v else v) + 1] += 1
    for k in range(n):
        ptr[k + 1] += ptr[k]
    fill_a = ptr_a[:n].copy()
    cdef long[::1] fill = fill_a
    edges_a = np.empty((ne, 2), dtype=np.int64)
    etri_a = np.full((ne, 2), -1, dtype=np.int64)
    eopp_a = np.full((ne, 2), -1, dtype=np.int64)
    hull_a = np.zeros(n, dtype=bool)
    cdef long[:, ::1] edges = edges_a
    cdef long[:, ::1] etri = etri_a
    cdef long[:, ::1] eopp = eopp_a
    cdef cnp.npy_bool[::1] hull = hull_a
    cdef int side
    cdef long lo, hi, x0, x1, y0, y1, i
    for t in range(m):
        for k in range(3):
            s = Nb[t, k]
            if s >= 0 and s < t:
                continue
            u = T[t, (k + 1) % 3]
            v = T[t, (k + 2) % 3]
            lo = u if u < v else v
            hi = v if u < v else u
            e = fill[lo]
            fill[lo] += 1
            side = 0 if u < v else 1
            edges[e, 0] = lo
            edges[e, 1] = hi
            etri[e, side] = t
            eopp[e, side] = T[t, k]
            if s >= 0:
                for j in range(3):
                    if Nb[s, j] == t:
                        break
                etri[e, 1 - side] = s
                eopp[e, 1 - side] = T[s, j]
            else:
                hull[u] = True
                hull[v] = True
    for lo in range(n):
        for e in range(ptr[lo] + 1, ptr[lo + 1]):
            hi = edges[e, 1]
            x0 = etri[e, 0]
            x1 = etri[e, 1]
            y0 = eopp[e, 0]
            y1 = eopp[e, 1]
            i = e - 1
            while i >= ptr[lo] and edges[i, 1] > hi:
                edges[i + 1, 1] = edges[i, 1]
                etri[i + 1, 0] = etri[i, 0]
                etri[i + 1, 1] = etri[i, 1]
                eopp[i + 1, 0] = eopp[i, 0]
                eopp[i + 1, 1] = eopp[i, 1]
                i -= 1
            edges[i + 1, 1] = hi
            etri[i + 1, 0] = x0
            etri[i + 1, 1] = x1
            eopp[i + 1, 0] = y0
            eopp[i + 1, 1] = y1
    return canon_a, cc_a, cr_a, edges_a, etri_a, eopp_a, hull_a


cdef _Builder _clone(_Builder bld, const double[::1] xs, const double[::1] ys):
    cdef _Builder out = _Builder.__new__(_Builder, xs, ys)
    cdef long n = xs.shape[0]
    cdef long cap = 2 * n + 8
    cdef long total = 6 * cap + 5 * cap + 3 * (cap + 4) + 2 * (n + 1) + (cap + 4)
    memcpy(out.buf, bld.buf, total * sizeof(long))
    out.nfree = bld.nfree
    out.ntri = bld.ntri
    out.stamp = bld.stamp
    out.last = bld.last
    return out


cdef class DelaunayBase:
    """Triangulation of a fixed point set that accepts a few extra points per query.

    See ``_pykernels.DelaunayBase``. Queries write into shared coordinate
    buffers, so one instance must not be queried from several threads.
    """

    cdef readonly object points
    cdef readonly long nb
    cdef readonly long max_extra
    cdef object xs_arr
    cdef object ys_arr
    cdef _Builder bld

    def __init__(self, points, long max_extra):
        pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
        self.points = pts
        self.nb = pts.shape[0]
        self.max_extra = max_extra
        self.xs_arr = np.zeros(self.nb + max_extra)
        self.ys_arr = np.zeros(self.nb + max_extra)
        self.xs_arr[:self.nb] = pts[:, 0]
        self.ys_arr[:self.nb] = pts[:, 1]
        self.bld = None
        if self.nb < 3:
            return
        cdef long[::1] order = np.lexsort((pts[:, 1], pts[:, 0])).astype(np.int64)
        cdef _Builder bld = _Builder(self.xs_arr, self.ys_arr)
        cdef long k, j = -1
        for k in range(2, self.nb):
            if bld.orient(order[0], order[1], order[k]) != 0:
                j = k
                break
        if j < 0:
            return
        bld.init(order[0], order[1], order[j])
        for k in range(2, self.nb):
            if k != j:
                bld.insert(order[k])
        self.bld = bld

    @property
    def ok(self):
        return self.bld is not None

    def with_points(self, extra, check=True):
        ext = np.ascontiguousarray(extra, dtype=np.float64).reshape(-1, 2)
        cdef long ni = ext.shape[0], nb = self.nb, k, a, b
        if self.bld is None or ni > self.max_extra:
            return triangulate(np.vstack([ext, self.points]), check)
        cdef double[::1] xs = self.xs_arr
        cdef double[::1] ys = self.ys_arr
        for k in range(ni):
            xs[nb + k] = ext[k, 0]
            ys[nb + k] = ext[k, 1]
        cdef long[::1] order = np.lexsort((ext[:, 1], ext[:, 0])).astype(np.int64)
        for k in range(ni - 1):
            a = nb + order[k]
            b = nb + order[k + 1]
            if xs[a] == xs[b] and ys[a] == ys[b]:
                raise ValueError("duplicate points")
        cdef _Builder bld = _clone(self.bld, self.xs_arr, self.ys_arr)
        for k in range(ni):
            bld.insert(nb + order[k])
        tris, nbrs, degenerate = bld.result(check)
        tris = np.where(tris >= nb, tris - nb, tris + ni)
        return tris, nbrs, degenerate


def scan_table(members, long n_int, ball_owner, ball_c, ball_r, hp_owner, hp_n, hp_c, lo, hi,
               double tol):
    """Affected mask and horizon reach of each hyperedge for the box ``[lo, hi]``."""
    cdef const long[:, ::1] M = np.ascontiguousarray(members, dtype=np.int64)
    cdef const long[::1] bo = np.ascontiguousarray(ball_owner, dtype=np.int64)
    cdef const double[:, ::1] bc = np.ascontiguousarray(ball_c, dtype=np.float64)
    cdef const double[::1] br = np.ascontiguousarray(ball_r, dtype=np.float64)
    cdef const long[::1] ho = np.ascontiguousarray(hp_owner, dtype=np.int64)
    cdef const double[:, ::1] hn = np.ascontiguousarray(hp_n, dtype=np.float64)
    cdef const double[::1] hc = np.ascontiguousarray(hp_c, dtype=np.float64)
    cdef const double[::1] L = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const double[::1] H = np.ascontiguousarray(hi, dtype=np.float64)
    cdef long m = M.shape[0], w = M.shape[1], d = L.shape[0], i, k, o
    hit_a = np.zeros(m, dtype=np.bool_)
    reach_a = np.zeros(m)
    cdef cnp.npy_bool[::1] hit = hit_a
    cdef double[::1] reach = reach_a
    cdef double s, g, dist, r, far
    for i in range(m):
        for k in range(w):
            o = M[i, k]
            if o >= 0 and o < n_int:
                hit[i] = True
                break
    for i in range(bo.shape[0]):
        s = 0.0
        for k in range(d):
            g = L[k] - bc[i, k]
            if g < 0.0:
                g = 0.0
            if bc[i, k] - H[k] > g:
                g = bc[i, k] - H[k]
            s = s + g * g
        dist = sqrt(s)
        r = br[i]
        o = bo[i]
        if dist <= r + tol * (1.0 + r):
            hit[o] = True
        far = dist + r
        if far > reach[o]:
            reach[o] = far
    for i in range(ho.shape[0]):
        s = 0.0
        for k in range(d):
            if hn[i, k] > 0:
                s = s + hn[i, k] * H[k]
            else:
                s = s + hn[i, k] * L[k]
        if s >= hc[i] - tol * fabs(hc[i]):
            hit[ho[i]] = True
    for i in range(ho.shape[0]):
        reach[ho[i]] = INFINITY
    return hit_a, reach_a


def del2_horizons(points, edges, edge_tri, cc, cr):
    """Lens and half-plane pieces of every Delaunay edge (side 0 rows first)."""
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const long[:, ::1] E = np.ascontiguousarray(edges, dtype=np.int64)
    cdef const long[:, ::1] ET = np.ascontiguousarray(edge_tri, dtype=np.int64)
    cdef const double[:, ::1] C = np.ascontiguousarray(cc, dtype=np.float64).reshape(-1, 2)
    cdef const double[::1] R = np.ascontiguousarray(cr, dtype=np.float64)
    cdef long ne = E.shape[0], i, t, nb = 0, nh = 0, side
    for i in range(ne):
        for side in range(2):
            if ET[i, side] >= 0:
                nb += 1
            else:
                nh += 1
    owner_a = np.empty(nb, dtype=np.int64)
    c_a = np.empty((nb, 2))
    r_a = np.empty(nb)
    ho_a = np.empty(nh, dtype=np.int64)
    hn_a = np.empty((nh, 2))
    hc_a = np.empty(nh)
    cdef long[::1] owner = owner_a
    cdef double[:, ::1] c = c_a
    cdef double[::1] r = r_a
    cdef long[::1] ho = ho_a
    cdef double[:, ::1] hn = hn_a
    cdef double[::1] hc = hc_a
    cdef double ax, ay, nx, ny
    nb = 0
    nh = 0
    for side in range(2):
        for i in range(ne):
            t = ET[i, side]
            if t >= 0:
                owner[nb] = i
                c[nb, 0] = C[t, 0]
                c[nb, 1] = C[t, 1]
                r[nb] = R[t]
                nb += 1
    for side in range(2):
        for i in range(ne):
            if ET[i, side] < 0:
                ax = P[E[i, 0], 0]
                ay = P[E[i, 0], 1]
                nx = -(P[E[i, 1], 1] - ay)
                ny = P[E[i, 1], 0] - ax
                if side == 1:
                    nx = -nx
                    ny = -ny
                ho[nh] = i
                hn[nh, 0] = nx
                hn[nh, 1] = ny
                hc[nh] = nx * ax + ny * ay
                nh += 1
    return owner_a, c_a, r_a, ho_a, hn_a, hc_a
