"""Pure-Python geometry kernels.

Reference implementation of the compiled kernels in ``_ckernels.pyx``; both
expose the same functions with the same results. Triangles are stored
counter-clockwise. Hull edges are closed off by "ghost" triangles that carry
a symbolic vertex at infinity, so no bounding super-triangle is needed.
"""
import numpy as np

from ._exact import incircle_exact, orient2d_exact

EPS = 2.0 ** -53
CCW_BOUND = (3.0 + 16.0 * EPS) * EPS
ICC_BOUND = (10.0 + 96.0 * EPS) * EPS

BACKEND = "python"


def orient2d(ax, ay, bx, by, cx, cy):
    """Sign of the signed area of (a, b, c); +1 for counter-clockwise."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    bound = CCW_BOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return orient2d_exact(ax, ay, bx, by, cx, cy)


def incircle(ax, ay, bx, by, cx, cy, dx, dy):
    """+1 if d lies inside the circle through counter-clockwise a, b, c."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    perm = ((abs(bdxcdy) + abs(cdxbdy)) * alift + (abs(cdxady) + abs(adxcdy)) * blift
            + (abs(adxbdy) + abs(bdxady)) * clift)
    bound = ICC_BOUND * perm
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


class _Builder:
    def __init__(self, xs, ys):
        self.X = xs
        self.Y = ys
        self.G = len(xs)
        self.V = []
        self.N = []
        self.alive = []
        self.free = []
        self.mark = []
        self.seen = []
        self.stamp = 0
        self.last = 0

    def new_tri(self, a, b, c):
        if self.free:
            t = self.free.pop()
            self.V[t] = [a, b, c]
            self.N[t] = [-1, -1, -1]
            self.alive[t] = True
        else:
            t = len(self.V)
            self.V.append([a, b, c])
            self.N.append([-1, -1, -1])
            self.alive.append(True)
            self.mark.append(0)
            self.seen.append(0)
        return t

    def orient(self, a, b, c):
        X, Y = self.X, self.Y
        return orient2d(X[a], Y[a], X[b], Y[b], X[c], Y[c])

    def between(self, a, b, p):
        X, Y = self.X, self.Y
        if X[a] != X[b]:
            return min(X[a], X[b]) < X[p] < max(X[a], X[b])
        return min(Y[a], Y[b]) < Y[p] < max(Y[a], Y[b])

    def conflict(self, t, p):
        a, b, c = self.V[t]
        if c == self.G:
            o = self.orient(a, b, p)
            if o != 0:
                return o > 0
            return self.between(a, b, p)
        X, Y = self.X, self.Y
        return incircle(X[a], Y[a], X[b], Y[b], X[c], Y[c], X[p], Y[p]) > 0

    def edge_index(self, t, u, v):
        """Index i such that triangle t has edge u->v opposite vertex i."""
        tv = self.V[t]
        for i in range(3):
            if tv[(i + 1) % 3] == u and tv[(i + 2) % 3] == v:
                return i
        raise RuntimeError("edge not found")

    def init(self, a, b, c):
        if self.orient(a, b, c) < 0:
            b, c = c, b
        G = self.G
        t0 = self.new_tri(a, b, c)
        g_ab = self.new_tri(b, a, G)
        g_bc = self.new_tri(c, b, G)
        g_ca = self.new_tri(a, c, G)
        tris = [t0, g_ab, g_bc, g_ca]
        edges = {}
        for t in tris:
            tv = self.V[t]
            for i in range(3):
                edges[(tv[(i + 1) % 3], tv[(i + 2) % 3])] = (t, i)
        for (u, v), (t, i) in edges.items():
            s, _ = edges[(v, u)]
            self.N[t][i] = s
        self.last = t0

    def locate(self, p):
        V, N, G = self.V, self.N, self.G
        t = self.last
        limit = 4 * len(V) + 16
        for step in range(limit):
            tv = V[t]
            if tv[2] == G:
                if self.conflict(t, p):
                    return t
                t = N[t][2]
                continue
            moved = False
            for r in range(3):
                i = (r + step) % 3
                if self.orient(tv[(i + 1) % 3], tv[(i + 2) % 3], p) < 0:
                    t = N[t][i]
                    moved = True
                    break
            if not moved:
                return t
        for t in range(len(V)):
            if self.alive[t] and self.conflict(t, p):
                return t
        raise RuntimeError("no conflicting triangle")

    def insert(self, p):
        V, N, G = self.V, self.N, self.G
        self.stamp += 1
        stamp = self.stamp
        t0 = self.locate(p)
        cavity = [t0]
        self.mark[t0] = stamp
        boundary = []
        i = 0
        while i < len(cavity):
            t = cavity[i]
            i += 1
            for k in range(3):
                nb = N[t][k]
                if self.mark[nb] == stamp:
                    continue
                tv = V[t]
                edge = (tv[(k + 1) % 3], tv[(k + 2) % 3], nb)
                if self.seen[nb] == stamp:
                    boundary.append(edge)
                elif self.conflict(nb, p):
                    self.mark[nb] = stamp
                    cavity.append(nb)
                else:
                    self.seen[nb] = stamp
                    boundary.append(edge)
        for t in cavity:
            self.alive[t] = False
            self.free.append(t)
        starts = {}
        ends = {}
        made = []
        for u, v, nb in boundary:
            if u == G:
                t = self.new_tri(v, p, G)
            elif v == G:
                t = self.new_tri(p, u, G)
            else:
                t = self.new_tri(u, v, p)
            N[t][V[t].index(p)] = nb
            N[nb][self.edge_index(nb, v, u)] = t
            starts[u] = t
            ends[v] = t
            made.append((t, u, v))
        for t, u, v in made:
            tv = V[t]
            N[t][tv.index(u)] = starts[v]
            N[t][tv.index(v)] = ends[u]
        self.last = made[0][0]

    def result(self, check):
        V, N, G = self.V, self.N, self.G
        real = [t for t in range(len(V)) if self.alive[t] and V[t][2] != G]
        index = {t: j for j, t in enumerate(real)}
        tris = np.array([V[t] for t in real], dtype=np.int64).reshape(-1, 3)
        nbrs = np.array([[index.get(s, -1) for s in N[t]] for t in real],
                        dtype=np.int64).reshape(-1, 3)
        degenerate = False
        if check:
            X, Y = self.X, self.Y
            for t in real:
                a, b, c = V[t]
                for k in range(3):
                    s = N[t][k]
                    if s < t or V[s][2] == G:
                        continue
                    j = N[s].index(t)
                    d = V[s][j]
                    if incircle(X[a], Y[a], X[b], Y[b], X[c], Y[c], X[d], Y[d]) == 0:
                        degenerate = True
        return tris, nbrs, degenerate


def triangulate(points, check=True):
    """Delaunay triangulation of distinct planar points.

    Returns ``(tris, nbrs, degenerate)`` where ``tris`` holds counter-clockwise
    vertex triples, ``nbrs[t, i]`` is the triangle across the edge opposite
    vertex ``i`` (-1 on the hull) and ``degenerate`` reports an empty circle
    through four or more points. All-collinear input yields no triangles.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    xs = pts[:, 0].tolist() if n else []
    ys = pts[:, 1].tolist() if n else []
    empty = (np.zeros((0, 3), np.int64), np.zeros((0, 3), np.int64), False)
    order = sorted(range(n), key=lambda i: (xs[i], ys[i]))
    for a, b in zip(order, order[1:]):
        if xs[a] == xs[b] and ys[a] == ys[b]:
            raise ValueError("duplicate points")
    if n < 3:
        return empty
    bld = _Builder(xs, ys)
    p0, p1 = order[0], order[1]
    j = next((k for k in range(2, n) if bld.orient(p0, p1, order[k]) != 0), None)
    if j is None:
        return empty
    bld.init(p0, p1, order[j])
    for k in range(2, n):
        if k != j:
            bld.insert(order[k])
    return bld.result(check)


def clip_cell(points, i, order, box):
    """Voronoi cell of ``points[i]`` clipped to ``box``.

    ``order`` lists candidate neighbours by increasing distance; the scan
    stops once no remaining candidate can cut the polygon. Returns vertices
    (counter-clockwise) and, per edge starting at each vertex, the index of
    the generator on the other side (-1 for a box edge).
    """
    pts = np.asarray(points, dtype=np.float64)
    x, y = float(pts[i, 0]), float(pts[i, 1])
    x0, y0, x1, y1 = map(float, box)
    poly = [(x0, y0, -1), (x1, y0, -1), (x1, y1, -1), (x0, y1, -1)]
    reach = max((vx - x) ** 2 + (vy - y) ** 2 for vx, vy, _ in poly)
    for q in order:
        q = int(q)
        if q == i:
            continue
        qx, qy = float(pts[q, 0]), float(pts[q, 1])
        nx, ny = qx - x, qy - y
        d2 = nx * nx + ny * ny
        if d2 > 4.0 * reach * (1.0 + 1e-12):
            break
        mx, my = 0.5 * (x + qx), 0.5 * (y + qy)
        out = []
        m = len(poly)
        for j in range(m):
            px, py, g = poly[j]
            sx, sy, _ = poly[(j + 1) % m]
            sp = (px - mx) * nx + (py - my) * ny
            ss = (sx - mx) * nx + (sy - my) * ny
            if sp <= 0.0:
                out.append((px, py, g))
                if ss > 0.0:
                    t = sp / (sp - ss)
                    out.append((px + t * (sx - px), py + t * (sy - py), q))
            elif ss <= 0.0:
                t = sp / (sp - ss)
                out.append((px + t * (sx - px), py + t * (sy - py), g))
        poly = out
        if not poly:
            break
        reach = max((vx - x) ** 2 + (vy - y) ** 2 for vx, vy, _ in poly)
    verts = np.array([(vx, vy) for vx, vy, _ in poly], dtype=np.float64).reshape(-1, 2)
    gens = np.array([g for _, _, g in poly], dtype=np.int64)
    return verts, gens


def tess_tables(points, tris, nbrs):
    """Canonical triangles, circumcircles and the edge table of a triangulation.

    Returns ``(canon, cc, cr, edges, edge_tri, edge_opp, hull_vertex)``.
    ``canon`` lists each triangle's vertices in lexicographic coordinate
    order and the circumcircles are computed from that order. Edges
    ``(i, j)``, ``i < j``, are sorted; side 0 is the left of ``i -> j``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    m = len(tris)
    order = np.lexsort(pts.T[::-1])
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    canon = np.take_along_axis(tris, np.argsort(rank[tris], axis=1), axis=1)
    p0 = pts[canon[:, 0]]
    b = pts[canon[:, 1]] - p0
    c = pts[canon[:, 2]] - p0
    bb = b[:, 0] * b[:, 0] + b[:, 1] * b[:, 1]
    c2 = c[:, 0] * c[:, 0] + c[:, 1] * c[:, 1]
    den = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    ux = (c[:, 1] * bb - b[:, 1] * c2) / den
    uy = (b[:, 0] * c2 - c[:, 0] * bb) / den
    cc = np.column_stack([p0[:, 0] + ux, p0[:, 1] + uy])
    cr = np.hypot(ux, uy)
    u = np.concatenate([tris[:, 1], tris[:, 2], tris[:, 0]])
    v = np.concatenate([tris[:, 2], tris[:, 0], tris[:, 1]])
    w = np.concatenate([tris[:, 0], tris[:, 1], tris[:, 2]])
    t = np.tile(np.arange(m), 3)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    key = lo * n + hi
    srt = np.argsort(key, kind="stable")
    key_s = key[srt]
    new = np.r_[True, key_s[1:] != key_s[:-1]]
    first = np.flatnonzero(new)
    edge_id = np.cumsum(new) - 1
    ne = len(first)
    edges = np.column_stack([lo[srt][first], hi[srt][first]])
    edge_tri = np.full((ne, 2), -1, dtype=np.int64)
    edge_opp = np.full((ne, 2), -1, dtype=np.int64)
    side = (u[srt] > v[srt]).astype(np.int64)
    edge_tri[edge_id, side] = t[srt]
    edge_opp[edge_id, side] = w[srt]
    hull = np.zeros(n, dtype=bool)
    hull[edges[(edge_tri < 0).any(axis=1)].ravel()] = True
    return canon, cc, cr, edges, edge_tri, edge_opp, hull


def _clone(bld, xs, ys):
    out = _Builder.__new__(_Builder)
    out.X, out.Y, out.G = xs, ys, bld.G
    out.V = [v[:] for v in bld.V]
    out.N = [v[:] for v in bld.N]
    out.alive = bld.alive[:]
    out.free = bld.free[:]
    out.mark = bld.mark[:]
    out.seen = bld.seen[:]
    out.stamp = bld.stamp
    out.last = bld.last
    return out


class DelaunayBase:
    """Triangulation of a fixed point set that accepts a few extra points per query.

    ``with_points(extra)`` returns the triangulation of ``extra`` plus the
    base points, labelled with the extra points first. Only the extra
    points are inserted; the base triangulation is reused.
    """

    def __init__(self, points, max_extra):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        self.points = pts
        self.nb = nb = len(pts)
        self.max_extra = int(max_extra)
        self.xs = pts[:, 0].tolist() + [0.0] * self.max_extra
        self.ys = pts[:, 1].tolist() + [0.0] * self.max_extra
        self.bld = None
        order = sorted(range(nb), key=lambda i: (self.xs[i], self.ys[i]))
        if nb < 3:
            return
        bld = _Builder(self.xs, self.ys)
        p0, p1 = order[0], order[1]
        j = next((k for k in range(2, nb) if bld.orient(p0, p1, order[k]) != 0), None)
        if j is None:
            return
        bld.init(p0, p1, order[j])
        for k in range(2, nb):
            if k != j:
                bld.insert(order[k])
        self.bld = bld

    @property
    def ok(self):
        return self.bld is not None

    def with_points(self, extra, check=True):
        ext = np.asarray(extra, dtype=np.float64).reshape(-1, 2)
        ni = len(ext)
        if self.bld is None or ni > self.max_extra:
            return triangulate(np.vstack([ext, self.points]), check)
        xs = self.xs[:self.nb] + ext[:, 0].tolist()
        ys = self.ys[:self.nb] + ext[:, 1].tolist()
        xs += [0.0] * (self.max_extra - ni)
        ys += [0.0] * (self.max_extra - ni)
        order = sorted(range(ni), key=lambda i: (xs[self.nb + i], ys[self.nb + i]))
        for a, b in zip(order, order[1:]):
            if xs[self.nb + a] == xs[self.nb + b] and ys[self.nb + a] == ys[self.nb + b]:
                raise ValueError("duplicate points")
        bld = _clone(self.bld, xs, ys)
        for i in order:
            bld.insert(self.nb + i)
        tris, nbrs, degenerate = bld.result(check)
        tris = np.where(tris >= self.nb, tris - self.nb, tris + ni)
        return tris, nbrs, degenerate


def scan_table(members, n_int, ball_owner, ball_c, ball_r, hp_owner, hp_n, hp_c, lo, hi, tol):
    """Affected mask and horizon reach of each hyperedge for the box ``[lo, hi]``.

    A row is affected when it has a member below ``n_int`` or its closed
    horizon meets the box. Reach is the largest distance from the box of a
    horizon point, ``inf`` for rows with a half-plane.
    """
    members = np.asarray(members)
    m = len(members)
    hit = np.any((members >= 0) & (members < n_int), axis=1) if m else np.zeros(0, bool)
    reach = np.zeros(m)
    if len(ball_owner):
        gap = np.maximum(np.maximum(lo - ball_c, 0.0), ball_c - hi)
        dist = np.sqrt((gap * gap).sum(axis=1))
        ok = dist <= ball_r + tol * (1.0 + ball_r)
        hit[ball_owner[ok]] = True
        np.maximum.at(reach, ball_owner, dist + ball_r)
    if len(hp_owner):
        sup = np.where(hp_n > 0, hp_n * hi, hp_n * lo).sum(axis=1)
        ok = sup >= hp_c - tol * np.abs(hp_c)
        hit[hp_owner[ok]] = True
        reach[hp_owner] = np.inf
    return hit, reach


def del2_horizons(points, edges, edge_tri, cc, cr):
    """Lens and half-plane pieces of every Delaunay edge.

    Rows for side 0 come first, then side 1. A hull side contributes the
    open half-plane ``{y : n . y > c}`` beyond the edge.
    """
    e = np.arange(len(edges))
    owners, cs, rs, hp_o, hp_s = [], [], [], [], []
    for side in (0, 1):
        t = edge_tri[:, side]
        has = t >= 0
        owners.append(e[has])
        cs.append(cc[t[has]])
        rs.append(cr[t[has]])
        hp_o.append(e[~has])
        hp_s.append(np.full(int((~has).sum()), side))
    hp_owner = np.concatenate(hp_o)
    side = np.concatenate(hp_s)
    a = points[edges[hp_owner, 0]]
    b = points[edges[hp_owner, 1]]
    d = b - a
    nrm = np.column_stack([-d[:, 1], d[:, 0]])
    nrm = np.where((side == 0)[:, None], nrm, -nrm)
    return (np.concatenate(owners), np.vstack(cs).reshape(-1, 2), np.concatenate(rs),
            hp_owner, nrm, nrm[:, 0] * a[:, 0] + nrm[:, 1] * a[:, 1])
