"""Windows, configurations and circumballs."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from ..errors import Degenerate, PointNotInConfiguration
from ..kernels import orient2d


def _exact_det(rows) -> Fraction:
    m = [[Fraction(v) for v in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for k in range(c, n):
                m[r][k] -= f * m[c][k]
    return det


class Window:
    """Closed parallelotope ``origin + sum_i t_i vectors[i]`` with ``t in [0,1]^d``."""

    __slots__ = ("origin", "vectors", "_inv", "is_box", "_verts", "_lo", "_hi")

    def __init__(self, origin, vectors):
        o = np.array(origin, dtype=np.float64).reshape(-1)
        v = np.array(vectors, dtype=np.float64).reshape(len(o), len(o))
        if not (np.all(np.isfinite(o)) and np.all(np.isfinite(v))):
            raise ValueError("window must be finite")
        if _exact_det(v.tolist()) == 0:
            raise ValueError("window vectors are linearly dependent")
        diag = np.diag(np.diag(v))
        is_box = bool(np.array_equal(v, diag) and np.all(np.diag(v) > 0))
        o.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "_inv", np.linalg.inv(v))
        object.__setattr__(self, "is_box", is_box)
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=len(o))))
        verts = o + corners @ v
        verts.flags.writeable = False
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "_verts", verts)
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Window is immutable")

    @classmethod
    def box(cls, lo, hi) -> "Window":
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if np.any(hi <= lo):
            raise ValueError("box must have positive side lengths")
        return cls(lo, np.diag(hi - lo))

    @classmethod
    def square(cls, side: float, origin=(0.0, 0.0)) -> "Window":
        origin = np.asarray(origin, dtype=np.float64)
        return cls.box(origin, origin + side)

    @property
    def d(self) -> int:
        return len(self.origin)

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.vectors)))

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    @property
    def center(self) -> np.ndarray:
        return self.origin + 0.5 * self.vectors.sum(axis=0)

    @property
    def diameter(self) -> float:
        v = self.vertices()
        return float(np.sqrt(((v[:, None, :] - v[None, :, :]) ** 2).sum(-1).max()))

    def vertices(self) -> np.ndarray:
        return self._verts

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64).reshape(-1, self.d)
        if self.is_box:
            hi = self._hi
            return np.all((p >= self.origin) & (p <= hi), axis=1)
        u = (p - self.origin) @ self._inv
        return np.all((u >= 0.0) & (u <= 1.0), axis=1)

    def support(self, normals) -> np.ndarray:
        """max over the window of ``n . y`` for each row ``n``."""
        n = np.asarray(normals, dtype=np.float64).reshape(-1, self.d)
        return (n @ self.vertices().T).max(axis=1)

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the window (0 inside)."""
        p = np.asarray(points, dtype=np.float64).reshape(-1, self.d)
        if self.is_box:
            hi = self._hi
            gap = np.maximum(np.maximum(self.origin - p, 0.0), p - hi)
            return np.sqrt((gap * gap).sum(axis=1))
        if self.d == 2:
            inside = self.contains(p)
            v = self.vertices()[[0, 1, 3, 2]]
            best = np.full(len(p), np.inf)
            for j in range(4):
                a, b = v[j], v[(j + 1) % 4]
                ab = b - a
                t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
                q = a + t[:, None] * ab
                best = np.minimum(best, np.sqrt(((p - q) ** 2).sum(axis=1)))
            best[inside] = 0.0
            return best
        from scipy.optimize import lsq_linear

        out = np.empty(len(p))
        for i, x in enumerate(p):
            res = lsq_linear(self.vectors.T, x - self.origin, bounds=(0.0, 1.0))
            out[i] = np.linalg.norm(self.vectors.T @ res.x - (x - self.origin))
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.origin + rng.random((n, self.d)) @ self.vectors

    def translated(self, x) -> "Window":
        return Window(self.origin + np.asarray(x, dtype=np.float64), self.vectors)

    def scaled(self, r: float) -> "Window":
        return Window(r * self.origin, r * self.vectors)

    def to_lattice_coords(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64).reshape(-1, self.d)
        return (p - self.origin) @ self._inv

    def __eq__(self, other):
        return (isinstance(other, Window) and np.array_equal(self.origin, other.origin)
                and np.array_equal(self.vectors, other.vectors))

    def __hash__(self):
        return hash((self.origin.tobytes(), self.vectors.tobytes()))

    def __repr__(self):
        if self.is_box:
            return f"Window.box({self.origin.tolist()}, {self.hi.tolist()})"
        return f"Window({self.origin.tolist()}, {self.vectors.tolist()})"


class Configuration:
    """Finite set of distinct points, optionally tagged with the window it lives in."""

    __slots__ = ("points", "window")

    def __init__(self, points=(), window: Window | None = None, d: int | None = None):
        if d is None:
            d = window.d if window is not None else 2
        arr = np.array(points, dtype=np.float64)
        if arr.size == 0:
            arr = np.zeros((0, d))
        else:
            arr = arr.reshape(len(arr), -1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        if len(arr) > 1 and len(np.unique(arr, axis=0)) != len(arr):
            raise ValueError("duplicate points in configuration")
        arr.flags.writeable = False
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "window", window)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return (tuple(p) for p in self.points.tolist())

    def __repr__(self):
        return f"Configuration(n={len(self)}, d={self.d})"

    def __eq__(self, other):
        if not isinstance(other, Configuration) or other.d != self.d:
            return False
        if len(self) != len(other):
            return False
        return set(self) == set(other)

    def __hash__(self):
        return hash(frozenset(self))

    def index_of(self, x) -> int:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        hits = np.flatnonzero(np.all(self.points == x, axis=1))
        if len(hits) == 0:
            raise PointNotInConfiguration(tuple(x))
        return int(hits[0])

    def restrict(self, window: Window, inside: bool = True) -> "Configuration":
        mask = window.contains(self.points) if len(self) else np.zeros(0, bool)
        if not inside:
            mask = ~mask
        return Configuration(self.points[mask], window if inside else None, d=self.d)

    def union(self, other: "Configuration") -> "Configuration":
        return Configuration(np.vstack([self.points, other.points]), d=self.d)

    def translated(self, x) -> "Configuration":
        w = self.window.translated(x) if self.window is not None else None
        return Configuration(self.points + np.asarray(x, dtype=np.float64), w, d=self.d)

    def scaled(self, r: float) -> "Configuration":
        w = self.window.scaled(r) if self.window is not None else None
        return Configuration(self.points * r, w, d=self.d)


def as_points(config) -> np.ndarray:
    if isinstance(config, Configuration):
        return config.points
    return np.asarray(config, dtype=np.float64)


def circumball(simplex):
    """Center and radius of the sphere through ``d+1`` points in ``R^d``."""
    p = np.asarray(simplex, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1] + 1:
        raise ValueError("simplex needs d+1 points in R^d")
    d = p.shape[1]
    if d == 2:
        if orient2d(*p[0], *p[1], *p[2]) == 0:
            raise Degenerate("collinear points")
    else:
        if _exact_det((p[1:] - p[0]).tolist()) == 0:
            raise Degenerate("affinely dependent points")
    a = 2.0 * (p[1:] - p[0])
    rhs = (p[1:] ** 2).sum(axis=1) - (p[0] ** 2).sum()
    center = np.linalg.solve(a, rhs)
    radius = float(np.sqrt(((p - center) ** 2).sum(axis=1)).max())
    return center, radius
