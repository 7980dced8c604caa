"""Lattice cells, cell templates and pseudo-periodic configurations."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import TemplateDoesNotFitCell
from .primitives import Configuration, Window

RHO0_2D = math.sqrt(3.0) / 6.0

# lattice offsets of the six Delaunay neighbours in the triangular lattice
TRIANGULAR_OFFSETS = ((-1, 0), (-1, 1), (0, 1), (1, 0), (1, -1), (0, -1))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


class LatticeSpec:
    """Cells ``C(k) = {M x : x - k in [-1/2, 1/2)^d}`` for an invertible ``M``."""

    __slots__ = ("M", "_inv")

    def __init__(self, M):
        m = np.array(M, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("M must be square")
        if abs(np.linalg.det(m)) == 0.0:
            raise ValueError("M must be invertible")
        m.flags.writeable = False
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "_inv", np.linalg.inv(m))

    def __setattr__(self, name, value):
        raise AttributeError("LatticeSpec is immutable")

    @classmethod
    def triangular(cls, a: float = 1.0) -> "LatticeSpec":
        """Columns of length ``a`` at angle pi/3."""
        return cls([[a, 0.5 * a], [0.0, 0.5 * math.sqrt(3.0) * a]])

    @classmethod
    def cubic(cls, a: float = 1.0, d: int = 2) -> "LatticeSpec":
        return cls(a * np.eye(d))

    @property
    def d(self) -> int:
        return self.M.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(abs(np.linalg.det(self.M)))

    @property
    def inner_diameter(self) -> float:
        """Diameter of the largest ball inside a cell."""
        return float(1.0 / np.linalg.norm(self._inv, axis=1).max())

    @property
    def outer_diameter(self) -> float:
        """Diameter of the smallest ball containing a cell."""
        s = np.array(list(itertools.product((-0.5, 0.5), repeat=self.d)))
        return float(2.0 * np.linalg.norm(s @ self.M.T, axis=1).max())

    def center(self, k) -> np.ndarray:
        return np.asarray(k, dtype=np.float64) @ self.M.T

    def cell_of(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64).reshape(-1, self.d)
        return np.floor(p @ self._inv.T + 0.5).astype(np.int64)

    def cell_window(self, k) -> Window:
        k = np.asarray(k, dtype=np.float64)
        return Window((k - 0.5) @ self.M.T, self.M.T)

    def box(self, n: int, k=None) -> Window:
        """``Lambda_n``: the union of cells ``C(k + j)`` with ``|j|_inf <= n``."""
        k = np.zeros(self.d) if k is None else np.asarray(k, dtype=np.float64)
        return Window((k - n - 0.5) @ self.M.T, (2 * n + 1) * self.M.T)

    def cells_meeting(self, region: Window) -> np.ndarray:
        u = region.vertices() @ self._inv.T
        lo = np.floor(u.min(axis=0) + 0.5).astype(int)
        hi = np.floor(u.max(axis=0) + 0.5).astype(int)
        ks = np.array(list(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])))
        centers = ks @ self.M.T
        near = region.distance(centers) <= 0.5 * self.outer_diameter
        return ks[near]

    def __eq__(self, other):
        return isinstance(other, LatticeSpec) and np.array_equal(self.M, other.M)

    def __hash__(self):
        return hash(self.M.tobytes())

    def __repr__(self):
        return f"LatticeSpec({self.M.tolist()})"


@dataclass(frozen=True)
class SingletonBall:
    """One point in ``B(0, b)``."""

    b: float

    def check(self, lattice: LatticeSpec):
        if not 0.0 < self.b or 2.0 * self.b > lattice.inner_diameter * (1 + 1e-12):
            raise TemplateDoesNotFitCell(f"B(0,{self.b}) does not fit the cell")

    def draw(self, lattice: LatticeSpec, rng) -> np.ndarray:
        d = lattice.d
        if rng is None:
            return np.zeros((1, d))
        return _uniform_ball(rng, 1, d, self.b)


@dataclass(frozen=True)
class ClusterTemplate:
    """``k+1`` points: ``x0 in B(0, b)`` and ``k`` more in ``B(x0, delta/2)``."""

    k: int
    b: float
    delta: float

    def check(self, lattice: LatticeSpec):
        if self.k < 1 or self.b <= 0 or self.delta <= 0:
            raise TemplateDoesNotFitCell("invalid cluster template")
        if 2.0 * (self.b + 0.5 * self.delta) > lattice.inner_diameter * (1 + 1e-12):
            raise TemplateDoesNotFitCell("cluster template does not fit the cell")

    def draw(self, lattice: LatticeSpec, rng) -> np.ndarray:
        d = lattice.d
        if rng is None:
            x0 = np.zeros(d)
            ang = 2.0 * math.pi * np.arange(self.k) / self.k
            if d == 2:
                ring = 0.25 * self.delta * np.column_stack([np.cos(ang), np.sin(ang)])
            else:
                ring = np.zeros((self.k, d))
                for j in range(self.k):
                    ring[j, j % d] = 0.25 * self.delta * (1 + j // d) / (1 + (self.k - 1) // d)
            return np.vstack([x0, x0 + ring])
        x0 = _uniform_ball(rng, 1, d, self.b)
        return np.vstack([x0, x0 + _uniform_ball(rng, self.k, d, 0.5 * self.delta)])


@dataclass(frozen=True)
class Explicit:
    """A fixed finite configuration, in coordinates relative to the cell center."""

    points: tuple = field(default=())

    def check(self, lattice: LatticeSpec):
        if len(self.points) == 0:
            raise TemplateDoesNotFitCell("template must not be empty")
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, lattice.d)
        u = p @ np.linalg.inv(lattice.M).T
        if np.any(u < -0.5) or np.any(u >= 0.5):
            raise TemplateDoesNotFitCell("explicit template leaves the cell")

    def draw(self, lattice: LatticeSpec, rng) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64).reshape(-1, lattice.d)


def _uniform_ball(rng, n, d, r):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (r * rng.random((n, 1)) ** (1.0 / d))


def pseudo_periodic(lattice: LatticeSpec, template, region: Window, rng=None) -> Configuration:
    """Fill every cell meeting ``region`` with a template configuration.

    ``rng=None`` gives the canonical fill (reference point at each cell
    center); a generator gives independent draws per cell.
    """
    template.check(lattice)
    ks = lattice.cells_meeting(region)
    if len(ks) == 0:
        return Configuration(np.zeros((0, lattice.d)))
    blocks = [lattice.center(k) + template.draw(lattice, rng) for k in ks]
    return Configuration(np.vstack(blocks))


def fill_outside(lattice: LatticeSpec, template, window: Window, extent: float, rng=None):
    """Pseudo-periodic fill of ``window`` enlarged by ``extent``, split at the window.

    Returns ``(inside, outside)`` configurations.
    """
    lo = window.lo - extent
    hi = window.hi + extent
    full = pseudo_periodic(lattice, template, Window.box(lo, hi), rng)
    mask = window.contains(full.points)
    return (Configuration(full.points[mask], window), Configuration(full.points[~mask]))
