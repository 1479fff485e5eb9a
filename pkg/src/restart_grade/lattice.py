"""Points, neighbours and finite domains for simple random walk on Z^d."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainTooSmallError, OutOfTableError

MAX_DIM = 8


class LatticePoint(tuple):
    """Immutable integer vector in Z^d (1 <= d <= 8).

    Behaves as a plain tuple of ints, so it hashes, compares and indexes
    like one; ``LatticePoint((1, 0)) == (1, 0)``.
    """

    __slots__ = ()

    def __new__(cls, coords):
        coords = tuple(int(c) for c in coords)
        if not 1 <= len(coords) <= MAX_DIM:
            raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {len(coords)}")
        return super().__new__(cls, coords)

    @classmethod
    def origin(cls, d):
        return cls((0,) * d)

    @property
    def d(self):
        return len(self)

    @property
    def norm(self):
        return norm(self)

    def __add__(self, other):
        return LatticePoint(a + b for a, b in zip(self, other, strict=True))

    def __sub__(self, other):
        return LatticePoint(a - b for a, b in zip(self, other, strict=True))

    def __repr__(self):
        return f"LatticePoint({tuple(self)!r})"


def as_point(x, d=None):
    """Coerce an int, sequence or ``LatticePoint`` to a ``LatticePoint``."""
    if isinstance(x, (int, np.integer)):
        x = (int(x),)
    p = x if isinstance(x, LatticePoint) else LatticePoint(x)
    if d is not None and p.d != d:
        raise ValueError(f"expected a point in Z^{d}, got {tuple(p)}")
    return p


def unit_offsets(d):
    """The 2d unit steps in canonical order: +e_0, -e_0, +e_1, -e_1, ..."""
    out = []
    for k in range(d):
        for sign in (1, -1):
            e = [0] * d
            e[k] = sign
            out.append(tuple(e))
    return out


def neighbors(x):
    """Return the 2d lattice neighbours of ``x`` (axis +, axis -, by axis)."""
    x = as_point(x)
    return [LatticePoint(a + b for a, b in zip(x, e)) for e in unit_offsets(x.d)]


def norm(x):
    return math.sqrt(sum(int(c) * int(c) for c in x))


@dataclass(frozen=True)
class Domain:
    """A finite connected subset of Z^d: a box ``max|x_i| <= radius`` or a
    Euclidean disk ``|x| <= radius``."""

    d: int
    kind: str
    radius: float
    _points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("box", "disk"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not 1 <= self.d <= MAX_DIM:
            raise ValueError(f"dimension must be in [1, {MAX_DIM}]")
        r = self.extent
        axes = [np.arange(-r, r + 1)] * self.d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.d)
        object.__setattr__(self, "_points", grid[self._contains_array(grid)])

    @property
    def extent(self):
        """Half-width of the smallest integer box holding the domain."""
        return int(math.floor(self.radius))

    def _contains_array(self, pts):
        pts = np.asarray(pts, dtype=np.int64)
        if self.kind == "box":
            return np.all(np.abs(pts) <= self.radius, axis=-1)
        return np.sum(pts * pts, axis=-1) <= self.radius * self.radius

    def contains(self, x):
        return bool(self._contains_array(np.asarray(tuple(x)))[()])

    __contains__ = contains

    def points(self):
        """All points as an ``(N, d)`` int64 array in lexicographic order."""
        return self._points.copy()

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return (LatticePoint(p) for p in self._points)


def disk_points(R, d=2):
    """Enumerate ``{x in Z^d : |x| <= R}``."""
    if R < 1:
        raise DomainTooSmallError(f"disk radius must be >= 1, got {R}")
    return Domain(d, "disk", float(R))


def box_points(L, d):
    if L < 1:
        raise DomainTooSmallError(f"box radius must be >= 1, got {L}")
    return Domain(d, "box", int(L))


class LatticeField:
    """A real function on the box ``[-L, L]^d`` stored as a dense array.

    ``field[x]`` looks up a point; points outside the box raise
    ``OutOfTableError``.  Entries may be NaN where the function is undefined
    (e.g. outside a disk).
    """

    def __init__(self, values, L):
        values = np.asarray(values, dtype=float)
        if any(n != 2 * L + 1 for n in values.shape):
            raise ValueError("values must have shape (2L+1,)*d")
        self.values = values
        self.L = int(L)

    @property
    def d(self):
        return self.values.ndim

    @classmethod
    def from_function(cls, func, L, d):
        pts = box_points(L, d).points()
        vals = np.array([func(tuple(p)) for p in pts], dtype=float)
        return cls(vals.reshape((2 * L + 1,) * d), L)

    def inside(self, x):
        return all(abs(int(c)) <= self.L for c in x)

    def index(self, x):
        if len(x) != self.d or not self.inside(x):
            raise OutOfTableError(f"point {tuple(x)} outside table of radius {self.L}")
        return tuple(int(c) + self.L for c in x)

    def __getitem__(self, x):
        return float(self.values[self.index(x)])

    def get(self, x, default=None):
        try:
            return self[x]
        except OutOfTableError:
            return default

    def coords(self):
        """Coordinates of every entry, shape ``values.shape + (d,)``."""
        axes = [np.arange(-self.L, self.L + 1)] * self.d
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def norms(self):
        c = self.coords()
        return np.sqrt(np.sum(c.astype(float) ** 2, axis=-1))

    def items(self):
        for idx in itertools.product(range(2 * self.L + 1), repeat=self.d):
            yield LatticePoint(i - self.L for i in idx), float(self.values[idx])

    def __len__(self):
        return self.values.size
