"""Nonnegative functions sampled on uniform cubical grids in R^n (n = 1, 2)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGridError, UnsupportedDimension


def _normalize_box(n, box):
    box = np.asarray(box, dtype=float)
    if box.shape == (2,) and n == 1:
        box = box.reshape(1, 2)
    if box.shape != (n, 2):
        raise InvalidGridError(f"box must give (lo, hi) for each of the {n} axes")
    if np.any(box[:, 1] <= box[:, 0]):
        raise InvalidGridError("box is degenerate")
    return box


def _normalize_cells(n, cells):
    cells = (int(cells),) * n if np.isscalar(cells) else tuple(int(c) for c in cells)
    if len(cells) != n or min(cells) < 1:
        raise InvalidGridError("need a positive cell count per axis")
    return cells


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell-centre samples of a nonnegative function on an axis-aligned box.

    ``values`` has shape ``cells`` (row-major, first axis = x_1).
    """

    n: int
    lo: np.ndarray
    hi: np.ndarray
    cells: tuple
    values: np.ndarray

    @classmethod
    def from_values(cls, n, box, values, clamp=True):
        if n not in (1, 2):
            raise UnsupportedDimension("grid functions support n = 1, 2")
        box = _normalize_box(n, box)
        values = np.array(values, dtype=float)
        cells = _normalize_cells(n, values.shape if values.ndim == n else values.size)
        values = values.reshape(cells)
        widths = (box[:, 1] - box[:, 0]) / np.array(cells)
        if not np.allclose(widths, widths[0], rtol=1e-12, atol=0.0):
            raise InvalidGridError(f"cells are not cubical: sizes {widths.tolist()}")
        if clamp:
            values = np.where(values > 0, values, 0.0)
        elif np.any(values < 0):
            raise ValueError("grid function values must be nonnegative")
        values.setflags(write=False)
        return cls(n, box[:, 0].copy(), box[:, 1].copy(), cells, values)

    @property
    def h(self) -> float:
        return float((self.hi[0] - self.lo[0]) / self.cells[0])

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def box(self):
        return [(float(a), float(b)) for a, b in zip(self.lo, self.hi)]

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.cells[axis]) + 0.5) * self.h

    @cached_property
    def centers(self) -> np.ndarray:
        """Cell centres, shape (N, n), row-major order."""
        axes = np.meshgrid(*[self.axis_centers(i) for i in range(self.n)], indexing="ij")
        c = np.stack([a.ravel() for a in axes], axis=1)
        c.setflags(write=False)
        return c

    def mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def superlevel_measure(self, lam: float) -> float:
        if lam <= 0:
            raise ValueError("level must be positive")
        return float(np.count_nonzero(self.values > lam) * self.cell_volume)

    def support_radius(self) -> float:
        """Largest |y| over centres of cells where f > 0 (0 for the zero function)."""
        nz = self.values.ravel() > 0
        if not nz.any():
            return 0.0
        return float(np.linalg.norm(self.centers[nz], axis=1).max())

    def locate(self, x) -> np.ndarray:
        """Flat index of the cell containing each point of x (shape (P, n)), -1 if outside."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        idx = np.floor((x - self.lo) / self.h).astype(np.int64)
        cells = np.array(self.cells)
        inside = np.all((idx >= 0) & (idx < cells), axis=1)
        idx = np.clip(idx, 0, cells - 1)
        flat = np.ravel_multi_index(tuple(idx.T), self.cells)
        return np.where(inside, flat, -1)

    def with_values(self, values) -> "GridFunction":
        return GridFunction.from_values(self.n, self.box, values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.cells != self.cells or not np.allclose(other.lo, self.lo) or not np.allclose(other.hi, self.hi):
            raise InvalidGridError("grid functions live on different grids")
        return self.with_values(self.values + other.values)

    def scaled(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    def shifted(self, offset) -> "GridFunction":
        off = np.broadcast_to(np.asarray(offset, dtype=float), (self.n,))
        box = [(a + o, b + o) for (a, b), o in zip(self.box, off)]
        return GridFunction.from_values(self.n, box, self.values)


def make_grid(n, box, cells, sampler) -> GridFunction:
    """Sample ``sampler`` (points of shape (N, n) -> values (N,)) at cell centres.

    Negative samples are clamped to zero.
    """
    if n not in (1, 2):
        raise UnsupportedDimension("grid functions support n = 1, 2")
    box = _normalize_box(n, box)
    cells = _normalize_cells(n, cells)
    h = (box[:, 1] - box[:, 0]) / np.array(cells)
    if not np.allclose(h, h[0], rtol=1e-12, atol=0.0):
        raise InvalidGridError(f"cells are not cubical: sizes {h.tolist()}")
    axes = [box[i, 0] + (np.arange(cells[i]) + 0.5) * h[i] for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.asarray(sampler(pts), dtype=float).reshape(cells)
    return GridFunction.from_values(n, box, vals)


def mass(f: GridFunction) -> float:
    return f.mass()


def superlevel_measure(f: GridFunction, lam: float) -> float:
    return f.superlevel_measure(lam)


@dataclass(frozen=True, order=True)
class DyadicCube:
    """A cube spanning 2**level grid cells per axis.

    ``corner`` is the integer lattice position in units of the cube's own
    side, measured from the dyadic origin (the lower corner of the grid box).
    With cell size h the side is h * 2**level; when h is a power of two the
    generation s = log2(h) + level gives side 2**s.
    """

    level: int
    corner: tuple

    def side(self, h: float) -> float:
        return h * 2.0**self.level

    def generation(self, h: float):
        s = np.log2(h) + self.level
        return int(round(s)) if abs(s - round(s)) < 1e-12 else float(s)

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level + 1, tuple(c // 2 for c in self.corner))

    def children(self) -> list["DyadicCube"]:
        n = len(self.corner)
        out = []
        for bits in range(2**n):
            off = [(bits >> i) & 1 for i in range(n)]
            out.append(DyadicCube(self.level - 1, tuple(2 * c + o for c, o in zip(self.corner, off))))
        return out

    def cell_slices(self) -> tuple:
        w = 2**self.level
        return tuple(slice(c * w, (c + 1) * w) for c in self.corner)

    def contains(self, other: "DyadicCube") -> bool:
        if other.level > self.level:
            return False
        shift = self.level - other.level
        return all((c >> shift) == s for c, s in zip(other.corner, self.corner))

    def disjoint(self, other: "DyadicCube") -> bool:
        return not (self.contains(other) or other.contains(self))
