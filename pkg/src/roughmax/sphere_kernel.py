"""Kernels on the unit sphere S^{n-1} and their quadrature functionals.

A kernel is a function of homogeneous degree zero, so it is stored by its
restriction to the sphere.  Norms are computed by quadrature on a
:class:`SphereGrid`; the grids for n = 1, 2 are exact for the counting
measure and for trigonometric polynomials of low degree, and the n = 3 grid
is an equal-area latitude-band partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateKernelError,
    DimensionMismatch,
    InvalidGridError,
    UnsupportedDimension,
)

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes and weights on S^{n-1}."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    uniform_circle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "weights", _readonly(self.weights))

    def __len__(self):
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def angles(self) -> np.ndarray:
        if self.n != 2:
            raise UnsupportedDimension("angles are only defined on S^1")
        return np.arctan2(self.nodes[:, 1], self.nodes[:, 0])

    @cached_property
    def antipodes(self) -> np.ndarray:
        """Index map i -> j with nodes[j] == -nodes[i]."""
        dist, idx = cKDTree(self.nodes).query(-self.nodes)
        if np.any(dist > 1e-9):
            raise InvalidGridError("grid is not symmetric under theta -> -theta")
        return idx


def make_sphere_grid(n: int, resolution: int = 4096) -> SphereGrid:
    """Build a quadrature grid on S^{n-1}.

    n=1 gives the two atoms {+1, -1} with unit weights (counting measure).
    n=2 gives ``resolution`` equally spaced angles offset by half a step, so
    that no node sits at angle 0.  n=3 gives equal-area latitude bands with
    an even number of nodes per band; the grid is antipodally symmetric.
    """
    if n == 1:
        return SphereGrid(1, [[1.0], [-1.0]], [1.0, 1.0])
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if n == 2:
        theta = (np.arange(resolution) + 0.5) * (2.0 * math.pi / resolution)
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(resolution, 2.0 * math.pi / resolution)
        return SphereGrid(2, nodes, weights, uniform_circle=True)
    if n == 3:
        return _band_grid(resolution)
    raise UnsupportedDimension(f"unsupported sphere dimension n={n}")


def _band_grid(resolution: int) -> SphereGrid:
    bands = max(2, 2 * round(math.sqrt(math.pi * resolution / 4.0) / 2.0))
    z_edges = np.linspace(-1.0, 1.0, bands + 1)
    z_mid = 0.5 * (z_edges[:-1] + z_edges[1:])
    ring = np.sqrt(1.0 - z_mid**2)
    per_band = np.maximum(2, 2 * np.round(resolution * ring / ring.sum() / 2.0)).astype(int)
    band_area = 4.0 * math.pi / bands
    nodes, weights = [], []
    for z, r, m in zip(z_mid, ring, per_band):
        phi = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
        nodes.append(np.column_stack([r * np.cos(phi), r * np.sin(phi), np.full(m, z)]))
        weights.append(np.full(m, band_area / m))
    nodes = np.concatenate(nodes)
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    return SphereGrid(3, nodes, np.concatenate(weights))


@dataclass(frozen=True, eq=False)
class Kernel:
    """A homogeneous-degree-zero function, given by its values on the sphere.

    ``func`` maps an array of unit vectors of shape (..., n) to values of
    shape (...).  Unless ``signed`` is set, values are passed through
    ``abs`` so every kernel is nonnegative.
    """

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    signed: bool = False
    constant: float | None = None
    grid: SphereGrid | None = field(default=None, repr=False)
    table: np.ndarray | None = field(default=None, repr=False)

    def on_directions(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.n:
            raise DimensionMismatch(f"kernel has n={self.n}, directions have n={u.shape[-1]}")
        if self.constant is not None:
            return np.full(u.shape[:-1], abs(self.constant) if not self.signed else self.constant)
        vals = np.asarray(self.func(u), dtype=float)
        return vals if self.signed else np.abs(vals)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(r == 0):
            raise ValueError("kernel is undefined at the origin")
        return self.on_directions(x / r)

    def sample(self, g: SphereGrid) -> np.ndarray:
        """Values at the nodes of ``g`` (exact table lookup when tied to ``g``)."""
        if g.n != self.n:
            raise DimensionMismatch(f"kernel has n={self.n}, grid has n={g.n}")
        if self.grid is g:
            return self.table
        return self.on_directions(g.nodes)

    def scaled(self, c: float) -> "Kernel":
        if self.table is not None:
            return tabulated(self.grid, c * self.table, signed=self.signed, name=f"{c}*{self.name}")
        if self.constant is not None:
            return constant_kernel(self.n, c * self.constant)
        func = self.func
        return Kernel(self.n, lambda u: c * func(u), name=f"{c}*{self.name}", signed=self.signed)

    def __add__(self, other: "Kernel") -> "Kernel":
        if other.n != self.n:
            raise DimensionMismatch("cannot add kernels of different dimension")
        if self.table is not None and other.grid is self.grid:
            return tabulated(self.grid, self.table + other.table, signed=self.signed or other.signed)
        a, b = self, other
        return Kernel(self.n, lambda u: a.on_directions(u) + b.on_directions(u),
                      name=f"{a.name}+{b.name}", signed=a.signed or b.signed)


def constant_kernel(n: int, c: float = 1.0) -> Kernel:
    return Kernel(n, lambda u: np.full(u.shape[:-1], float(c)), name=f"const:{c}", constant=float(c))


def tabulated(g: SphereGrid, values, signed: bool = False, name: str = "table") -> Kernel:
    """Kernel given by per-node samples on ``g``.

    Off-node evaluation: exact on S^0, periodic linear interpolation on a
    uniform circle grid, nearest node otherwise.
    """
    values = np.array(values, dtype=float)
    if values.shape != (len(g),):
        raise DimensionMismatch("table length does not match grid")
    if not signed:
        values = np.abs(values)
    values.setflags(write=False)

    if g.n == 1:
        def func(u):
            return np.where(u[..., 0] >= 0, values[0], values[1])
    elif g.n == 2 and g.uniform_circle:
        step = 2.0 * math.pi / len(g)

        def func(u):
            t = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2.0 * math.pi) / step - 0.5
            i0 = np.floor(t).astype(int)
            frac = t - i0
            i0 %= len(values)
            return (1.0 - frac) * values[i0] + frac * values[(i0 + 1) % len(values)]
    else:
        tree = cKDTree(g.nodes)

        def func(u):
            _, idx = tree.query(u.reshape(-1, g.n))
            return values[idx].reshape(u.shape[:-1])

    return Kernel(g.n, func, name=name, signed=signed, grid=g, table=values)


def _check(k: Kernel, g: SphereGrid):
    if k.n != g.n:
        raise DimensionMismatch(f"kernel has n={k.n}, grid has n={g.n}")


def l1_norm(k: Kernel, g: SphereGrid) -> float:
    _check(k, g)
    return float(np.dot(g.weights, np.abs(k.sample(g))))


def llogl_norm(k: Kernel, g: SphereGrid) -> float:
    _check(k, g)
    v = np.abs(k.sample(g))
    return float(np.dot(g.weights, v * np.log(math.e + v)))


def _log_plus(t):
    with np.errstate(divide="ignore"):
        return np.where(t > 1.0, np.log(np.where(t > 0, t, 1.0)), 0.0)


def c_omega(k: Kernel, g: SphereGrid) -> float:
    """Weak-type constant ||k||_{LlogL} + int |k| (1 + log+(|k| / ||k||_1)) dsigma."""
    _check(k, g)
    v = np.abs(k.sample(g))
    l1 = float(np.dot(g.weights, v))
    if l1 <= 0.0:
        raise DegenerateKernelError("kernel has zero L1 norm")
    llogl = float(np.dot(g.weights, v * np.log(math.e + v)))
    return llogl + float(np.dot(g.weights, v * (1.0 + _log_plus(v / l1))))


def rotation_profile(k: Kernel, g: SphereGrid):
    """Chord lengths ||rho|| and L1 rotation differences for every grid rotation.

    Returns ``(chords, diffs)`` sorted by chord.  On S^1 rotations by
    multiples of the grid step are exact index shifts; on S^0 the only
    rotations are the identity (chord 0) and the reflection (chord 2).
    """
    _check(k, g)
    v = k.sample(g)
    if g.n == 1:
        return np.array([0.0, 2.0]), np.array([0.0, float(np.dot(g.weights, np.abs(v[::-1] - v)))])
    if g.n != 2:
        raise UnsupportedDimension("Dini modulus is only implemented for n = 1, 2")
    if not g.uniform_circle:
        raise InvalidGridError("Dini modulus needs a uniform circle grid")
    N = len(g)
    shifts = np.arange(N // 2 + 1)
    chords = 2.0 * np.sin(shifts * math.pi / N)
    w = g.weights[0]
    diffs = np.array([w * np.abs(np.roll(v, -s) - v).sum() for s in shifts])
    return chords, diffs


def dini_modulus(k: Kernel, g: SphereGrid, delta: float) -> float:
    if not 0.0 < delta <= 2.0:
        raise ValueError("delta must lie in (0, 2]")
    chords, diffs = rotation_profile(k, g)
    admissible = chords <= delta * (1.0 + 1e-12)
    return float(diffs[admissible].max())


def dini_integral_estimate(k: Kernel, g: SphereGrid, delta_min: float) -> float:
    """int_{delta_min}^1 omega(delta) / delta  d delta for the sampled modulus.

    The sampled modulus is a nondecreasing step function of delta, so the
    integral in the variable log(delta) is summed exactly piece by piece.
    """
    if not 0.0 < delta_min < 1.0:
        raise ValueError("delta_min must lie in (0, 1)")
    chords, diffs = rotation_profile(k, g)
    omega = np.maximum.accumulate(diffs)
    inside = (chords > delta_min) & (chords < 1.0)
    pts = np.concatenate([[delta_min], chords[inside], [1.0]])
    # value on [pts[i], pts[i+1]) is omega at the largest chord <= pts[i]
    idx = np.searchsorted(chords, pts[:-1] * (1.0 + 1e-12), side="right") - 1
    return float(np.sum(omega[idx] * np.log(pts[1:] / pts[:-1])))


def continuity_radius(k: Kernel, g: SphereGrid, eps: float) -> float:
    """Largest sampled angular gap d with sup |k(a) - k(b)| < eps whenever angle(a, b) <= d."""
    _check(k, g)
    if g.n != 2 or not g.uniform_circle:
        raise UnsupportedDimension("continuity radius needs a uniform circle grid")
    v = k.sample(g)
    N = len(g)
    osc = np.maximum.accumulate(
        np.array([np.abs(np.roll(v, -s) - v).max() for s in range(1, N // 2 + 1)])
    )
    ok = np.nonzero(osc < eps)[0]
    if len(ok) == 0:
        return 0.0
    # contiguous prefix of admissible gaps; osc is nondecreasing
    return float((ok[-1] + 1) * 2.0 * math.pi / N)


@dataclass(frozen=True, eq=False)
class KernelSplit:
    tau: float
    big: Kernel
    small: Kernel
    small_even: Kernel
    small_odd: Kernel


def level_set_split(k: Kernel, g: SphereGrid, tau: float) -> KernelSplit:
    """Split k into the part on {k >= tau} and the part on {k < tau}."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    _check(k, g)
    v = k.sample(g)
    hi = v >= tau
    big = tabulated(g, np.where(hi, v, 0.0), name=f"{k.name}|>={tau}")
    small = tabulated(g, np.where(hi, 0.0, v), name=f"{k.name}|<{tau}")
    even, odd = parity_split(small, g)
    return KernelSplit(float(tau), big, small, even, odd)


def parity_split(k: Kernel, g: SphereGrid) -> tuple[Kernel, Kernel]:
    """Even and odd parts (k(x) +- k(-x)) / 2; the odd part is signed."""
    _check(k, g)
    ant = g.antipodes
    v = k.sample(g)
    even = 0.5 * (v + v[ant])
    odd = 0.5 * (v - v[ant])
    return (tabulated(g, even, name=f"even({k.name})"),
            tabulated(g, odd, signed=True, name=f"odd({k.name})"))
