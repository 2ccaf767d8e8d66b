"""Distribution functions of M_Omega f and their small-level limits.

Near the origin the maximal field is computed on a grid; beyond a radius R
the level set is taken from the homogeneous far-field model
||f||_1 Omega(x) |x|^{-n}, whose superlevel sets have closed-form measure
in polar coordinates.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SupportViolation, UnsupportedDimension
from .grid_field import GridFunction, make_grid
from .maximal_op import EXACT, RadiusPolicy, eval_maximal, eval_maximal_at, maximal_field
from .sphere_kernel import Kernel, SphereGrid, continuity_radius, l1_norm, make_sphere_grid


def _sphere(n, sphere):
    return sphere if sphere is not None else make_sphere_grid(n, 4096)


def far_field_value(k: Kernel, m: float, x):
    """m Omega(x/|x|) / |x|^n; x may be a single point or an array of shape (P, n)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("far-field value is undefined at x = 0")
    val = m * k(x) / r**k.n
    return float(val) if np.ndim(val) == 0 else val


def homogeneous_superlevel_measure(k: Kernel, g: SphereGrid, lam: float) -> float:
    """|{x : Omega(x/|x|) / |x|^n > lam}| = ||Omega||_1 / (n lam)."""
    if lam <= 0:
        raise ValueError("level must be positive")
    return l1_norm(k, g) / (g.n * lam)


def tail_superlevel_measure(k: Kernel, g: SphereGrid, m: float, lam: float, R: float) -> float:
    """|{|x| > R : m Omega(x/|x|) / |x|^n > lam}| by polar integration on g."""
    if lam <= 0:
        raise ValueError("level must be positive")
    if R < 0:
        raise ValueError("R must be >= 0")
    n = g.n
    v = m * np.abs(k.sample(g)) / lam
    return float(np.dot(g.weights, np.maximum(0.0, v - R**n))) / n


@dataclass
class DistributionCurve:
    lambdas: np.ndarray
    near: np.ndarray
    tail: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def total(self):
        return self.near + self.tail

    @property
    def product(self):
        return self.lambdas * self.total

    def rows(self):
        return list(zip(self.lambdas.tolist(), self.near.tolist(), self.tail.tolist(),
                        self.total.tolist(), self.product.tolist()))

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "near", "tail", "total", "product"])
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text)
        return text


@dataclass
class LimitEstimate:
    estimate: float
    per_lambda: np.ndarray
    extrapolation_residual: float
    target: float
    curve: DistributionCurve | None = None

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.target) / self.target if self.target else abs(self.estimate)


def _check_schedule(schedule):
    lam = np.asarray(schedule, dtype=float)
    if lam.ndim != 1 or len(lam) == 0 or np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
        raise ValueError("schedule must be positive and strictly decreasing")
    return lam


def geometric_schedule(start: float, ratio: float, count: int) -> np.ndarray:
    return start * ratio ** np.arange(count)


def hybrid_distribution(f: GridFunction, k: Kernel, schedule, R: float | None = None,
                        eval_cells: int = 256, policy: RadiusPolicy = EXACT,
                        sphere: SphereGrid | None = None) -> DistributionCurve:
    """lambda -> (near, tail) with near measured on the grid inside |x| <= R."""
    lam = _check_schedule(schedule)
    g = _sphere(f.n, sphere)
    n = f.n
    m = f.mass()
    rs = f.support_radius()
    if R is None:
        R = 4.0 * rs
    meta = {"R": R, "eval_cells": eval_cells, "kernel": k.name, "support_radius": rs, "mass": m}
    if m == 0.0:
        z = np.zeros(len(lam))
        return DistributionCurve(lam, z, z.copy(), meta)
    if rs > R / 4.0 * (1.0 + 1e-12):
        raise SupportViolation(f"support radius {rs:.6g} exceeds R/4 = {R / 4.0:.6g}", rs)
    field_ = maximal_field(f, k, [(-R, R)] * n, eval_cells, policy)
    inside = np.linalg.norm(field_.centers, axis=1) <= R
    vals = field_.values.ravel()[inside]
    vol = field_.cell_volume
    near = np.array([np.count_nonzero(vals > t) * vol for t in lam])
    tail = np.array([tail_superlevel_measure(k, g, m, t, R) for t in lam])
    return DistributionCurve(lam, near, tail, meta)


def _fit_intercept(lam, prod):
    half = max(2, math.ceil(len(lam) / 2))
    sel = np.argsort(lam)[:half]
    slope, icpt = np.polyfit(lam[sel], prod[sel], 1)
    resid = float(np.max(np.abs(prod[sel] - (slope * lam[sel] + icpt))))
    return float(icpt), resid


def limiting_weak_type(f: GridFunction, k: Kernel, schedule, R: float | None = None,
                       eval_cells: int = 256, policy: RadiusPolicy = EXACT,
                       sphere: SphereGrid | None = None) -> LimitEstimate:
    """Affine extrapolation of lambda |{M f > lambda}| to lambda = 0.

    The target n^{-1} ||Omega||_1 ||f||_1 is reported alongside, never used.
    """
    lam = _check_schedule(schedule)
    if lam[0] / lam[-1] < 8.0 * (1 - 1e-12):
        raise ValueError("schedule must span at least three octaves")
    g = _sphere(f.n, sphere)
    curve = hybrid_distribution(f, k, lam, R, eval_cells, policy, g)
    prod = curve.product
    est, resid = _fit_intercept(lam, prod)
    target = l1_norm(k, g) * f.mass() / f.n
    return LimitEstimate(est, prod, resid, target, curve)


def default_truncation(k: Kernel, g: SphereGrid, m: float) -> Callable[[float], float]:
    """R(lambda) = 2 (m sup Omega / lambda)^{1/n}: beyond it the far field is below lambda / 2^n."""
    top = float(np.max(np.abs(k.sample(g))))
    n = g.n
    return lambda lam: 2.0 * (m * top / lam) ** (1.0 / n)


def discrepancy_limit(f: GridFunction, k: Kernel, schedule,
                      R_of_lambda: Callable[[float], float] | None = None,
                      cells: int = 128, policy: RadiusPolicy = EXACT,
                      sphere: SphereGrid | None = None) -> DistributionCurve:
    """lambda |{|x| <= R(lambda) : |M f(x) - m Omega(x) |x|^{-n}| > lambda}|.

    The discrepancy field does not depend on lambda, so it is evaluated once
    on nested boxes [-a 2^l, a 2^l]^n, each with ``cells`` cells per axis;
    level l only keeps the cells outside box l-1, so resolution is fine near
    the support of f and coarse far out.  Points beyond R(lambda) are not
    counted, so each row is a lower bound for the untruncated measure.
    """
    lam = _check_schedule(schedule)
    g = _sphere(f.n, sphere)
    n = f.n
    m = f.mass()
    if R_of_lambda is None:
        R_of_lambda = default_truncation(k, g, m)
    radii = np.array([R_of_lambda(t) for t in lam])
    meta = {"kernel": k.name, "mass": m, "cells_per_level": cells,
            "note": "truncated at |x| <= R(lambda); rows are lower bounds"}
    z = np.zeros(len(lam))
    if m == 0.0 or radii.max() <= 0.0:
        return DistributionCurve(lam, z, z.copy(), meta)
    if cells % 4:
        raise ValueError("cells per level must be a multiple of 4")
    a = max(2.0 * f.support_radius(), f.h * cells / 8.0)
    levels = []
    half = a
    while True:
        grid = make_grid(n, [(-half, half)] * n, cells, lambda p: np.zeros(len(p)))
        c = grid.centers
        keep = np.ones(len(c), dtype=bool) if not levels else np.any(np.abs(c) > half / 2.0, axis=1)
        levels.append((c[keep], grid.cell_volume))
        if half >= radii.max():
            break
        half *= 2.0
    pts = np.concatenate([p for p, _ in levels])
    vol = np.concatenate([np.full(len(p), v) for p, v in levels])
    r = np.linalg.norm(pts, axis=1)
    mf = eval_maximal(f, k, pts, policy)
    disc = np.abs(mf - far_field_value(k, m, pts))
    near = np.array([vol[(r <= R) & (disc > t)].sum() for t, R in zip(lam, radii)])
    meta["levels"] = len(levels)
    meta["R"] = radii.tolist()
    return DistributionCurve(lam, near, z, meta)


@dataclass(frozen=True)
class SandwichResult:
    lower: float
    value: float
    upper: float
    ok: bool
    R_eps: float
    d_eps: float


def sandwich_radius(k: Kernel, f: GridFunction, eps: float, sphere: SphereGrid | None = None):
    """(R_eps, d_eps) with d_eps < 2 eps a sampled continuity radius and R_eps = r_eps / arcsin(d_eps)."""
    if k.n != 2:
        raise UnsupportedDimension("sandwich checks need a kernel on S^1")
    g = _sphere(2, sphere)
    d = min(continuity_radius(k, g, eps), math.nextafter(2.0 * eps, 0.0), 1.0)
    if d <= 0:
        raise ValueError("kernel oscillates by eps below grid resolution")
    return f.support_radius() / math.asin(d), d


def sandwich_check(k: Kernel, f: GridFunction, eps: float, x, sphere: SphereGrid | None = None,
                   radius=None) -> SandwichResult:
    """Check (1-e) m (Om(x)-e) / ((1+e)^n |x|^n) <= M f(x) <= m (Om(x)+e) / ((1-e)^n |x|^n)."""
    R_eps, d_eps = radius if radius is not None else sandwich_radius(k, f, eps, sphere)
    x = np.asarray(x, dtype=float).reshape(-1)
    r = float(np.linalg.norm(x))
    if r <= R_eps:
        raise ValueError(f"|x| = {r:.6g} must exceed R_eps = {R_eps:.6g}")
    n = f.n
    m = f.mass()
    om = float(k(x))
    upper = m * (om + eps) / ((1.0 - eps) ** n * r**n)
    lower = (1.0 - eps) * m * (om - eps) / ((1.0 + eps) ** n * r**n)
    value = eval_maximal_at(f, k, x)
    slack = 2.0 * f.h / r**n
    ok = (lower - slack <= value <= upper + slack)
    return SandwichResult(lower, value, upper, bool(ok), R_eps, d_eps)
