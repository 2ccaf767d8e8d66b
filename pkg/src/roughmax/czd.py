"""Dyadic Calderon-Zygmund decomposition of grid functions.

The dyadic lattice is anchored at the lower corner of the grid box with the
grid cell as the unit cube.  If the smallest dyadic root covering the grid
still has average > t, the root is doubled (the new region is zero-padded)
until its average is <= t.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import LevelTooSmallError
from .grid_field import DyadicCube, GridFunction

MAX_PADDED_CELLS = 2**24


@dataclass
class CZOutput:
    t: float
    good: GridFunction
    bad: list  # of (DyadicCube, np.ndarray restricted to the cube)
    root: DyadicCube
    h: float
    origin: np.ndarray

    @property
    def n(self):
        return self.good.n

    def generation(self, cube: DyadicCube):
        return cube.generation(self.h)

    def bad_total(self) -> np.ndarray:
        out = np.zeros(self.good.cells)
        for cube, vals in self.bad:
            out[cube.cell_slices()] += vals
        return out

    def cubes_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["generation"] + [f"corner{i + 1}" for i in range(self.n)] + ["l1_of_bQ"])
        vol = self.h**self.n
        for cube, vals in self.bad:
            w.writerow([self.generation(cube), *cube.corner, repr(float(np.abs(vals).sum() * vol))])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text)
        return text


def _pad(f: GridFunction, size: int) -> np.ndarray:
    out = np.zeros((size,) * f.n)
    out[tuple(slice(0, c) for c in f.cells)] = f.values
    return out


def _pool(a: np.ndarray) -> np.ndarray:
    """Sum over 2x...x2 blocks."""
    n = a.ndim
    s = a.shape[0] // 2
    return a.reshape(*[x for _ in range(n) for x in (s, 2)]).sum(axis=tuple(range(1, 2 * n, 2)))


def _upsample(a: np.ndarray) -> np.ndarray:
    for ax in range(a.ndim):
        a = np.repeat(a, 2, axis=ax)
    return a


def cz_decompose(f: GridFunction, t: float) -> CZOutput:
    """Stopping-time selection of maximal dyadic cubes with average > t."""
    if t <= 0:
        raise ValueError("level t must be positive")
    total = float(f.values.sum())
    if total <= 0:
        raise ValueError("f must have positive mass")
    n, h = f.n, f.h
    L = int(np.ceil(np.log2(max(f.cells)))) if max(f.cells) > 1 else 0
    while total / (2**L) ** n > t:
        L += 1
        if (2**L) ** n > MAX_PADDED_CELLS:
            raise LevelTooSmallError(f"level t={t:g} is too small: root average exceeds t up to 2^{L} cells per axis")
    if (2**L) ** n > MAX_PADDED_CELLS:
        raise LevelTooSmallError("padded grid is too large")
    fp = _pad(f, 2**L)

    sums = [fp]
    for _ in range(L):
        sums.append(_pool(sums[-1]))

    selected = []
    blocked = np.zeros((1,) * n, dtype=bool)
    for lev in range(L - 1, -1, -1):
        blocked = _upsample(blocked)
        avg = sums[lev] / 2 ** (lev * n)
        pick = (avg > t) & ~blocked
        for idx in zip(*np.nonzero(pick)):
            selected.append(DyadicCube(lev, tuple(int(i) for i in idx)))
        blocked = blocked | pick

    g = fp.copy()
    bad = []
    for cube in selected:
        sl = cube.cell_slices()
        block = fp[sl]
        mean = block.mean()
        bad.append((cube, block - mean))
        g[sl] = mean
    box = [(float(lo), float(lo + h * 2**L)) for lo in f.lo]
    good = GridFunction.from_values(n, box, g, clamp=False)
    return CZOutput(float(t), good, bad, DyadicCube(L, (0,) * n), h, f.lo.copy())


def cz_level(lam: float, n: int, c_omega_value: float) -> float:
    """n lambda / (2^{3n+1} C_Omega)."""
    if lam <= 0 or c_omega_value <= 0:
        raise ValueError("lambda and C_Omega must be positive")
    return n * lam / (2 ** (3 * n + 1) * c_omega_value)


def group_by_scale(d: CZOutput) -> dict:
    """generation s -> B_s, the sum of b_Q over cubes of that generation (padded-grid arrays)."""
    out: dict = {}
    for cube, vals in d.bad:
        s = d.generation(cube)
        arr = out.setdefault(s, np.zeros(d.good.cells))
        arr[cube.cell_slices()] += vals
    return out


@dataclass
class CZReport:
    checks: dict = field(default_factory=dict)  # name -> (passed, slack)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def failures(self) -> list:
        return [name for name, (ok, _) in self.checks.items() if not ok]

    def lines(self) -> list:
        return [f"{'PASS' if ok else 'FAIL'} {name} slack={slack:.3e}" for name, (ok, slack) in self.checks.items()]


def verify_cz(d: CZOutput, f: GridFunction) -> CZReport:
    """Check every decomposition invariant; slack >= 0 means satisfied with that margin."""
    n, t, h = d.n, d.t, d.h
    vol = h**n
    fp = _pad(f, d.good.cells[0])
    mass = float(fp.sum() * vol)
    rep = CZReport()

    recon = float(np.abs(fp - d.good.values - d.bad_total()).max())
    tol = 1e-12 * max(1.0, float(fp.max()))
    rep.checks["cz-f reconstruction"] = (recon <= tol, tol - recon)

    worst_mean = max((abs(float(v.sum()) * vol) for _, v in d.bad), default=0.0)
    tol_mean = 1e-9 * mass
    rep.checks["cz-b mean zero"] = (worst_mean <= tol_mean, tol_mean - worst_mean)

    gmax = float(d.good.values.max())
    rep.checks["cz-g sup bound"] = (gmax <= 2**n * t, 2**n * t - gmax)

    worst_b = min((2 ** (n + 1) * t * d.bad[i][0].side(h) ** n - float(np.abs(v).sum()) * vol
                   for i, (_, v) in enumerate(d.bad)), default=np.inf)
    rep.checks["cz-b L1 per cube"] = (worst_b >= -1e-12 * mass, worst_b)

    cube_measure = sum(c.side(h) ** n for c, _ in d.bad)
    rep.checks["cz-Q measure"] = (cube_measure <= mass / t * (1 + 1e-12), mass / t - cube_measure)

    cover = np.zeros(d.good.cells, dtype=np.int64)
    for c, _ in d.bad:
        cover[c.cell_slices()] += 1
    overlap = int(cover.max(initial=0))
    rep.checks["cubes disjoint"] = (overlap <= 1, float(1 - overlap))

    b_l1 = float(sum(np.abs(v).sum() for _, v in d.bad) * vol)
    rep.checks["b L1 <= 2^(2n+1) ||f||_1"] = (b_l1 <= 2 ** (2 * n + 1) * mass * (1 + 1e-12), 2 ** (2 * n + 1) * mass - b_l1)
    rep.checks["b L1 <= 2 ||f||_1"] = (b_l1 <= 2 * mass * (1 + 1e-12), 2 * mass - b_l1)
    return rep
