"""Seeded invariant and property suites, run by ``roughmax check``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from . import czd
from .grid_field import GridFunction, make_grid
from .maximal_op import RadiusPolicy, domination_gap, eval_maximal
from .sphere_kernel import (
    c_omega,
    l1_norm,
    level_set_split,
    llogl_norm,
    make_sphere_grid,
    parity_split,
    tabulated,
)
from .zoo import CONTINUOUS_KERNELS, parse_function, parse_kernel

ZOO_S1 = ("const:1", "const:0.05", "abscos:0.5", "abscos:0.9", "raisedcos:1",
          "loglog:1.5", "loglog:3", "lacunary:3")
ZOO_S0 = ("atoms:3,1", "atoms:0.2,5", "const:1")


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f"  ({self.detail})" if self.detail else "")


def zoo_kernels():
    """(identifier, kernel, grid) for every zoo kernel on S^0 and S^1."""
    g1, g2 = make_sphere_grid(1), make_sphere_grid(2, 4096)
    out = [(s, parse_kernel(s, 1), g1) for s in ZOO_S0]
    out += [(s, parse_kernel(s, 2), g2) for s in ZOO_S1]
    return out


def random_table(rng, g, heavy=True):
    v = rng.lognormal(0.0, 2.0 if heavy else 0.5, len(g))
    v[rng.random(len(g)) < 0.2] = 0.0
    return tabulated(g, v)


def kernel_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    res = []
    for name, k, g in zoo_kernels():
        l1, ll, c = l1_norm(k, g), llogl_norm(k, g), c_omega(k, g)
        res.append(CheckResult(f"L1 <= LlogL [{name}]", l1 <= ll, f"{l1:.6g} <= {ll:.6g}"))
        res.append(CheckResult(f"C_Omega <= 3(LlogL+1) [{name}]", c <= 3 * (ll + 1), f"{c:.6g} <= {3 * (ll + 1):.6g}"))
        cs = [c_omega(k.scaled(2.0**-j), g) for j in range(21)]
        mono = all(a >= b for a, b in zip(cs, cs[1:]))
        res.append(CheckResult(f"C_(cOmega) -> 0 monotonically [{name}]", mono and cs[-1] < 1e-4 * cs[0],
                               f"ratio {cs[-1] / cs[0]:.3e}"))
    g = make_sphere_grid(2, 512)
    worst = 0.0
    for _ in range(100):
        a, b = random_table(rng, g), random_table(rng, g)
        lhs = llogl_norm(a + b, g)
        rhs = 4 * (llogl_norm(a, g) + llogl_norm(b, g))
        worst = max(worst, lhs / rhs)
    res.append(CheckResult("LlogL quasi-triangle with constant 4 (100 pairs)", worst <= 1.0, f"max ratio {worst:.4f}"))
    for _ in range(20):
        k = random_table(rng, g)
        v = k.sample(g)
        even, odd = parity_split(k, g)
        err = float(np.abs(even.sample(g) + odd.sample(g) - v).max())
        sp = level_set_split(k, g, float(np.median(v)))
        big, small = sp.big.sample(g), sp.small.sample(g)
        ok = (err <= 1e-15 * max(1.0, v.max())
              and np.all(big + small == v)
              and (small.max() < sp.tau or sp.tau == 0)
              and np.abs(sp.small_even.sample(g)).max() <= small.max()
              and np.abs(sp.small_odd.sample(g)).max() <= small.max())
        if not ok:
            res.append(CheckResult("parity / level-set split invariants", False, f"recon err {err:.2e}"))
            break
    else:
        res.append(CheckResult("parity / level-set split invariants (20 tables)", True))
    return res


def grid_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    res = []
    ok_mono = ok_cheb = ok_add = True
    for _ in range(50):
        n = int(rng.integers(1, 3))
        cells = int(rng.integers(4, 40))
        a = GridFunction.from_values(n, [(0.0, 1.0)] * n, rng.exponential(1.0, (cells,) * n))
        b = GridFunction.from_values(n, [(0.0, 1.0)] * n, rng.exponential(1.0, (cells,) * n))
        lams = np.sort(rng.uniform(0.01, 5.0, 10))
        meas = [a.superlevel_measure(t) for t in lams]
        ok_mono &= all(x >= y for x, y in zip(meas, meas[1:]))
        ok_cheb &= all(mu <= a.mass() / t * (1 + 1e-12) for mu, t in zip(meas, lams))
        ok_add &= math.isclose((a + b).mass(), a.mass() + b.mass(), rel_tol=1e-12)
    res.append(CheckResult("superlevel measure nonincreasing in lambda", ok_mono))
    res.append(CheckResult("Chebyshev bound |{f > t}| <= ||f||_1 / t", ok_cheb))
    res.append(CheckResult("mass additive", ok_add))
    return res


def _maximal_cases():
    return [
        (parse_kernel("const:1", 1), parse_function("indicator_interval:0,1", 1, 128), 8.0),
        (parse_kernel("abscos:0.5", 2), parse_function("indicator_ball:1", 2, 24), 4.0),
        (parse_kernel("raisedcos:1", 2), parse_function("gauss:0.5", 2, 24), 4.0),
    ]


def maximal_suite(seed: int = 0, points: int = 50) -> list:
    rng = np.random.default_rng(seed)
    res = []
    mult = RadiusPolicy("multiplicative", 8)
    for k, f, span in _maximal_cases():
        tag = f"{k.name}, n={f.n}"
        xs = rng.uniform(-span, span, (points, f.n))
        exact = eval_maximal(f, k, xs)
        f2 = f.with_values(f.values * (1.0 + rng.random(f.values.shape)))
        res.append(CheckResult(f"monotone in f [{tag}]", bool(np.all(eval_maximal(f2, k, xs) >= exact - 1e-12))))
        scaled = eval_maximal(f.scaled(3.5), k, xs)
        res.append(CheckResult(f"positively homogeneous in f [{tag}]",
                               bool(np.allclose(scaled, 3.5 * exact, rtol=1e-12, atol=0))))
        k2 = parse_kernel("const:0.5", f.n)
        both = eval_maximal(f, k + k2, xs)
        sub = exact + eval_maximal(f, k2, xs)
        res.append(CheckResult(f"sublinear in the kernel [{tag}]", bool(np.all(both <= sub * (1 + 1e-12)))))
        ratio = eval_maximal(f, k, xs, mult)[exact > 0] / exact[exact > 0]
        lo = 2.0 ** (-f.n / 8)
        res.append(CheckResult(f"multiplicative policy slack [{tag}]",
                               bool(np.all(ratio >= lo * (1 - 1e-12)) and np.all(ratio <= 1 + 1e-12)),
                               f"ratio in [{ratio.min():.4f}, {ratio.max():.4f}]"))
        worst = -np.inf
        for x in xs:
            lhs, rhs, C = domination_gap(f, k, x)
            worst = max(worst, lhs - C * rhs)
        res.append(CheckResult(f"domination M f <= C_alpha sup_j Omega_j * f [{tag}]", worst <= 1e-9,
                               f"max lhs - C rhs = {worst:.3e}"))
    return res


def asymptotics_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    res = []
    g1, g2 = make_sphere_grid(1), make_sphere_grid(2, 4096)
    for name, k, g in [("const:1", parse_kernel("const:1", 2), g2),
                       ("abscos:0.5", parse_kernel("abscos:0.5", 2), g2),
                       ("atoms:3,1", parse_kernel("atoms:3,1", 1), g1)]:
        m, lam = float(rng.uniform(0.5, 3)), float(rng.uniform(0.01, 1))
        a = asy.tail_superlevel_measure(k, g, m, lam, 0.0)
        b = asy.homogeneous_superlevel_measure(k.scaled(m), g, lam)
        res.append(CheckResult(f"tail at R=0 equals exact homogeneous measure [{name}]",
                               math.isclose(a, b, rel_tol=1e-13), f"{a:.12g} vs {b:.12g}"))
    f = parse_function("indicator_interval:0,1", 1, 1000)
    k = parse_kernel("const:1", 1)
    lam = 0.2 * 2.0 ** -np.arange(6)
    curve = asy.hybrid_distribution(f, k, lam, R=40.0, eval_cells=2000)
    dev = float(np.max(np.abs(curve.product - (2 - lam)) / (2 - lam)))
    res.append(CheckResult("1-D hybrid products equal 2 - lambda within 1%", dev <= 0.01, f"max rel dev {dev:.4f}"))
    k = parse_kernel("raisedcos:1", 2)
    f = parse_function("indicator_ball:1", 2, 24)
    R_eps, d_eps = asy.sandwich_radius(k, f, 0.1)
    bad = 0
    for _ in range(10):
        r = rng.uniform(R_eps, 4 * R_eps) * (1 + 1e-9)
        th = rng.uniform(0, 2 * math.pi)
        bad += not asy.sandwich_check(k, f, 0.1, [r * math.cos(th), r * math.sin(th)], radius=(R_eps, d_eps)).ok
    res.append(CheckResult("sandwich bounds beyond R_eps [raisedcos:1]", bad == 0, f"{bad} failures"))
    return res


def random_grid_function(rng, n=None) -> GridFunction:
    n = int(rng.integers(1, 3)) if n is None else n
    cells = 2 ** int(rng.integers(2, 7 if n == 1 else 6))
    kind = rng.integers(3)
    if kind == 0:
        vals = rng.exponential(1.0, (cells,) * n)
    elif kind == 1:
        vals = rng.pareto(1.5, (cells,) * n) * (rng.random((cells,) * n) < 0.3)
    else:
        vals = np.zeros((cells,) * n)
        vals[tuple(rng.integers(0, cells, n))] = rng.uniform(1, 100)
    if vals.sum() == 0:
        vals.flat[0] = 1.0
    return GridFunction.from_values(n, [(0.0, 1.0)] * n, vals)


def czd_suite(seed: int = 0, count: int = 200) -> list:
    rng = np.random.default_rng(seed)
    fails: dict = {}
    for _ in range(count):
        f = random_grid_function(rng)
        t = float(rng.uniform(0.0, 1.0) * f.values.max()) or 1e-3
        d = czd.cz_decompose(f, t)
        for name in czd.verify_cz(d, f).failures():
            fails[name] = fails.get(name, 0) + 1
        again = czd.cz_decompose(d.good, 2**f.n * t)
        if again.bad:
            fails["idempotent on good part"] = fails.get("idempotent on good part", 0) + 1
    res = [CheckResult(f"CZ invariants on {count} random functions", not fails,
                       ", ".join(f"{k}: {v}" for k, v in fails.items()))]
    bad = 0
    for _ in range(50):
        f = random_grid_function(rng)
        lam, C = float(rng.uniform(0.1, 10)), float(rng.uniform(0.5, 20))
        n = f.n
        t = czd.cz_level(lam, n, C)
        try:
            d = czd.cz_decompose(f, t)
        except czd.LevelTooSmallError:
            continue
        gmax = d.good.values.max()
        cubes = sum(c.side(d.h) ** n for c, _ in d.bad)
        bq = max((np.abs(v).sum() * d.h**n / c.side(d.h) ** n for c, v in d.bad), default=0.0)
        bad += not (gmax <= n * lam / (2 ** (2 * n + 1) * C) * (1 + 1e-12)
                    and bq <= n * lam / (2 ** (2 * n) * C) * (1 + 1e-12)
                    and cubes <= 2 ** (3 * n + 1) * C / (n * lam) * f.mass() * (1 + 1e-12))
    res.append(CheckResult("C-Z level n lambda / (2^(3n+1) C_Omega) composes to the (cz-g), (cz-b), (cz-Q) bounds", bad == 0, f"{bad} failures"))
    return res


SUITES = {
    "kernel": kernel_suite,
    "grid": grid_suite,
    "maximal": maximal_suite,
    "asymptotics": asymptotics_suite,
    "czd": czd_suite,
}


def run_suites(names, seed: int = 0) -> list:
    out = []
    for name in names:
        out.extend(SUITES[name](seed))
    return out
