"""Named kernels and functions used by the command line and the test suites.

Kernel identifiers::

    const:c          constant c on S^{n-1} (any n)
    abscos:a         |cos theta|^a on S^1, a >= 0
    raisedcos:c      max(0, 1 + c cos theta) on S^1
    loglog:p         1 / (|theta| log^p(e + 1/|theta|)) on S^1, theta in (-pi, pi], p > 1
    lacunary:K       sum_{k<=K} k^-2 (1 + sin(2^(2^k) theta)) on S^1, 1 <= K <= 5
    atoms:v1,v2      the values at +1 and -1 on S^0
    table:<path>     CSV rows "angle,value" on S^1, periodic linear interpolation

Function identifiers::

    indicator_interval:a,b   (n=1)
    indicator_ball:r         (n=2)
    gauss:s                  exp(-|x|^2 / (2 s^2)), truncated at the box
    table:<path>             grid dump written by :func:`write_grid_table`
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch
from .grid_field import GridFunction, make_grid
from .sphere_kernel import Kernel, constant_kernel

CONTINUOUS_KERNELS = ("const:1", "abscos:0.5", "raisedcos:1")


def _floats(arg: str) -> list[float]:
    return [float(a) for a in arg.split(",") if a.strip()]


def _angle(u):
    return np.arctan2(u[..., 1], u[..., 0])


def parse_kernel(spec: str, n: int = 2) -> Kernel:
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return constant_kernel(n, float(arg) if arg else 1.0)
    if kind == "atoms":
        v = _floats(arg)
        if n != 1 or len(v) != 2:
            raise DimensionMismatch("atoms:v1,v2 is a kernel on S^0 (n=1)")
        a, b = abs(v[0]), abs(v[1])
        return Kernel(1, lambda u: np.where(u[..., 0] >= 0, a, b), name=spec)
    if n != 2:
        raise DimensionMismatch(f"kernel {kind!r} lives on S^1 (n=2)")
    if kind == "abscos":
        a = float(arg)
        if a < 0.0:
            raise ValueError("abscos exponent must be >= 0")
        return Kernel(2, lambda u: np.abs(u[..., 0]) ** a, name=spec)
    if kind == "raisedcos":
        c = float(arg) if arg else 1.0
        return Kernel(2, lambda u: np.maximum(0.0, 1.0 + c * u[..., 0]), name=spec)
    if kind == "loglog":
        p = float(arg)
        if p <= 1.0:
            raise ValueError("loglog exponent must exceed 1")

        def func(u):
            t = np.abs(_angle(u))
            with np.errstate(divide="ignore"):
                return 1.0 / (t * np.log(math.e + 1.0 / t) ** p)
        return Kernel(2, func, name=spec)
    if kind == "lacunary":
        K = int(arg)
        if not 1 <= K <= 5:
            raise ValueError("lacunary depth must lie in 1..5")
        freqs = [float(2 ** (2**k)) for k in range(1, K + 1)]

        def func(u):
            t = _angle(u)
            return sum((1.0 + np.sin(m * t)) / k**2 for k, m in enumerate(freqs, start=1))
        return Kernel(2, func, name=spec)
    if kind == "table":
        return table_kernel(arg)
    raise ValueError(f"unknown kernel identifier {spec!r}")


def table_kernel(path: str) -> Kernel:
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    order = np.argsort(np.mod(data[:, 0], 2 * math.pi))
    ang = np.mod(data[order, 0], 2 * math.pi)
    val = np.abs(data[order, 1])

    def func(u):
        t = np.mod(_angle(u), 2 * math.pi)
        return np.interp(t, ang, val, period=2 * math.pi)
    return Kernel(2, func, name=f"table:{path}")


def default_box(spec: str, n: int):
    kind, _, arg = spec.partition(":")
    if kind == "indicator_interval":
        a, b = _floats(arg)
        return [(a, b)]
    if kind == "indicator_ball":
        r = float(arg)
        return [(-r, r)] * n
    if kind == "gauss":
        s = float(arg)
        return [(-4 * s, 4 * s)] * n
    raise ValueError(f"function {spec!r} needs an explicit box")


def parse_function(spec: str, n: int, cells: int, box=None) -> GridFunction:
    kind, _, arg = spec.partition(":")
    if kind == "table":
        return read_grid_table(arg)
    if box is None:
        box = default_box(spec, n)
    if kind == "indicator_interval":
        if n != 1:
            raise DimensionMismatch("indicator_interval needs n=1")
        a, b = _floats(arg)
        return make_grid(1, box, cells, lambda x: ((x[:, 0] >= a) & (x[:, 0] <= b)).astype(float))
    if kind == "indicator_ball":
        if n != 2:
            raise DimensionMismatch("indicator_ball needs n=2")
        r = float(arg)
        return make_grid(2, box, cells, lambda x: (np.sum(x**2, axis=1) <= r * r).astype(float))
    if kind == "gauss":
        s = float(arg)
        return make_grid(n, box, cells, lambda x: np.exp(-np.sum(x**2, axis=1) / (2 * s * s)))
    raise ValueError(f"unknown function identifier {spec!r}")


def write_grid_table(f: GridFunction, path) -> None:
    """Header line ``# n=<n> box=<lo1>,<hi1>,... cells=<c1>,...`` then one value per line, row-major."""
    box = ",".join(f"{lo!r},{hi!r}" for lo, hi in zip(f.lo.tolist(), f.hi.tolist()))
    cells = ",".join(str(c) for c in f.cells)
    with open(path, "w") as fh:
        fh.write(f"# n={f.n} box={box} cells={cells}\n")
        for v in f.values.ravel():
            fh.write(f"{float(v)!r}\n")


def read_grid_table(path) -> GridFunction:
    with open(path) as fh:
        header = fh.readline()
    if not header.startswith("#"):
        raise ValueError("grid table needs a '# n=... box=... cells=...' header")
    fields = dict(item.split("=", 1) for item in header[1:].split())
    n = int(fields["n"])
    b = _floats(fields["box"])
    cells = tuple(int(c) for c in fields["cells"].split(","))
    values = np.loadtxt(path, comments="#", ndmin=1).reshape(cells)
    box = [(b[2 * i], b[2 * i + 1]) for i in range(n)]
    return GridFunction.from_values(n, box, values)
