"""The rough maximal operator M_Omega on grid functions.

    M_Omega f(x) = sup_{r>0} r^{-n} int_{|x-y|<r} Omega(x-y) f(y) dy

Each grid cell of f is a point mass at its centre.  The cell containing the
evaluation point contributes nothing, since Omega(0) is undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, InvalidPolicyError
from .grid_field import GridFunction, make_grid
from .sphere_kernel import Kernel

# pairs (points x cells) processed per chunk; bounds peak memory
_CHUNK_PAIRS = 2_000_000


@dataclass(frozen=True)
class RadiusPolicy:
    """Which radii the supremum runs over.

    ``exact`` takes every distinct cell-centre distance.  ``multiplicative``
    takes r_min * 2**(k/m) up to r_max, which underestimates the exact value
    by at most the factor 2**(-n/m).  Leaving r_min / r_max unset picks
    h/4 and twice the largest distance, which always brackets the sweep.
    """

    mode: str = "exact"
    steps_per_octave: int = 8
    r_min: float | None = None
    r_max: float | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "multiplicative"):
            raise InvalidPolicyError(f"unknown radius policy {self.mode!r}")
        if self.mode == "multiplicative":
            if self.steps_per_octave < 1:
                raise InvalidPolicyError("steps_per_octave must be >= 1")
            if self.r_min is not None and self.r_min <= 0:
                raise InvalidPolicyError("r_min must be positive")
            if self.r_min is not None and self.r_max is not None and self.r_max <= self.r_min:
                raise InvalidPolicyError("empty candidate radius set")

    @classmethod
    def parse(cls, text: str) -> "RadiusPolicy":
        if text == "exact":
            return cls()
        if text.startswith("mult:"):
            return cls("multiplicative", int(text[5:]))
        raise InvalidPolicyError(f"radius policy must be 'exact' or 'mult:<m>', got {text!r}")

    def candidates(self, r_min: float, r_max: float) -> np.ndarray:
        m = self.steps_per_octave
        K = int(math.floor(m * math.log2(r_max / r_min) + 1e-12))
        return r_min * 2.0 ** (np.arange(K + 1) / m)


EXACT = RadiusPolicy()


def _sources(f: GridFunction):
    flat = f.values.ravel()
    nz = np.nonzero(flat > 0)[0]
    col = np.full(flat.size, -1, dtype=np.int64)
    col[nz] = np.arange(len(nz))
    return f.centers[nz], flat[nz] * f.cell_volume, col


def _pair_masses(x, ys, w, col, f, k, *, need_dirs=True):
    """Distances and Omega-weighted masses between points x (P, n) and sources ys (N, n)."""
    diff = x[:, None, :] - ys[None, :, :]
    d = np.sqrt(np.einsum("pnj,pnj->pn", diff, diff))
    loc = f.locate(x)
    own = np.where(loc >= 0, col[loc], -1)
    rows = np.nonzero(own >= 0)[0]
    d[rows, own[rows]] = np.inf
    if k.constant is not None:
        m = np.broadcast_to(w * abs(k.constant), d.shape).copy()
    else:
        safe = np.where(np.isfinite(d) & (d > 0), d, 1.0)
        m = w * k.on_directions(diff / safe[..., None])
    m[rows, own[rows]] = 0.0
    return d, m


def _check_dims(f, k):
    if f.n != k.n:
        raise DimensionMismatch(f"function has n={f.n}, kernel has n={k.n}")


def _evaluate(f: GridFunction, k: Kernel, xs: np.ndarray, policy: RadiusPolicy) -> np.ndarray:
    _check_dims(f, k)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != f.n:
        raise DimensionMismatch("evaluation points have the wrong dimension")
    ys, w, col = _sources(f)
    out = np.zeros(len(xs))
    if len(ys) == 0:
        return out
    n = f.n
    step = max(1, _CHUNK_PAIRS // len(ys))
    for s in range(0, len(xs), step):
        x = xs[s:s + step]
        d, m = _pair_masses(x, ys, w, col, f, k)
        if policy.mode == "exact":
            order = np.argsort(d, axis=1)
            ds = np.take_along_axis(d, order, axis=1)
            S = np.cumsum(np.take_along_axis(m, order, axis=1), axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(np.isfinite(ds), S / ds**n, 0.0)
            out[s:s + step] = ratio.max(axis=1)
        else:
            out[s:s + step] = _multiplicative(d, m, n, f.h, policy)
    return out


def _multiplicative(d, m, n, h, policy):
    finite = np.isfinite(d)
    r_min = policy.r_min if policy.r_min is not None else h / 4.0
    r_max = policy.r_max if policy.r_max is not None else 2.0 * max(float(d[finite].max(initial=0.0)), r_min)
    if r_max <= r_min:
        raise InvalidPolicyError("empty candidate radius set")
    radii = policy.candidates(r_min, r_max)
    K = len(radii)
    mstep = policy.steps_per_octave
    with np.errstate(divide="ignore"):
        first = np.floor(mstep * np.log2(np.where(finite, d, np.inf) / r_min)).astype(np.float64) + 1.0
    first = np.where(d < r_min, 0.0, first)
    # nudge so that d == r_k lands strictly beyond r_k
    first = np.where(finite & (first < K) & (radii[np.clip(first, 0, K - 1).astype(int)] <= d), first + 1, first)
    keep = finite & (first < K)
    rows = np.broadcast_to(np.arange(d.shape[0])[:, None], d.shape)
    binned = np.bincount((rows[keep] * K + first[keep].astype(np.int64)), weights=m[keep],
                         minlength=d.shape[0] * K).reshape(d.shape[0], K)
    S = np.cumsum(binned, axis=1)
    return (S / radii**n).max(axis=1)


def eval_maximal_at(f: GridFunction, k: Kernel, x, policy: RadiusPolicy = EXACT) -> float:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation point must be finite")
    return float(_evaluate(f, k, x, policy)[0])


def eval_maximal(f: GridFunction, k: Kernel, xs, policy: RadiusPolicy = EXACT) -> np.ndarray:
    """Vectorised :func:`eval_maximal_at` over points of shape (P, n)."""
    return _evaluate(f, k, xs, policy)


def maximal_field(f: GridFunction, k: Kernel, eval_box, eval_cells, policy: RadiusPolicy = EXACT) -> GridFunction:
    grid = make_grid(f.n, eval_box, eval_cells, lambda p: np.zeros(len(p)))
    vals = _evaluate(f, k, grid.centers, policy)
    return GridFunction.from_values(f.n, grid.box, vals.reshape(grid.cells))


def _ramp(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def _smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    a, b = _ramp(t), _ramp(1.0 - t)
    return a / (a + b)


class BumpProfile:
    """Smooth radial bump: 0 off [1/2, 4], 1 on [1, 2], smooth ramps between."""

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        up = _smooth_step(2.0 * (r - 0.5))
        down = _smooth_step((4.0 - r) / 2.0)
        return np.where(r < 1.0, up, np.where(r <= 2.0, 1.0, down)) * ((r >= 0.5) & (r <= 4.0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.radial(np.abs(x) if x.ndim == 0 else np.linalg.norm(x, axis=-1))

    def alpha(self) -> float:
        """The alpha in (0, 1) with phi(2**-alpha) = 1/2, by root bracketing."""
        return brentq(lambda a: float(self.radial(2.0 ** -a)) - 0.5, 1e-9, 1.0 - 1e-9, xtol=1e-14)


BUMP = BumpProfile()


def bump_phi(x) -> float:
    return BUMP(x)


def alpha() -> float:
    return BUMP.alpha()


def domination_constant(n: int, a: float | None = None) -> float:
    a = alpha() if a is None else a
    return 2.0 ** (1.0 + a * n / 2.0) / (1.0 - 2.0 ** (-a * n / 2.0))


def _piece_values(f, k, x, js):
    ys, w, col = _sources(f)
    if len(ys) == 0:
        return np.zeros(len(js))
    x = np.asarray(x, dtype=float).reshape(1, -1)
    d, m = _pair_masses(x, ys, w, col, f, k)
    d, m = d[0], m[0]
    n = f.n
    out = []
    for j in js:
        phi = BUMP.radial(np.where(np.isfinite(d), d, 0.0) * 2.0 ** (-j)) * 2.0 ** (-j * n)
        out.append(float(np.dot(phi, m)))
    return np.array(out)


def dyadic_piece_convolve(f: GridFunction, k: Kernel, j: int, x) -> float:
    """(Omega_j * f)(x) with Omega_j = phi_j Omega and phi_j(z) = 2^{-jn} phi(2^{-j} z)."""
    _check_dims(f, k)
    return float(_piece_values(f, k, x, [j])[0])


def scale_range(f: GridFunction, x) -> range:
    x = np.asarray(x, dtype=float).reshape(-1)
    diam = float(np.linalg.norm(f.hi - f.lo))
    centre = 0.5 * (f.lo + f.hi)
    reach = diam + float(np.linalg.norm(x - centre))
    return range(math.floor(math.log2(f.h)) - 1, math.ceil(math.log2(reach)) + 2)


def domination_gap(f: GridFunction, k: Kernel, x, policy: RadiusPolicy = EXACT):
    """(M_Omega f(x), sup_j Omega_j * f(x), C_alpha); expected lhs <= C_alpha * rhs."""
    _check_dims(f, k)
    lhs = eval_maximal_at(f, k, x, policy)
    pieces = _piece_values(f, k, x, list(scale_range(f, x)))
    return lhs, float(pieces.max(initial=0.0)), domination_constant(f.n)
