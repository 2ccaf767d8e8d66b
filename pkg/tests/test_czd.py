import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughmax.checks import random_grid_function
from roughmax.czd import cz_decompose, group_by_scale, cz_level, verify_cz
from roughmax.errors import LevelTooSmallError
from roughmax.grid_field import DyadicCube, GridFunction

seeds = st.integers(0, 2**32 - 1)


def random_case(seed):
    rng = np.random.default_rng(seed)
    f = random_grid_function(rng)
    t = float(rng.uniform(0.01, 1.0) * f.values.max())
    return f, t


def covered(d):
    mask = np.zeros(d.good.cells, dtype=bool)
    for c, _ in d.bad:
        mask[c.cell_slices()] = True
    return mask


def test_indicator_below_level():
    f = GridFunction.from_values(1, (0, 1), np.ones(8))
    d = cz_decompose(f, 2.0)
    assert d.bad == []
    assert np.array_equal(d.good.values[:8], f.values)


def test_hand_traced_spike():
    f = GridFunction.from_values(1, (0, 1), [4.0, 0.0, 0.0, 0.0])
    d = cz_decompose(f, 2.0)
    assert [c for c, _ in d.bad] == [DyadicCube(0, (0,))]
    assert np.all(d.bad[0][1] == 0)
    assert d.good.values.tolist() == [4.0, 0.0, 0.0, 0.0]
    assert d.good.values.max() == 2 * d.t
    assert d.generation(d.bad[0][0]) == -2
    assert verify_cz(d, f).passed


def test_constant_at_level_selects_nothing():
    f = GridFunction.from_values(2, [(0, 1)] * 2, np.full((4, 4), 3.0))
    assert cz_decompose(f, 3.0).bad == []


def test_root_expands_when_average_too_large():
    f = GridFunction.from_values(1, (0, 1), [8.0, 8.0])
    d = cz_decompose(f, 1.0)
    assert d.root.level >= 4
    assert verify_cz(d, f).passed


def test_level_too_small():
    f = GridFunction.from_values(2, [(0, 1)] * 2, np.full((4, 4), 1.0))
    with pytest.raises(LevelTooSmallError):
        cz_decompose(f, 1e-12)


def test_bad_inputs():
    f = GridFunction.from_values(1, (0, 1), np.zeros(4))
    with pytest.raises(ValueError):
        cz_decompose(f, 1.0)
    with pytest.raises(ValueError):
        cz_decompose(GridFunction.from_values(1, (0, 1), np.ones(4)), 0.0)


def test_cz_level():
    assert cz_level(1.0, 1, 1.0) == 1 / 16
    assert cz_level(2.0, 2, 4.0) == 1 / 128
    with pytest.raises(ValueError):
        cz_level(0.0, 1, 1.0)
    with pytest.raises(ValueError):
        cz_level(1.0, 1, -1.0)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_invariants_hold(seed):
    f, t = random_case(seed)
    d = cz_decompose(f, t)
    assert verify_cz(d, f).passed


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_good_part_is_idempotent(seed):
    f, t = random_case(seed)
    d = cz_decompose(f, t)
    assert cz_decompose(d.good, 2**f.n * t).bad == []


@given(seeds, st.floats(1.0, 8.0))
@settings(max_examples=50, deadline=None)
def test_level_monotone(seed, factor):
    f, t = random_case(seed)
    lo, hi = cz_decompose(f, t), cz_decompose(f, factor * t)
    a, b = covered(lo), covered(hi)
    size = min(a.shape[0], b.shape[0])
    core = tuple(slice(0, size) for _ in range(f.n))
    assert not np.any(b[core] & ~a[core])
    assert not np.any(b) or b.shape[0] <= a.shape[0]


@given(st.integers(1, 2), st.integers(0, 4), st.floats(0.01, 0.99))
@settings(max_examples=50, deadline=None)
def test_spike_measure_bound_is_tight(n, k, frac):
    cells = 32
    vals = np.zeros((cells,) * n)
    vals[(3,) * n] = 2.0 ** (n * k) * 10
    f = GridFunction.from_values(n, [(0.0, 1.0)] * n, vals)
    t = frac * vals.max()
    d = cz_decompose(f, t)
    measure = sum(c.side(d.h) ** n for c, _ in d.bad)
    assert f.mass() / (2**n * t) <= measure * (1 + 1e-12)
    assert measure <= f.mass() / t * (1 + 1e-12)


@given(seeds, st.floats(0.1, 10), st.floats(0.5, 20))
@settings(max_examples=50, deadline=None)
def test_cz_level_composition(seed, lam, C):
    f = random_grid_function(np.random.default_rng(seed))
    n = f.n
    t = cz_level(lam, n, C)
    d = cz_decompose(f, t)
    assert d.good.values.max() <= n * lam / (2 ** (2 * n + 1) * C) * (1 + 1e-12)
    for c, v in d.bad:
        assert np.abs(v).sum() * d.h**n <= n * lam / (2 ** (2 * n) * C) * c.side(d.h) ** n * (1 + 1e-12)
    measure = sum(c.side(d.h) ** n for c, _ in d.bad)
    assert measure <= 2 ** (3 * n + 1) * C / (n * lam) * f.mass() * (1 + 1e-12)


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_group_by_scale_partitions(seed):
    f, t = random_case(seed)
    d = cz_decompose(f, t)
    groups = group_by_scale(d)
    total = sum(np.abs(v).sum() for _, v in d.bad)
    assert sum(np.abs(B).sum() for B in groups.values()) == pytest.approx(total, rel=1e-12, abs=1e-12)
    assert set(groups) == {d.generation(c) for c, _ in d.bad}


def test_group_by_scale_edge_cases():
    f = GridFunction.from_values(1, (0, 1), [4.0, 0.0, 0.0, 0.0])
    assert list(group_by_scale(cz_decompose(f, 2.0))) == [-2]
    assert group_by_scale(cz_decompose(f, 10.0)) == {}


def test_corrupted_good_part_is_caught():
    f, t = random_case(5)
    d = cz_decompose(f, t)
    g = d.good.values.copy()
    g.flat[0] = 3 * 2**f.n * t
    d.good = d.good.with_values(g)
    failures = set(verify_cz(d, f).failures())
    # the injected value also breaks f = g + b, so that check fails too
    assert failures == {"cz-g sup bound", "cz-f reconstruction"}


def test_cube_csv():
    f = GridFunction.from_values(2, [(0, 1)] * 2, np.diag([8.0, 0.0, 0.0, 1.0]))
    d = cz_decompose(f, 1.5)
    lines = d.cubes_csv().splitlines()
    assert lines[0] == "generation,corner1,corner2,l1_of_bQ"
    assert len(lines) == 1 + len(d.bad)
    assert d.cubes_csv() == d.cubes_csv()
