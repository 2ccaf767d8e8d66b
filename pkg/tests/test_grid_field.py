import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from roughmax.errors import InvalidGridError, UnsupportedDimension
from roughmax.grid_field import DyadicCube, GridFunction, make_grid
from roughmax.zoo import parse_function, read_grid_table, write_grid_table

grids = st.integers(1, 2).flatmap(
    lambda n: arrays(np.float64, (6,) * n, elements=st.floats(0, 50, allow_nan=False)).map(
        lambda v: GridFunction.from_values(v.ndim, [(-1.0, 2.0)] * v.ndim, v)))


def test_interval_mass():
    f = parse_function("indicator_interval:0,1", 1, 1000)
    assert f.mass() == pytest.approx(1.0, rel=1e-12)
    assert f.h == pytest.approx(1e-3)


def test_ball_mass_close_to_pi():
    f = parse_function("indicator_ball:1", 2, 256)
    assert f.mass() == pytest.approx(np.pi, rel=2e-3)


def test_superlevel_is_strict():
    f = GridFunction.from_values(1, (0, 4), [1.0, 2.0, 2.0, 3.0])
    assert f.superlevel_measure(2.0) == 1.0
    assert f.superlevel_measure(1.5) == 3.0


def test_negative_values_clamped():
    f = GridFunction.from_values(1, (0, 2), [-1.0, 2.0])
    assert f.values.tolist() == [0.0, 2.0]
    with pytest.raises(ValueError):
        GridFunction.from_values(1, (0, 2), [-1.0, 2.0], clamp=False)


def test_noncubical_cells_rejected():
    with pytest.raises(InvalidGridError):
        make_grid(2, [(0, 1), (0, 2)], 4, lambda p: np.ones(len(p)))


def test_three_dimensional_grid_rejected():
    with pytest.raises(UnsupportedDimension):
        make_grid(3, [(0, 1)] * 3, 2, lambda p: np.ones(len(p)))


def test_locate():
    f = make_grid(2, [(0, 2), (0, 2)], 2, lambda p: np.ones(len(p)))
    idx = f.locate([[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [3.0, 0.0]])
    assert idx.tolist() == [0, 2, 1, -1]


def test_support_radius():
    f = GridFunction.from_values(1, (-2, 2), [0.0, 1.0, 0.0, 0.0])
    assert f.support_radius() == 0.5
    assert f.with_values(np.zeros(4)).support_radius() == 0.0


def test_table_roundtrip(tmp_path):
    f = parse_function("gauss:0.5", 2, 16)
    p = tmp_path / "f.csv"
    write_grid_table(f, p)
    g = read_grid_table(p)
    assert np.array_equal(g.values, f.values)
    assert g.box == f.box


@given(grids, st.lists(st.floats(0.01, 60), min_size=2, max_size=8))
@settings(max_examples=60, deadline=None)
def test_superlevel_monotone_and_chebyshev(f, lams):
    lams = sorted(lams)
    meas = [f.superlevel_measure(t) for t in lams]
    assert all(a >= b for a, b in zip(meas, meas[1:]))
    assert all(m <= f.mass() / t * (1 + 1e-12) for m, t in zip(meas, lams))


@given(grids, st.floats(0.0, 10.0))
@settings(max_examples=40, deadline=None)
def test_mass_linear(f, c):
    assert (f + f.scaled(c)).mass() == pytest.approx((1 + c) * f.mass(), rel=1e-12, abs=1e-12)


@given(grids, st.floats(-5, 5))
@settings(max_examples=30, deadline=None)
def test_shift_keeps_mass(f, s):
    assert f.shifted(s).mass() == pytest.approx(f.mass(), rel=1e-12)


def test_dyadic_family():
    q = DyadicCube(2, (1, 3))
    kids = q.children()
    assert len(kids) == 4
    assert all(k.parent() == q and q.contains(k) for k in kids)
    assert all(a.disjoint(b) for i, a in enumerate(kids) for b in kids[i + 1:])
    assert q.cell_slices() == (slice(4, 8), slice(12, 16))
    assert q.side(0.25) == 1.0
    assert q.generation(0.25) == 0
