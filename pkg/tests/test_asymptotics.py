import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughmax import asymptotics as asy
from roughmax.errors import SupportViolation, UnsupportedDimension
from roughmax.grid_field import GridFunction, make_grid
from roughmax.sphere_kernel import constant_kernel, l1_norm, make_sphere_grid
from roughmax.zoo import parse_function, parse_kernel

S0 = make_sphere_grid(1)
ONE_1D = constant_kernel(1)


@pytest.fixture(scope="module")
def interval():
    return parse_function("indicator_interval:0,1", 1, 1000)


def test_far_field_value():
    k = parse_kernel("abscos:0.5")
    x = np.array([[3.0, 4.0], [0.0, -2.0]])
    got = asy.far_field_value(k, 2.0, x)
    assert got == pytest.approx([2 * 0.6**0.5 / 25, 0.0])
    with pytest.raises(ValueError):
        asy.far_field_value(k, 1.0, [0.0, 0.0])


def test_homogeneous_measure_constant(circle):
    assert asy.homogeneous_superlevel_measure(constant_kernel(2), circle, 0.5) == pytest.approx(2 * math.pi, rel=1e-12)


@given(st.floats(0.01, 10), st.floats(0.01, 10))
@settings(max_examples=30, deadline=None)
def test_tail_at_zero_radius_is_homogeneous(m, lam):
    g = make_sphere_grid(2, 256)
    k = parse_kernel("raisedcos:1")
    assert asy.tail_superlevel_measure(k, g, m, lam, 0.0) == pytest.approx(
        asy.homogeneous_superlevel_measure(k.scaled(m), g, lam), rel=1e-13)


@given(st.floats(0.01, 5), st.floats(0.0, 50))
@settings(max_examples=30, deadline=None)
def test_tail_closed_form_1d(lam, R):
    # {|x| > R : 1/|x| > lam} has measure 2 (1/lam - R)_+
    assert asy.tail_superlevel_measure(ONE_1D, S0, 1.0, lam, R) == pytest.approx(2 * max(0.0, 1 / lam - R), abs=1e-12)


def test_homogeneous_measure_against_grid(circle):
    # sampled field Omega(x)/|x|^2 on a box containing the level set
    k = parse_kernel("abscos:0.5")
    for lam in (0.5, 1.0, 2.0):
        reach = 1.0 / math.sqrt(lam) * 1.01
        grid = make_grid(2, [(-reach, reach)] * 2, 1200, lambda p: asy.far_field_value(k, 1.0, p))
        assert grid.superlevel_measure(lam) == pytest.approx(
            asy.homogeneous_superlevel_measure(k, circle, lam), rel=0.02)


def test_hybrid_products_1d_closed_form(interval):
    lam = 0.2 * 2.0 ** -np.arange(6)
    curve = asy.hybrid_distribution(interval, ONE_1D, lam, R=40.0, eval_cells=2000, sphere=S0)
    assert np.all(np.abs(curve.product - (2 - lam)) <= 0.01 * (2 - lam))


def test_hybrid_zero_function():
    f = GridFunction.from_values(1, (0, 1), np.zeros(10))
    curve = asy.hybrid_distribution(f, ONE_1D, [1.0, 0.5], sphere=S0)
    assert np.all(curve.total == 0)


def test_hybrid_rejects_small_truncation(interval):
    with pytest.raises(SupportViolation) as info:
        asy.hybrid_distribution(interval, ONE_1D, [1.0, 0.5], R=2.0, sphere=S0)
    assert info.value.support_radius == pytest.approx(interval.support_radius())


def test_schedule_validation(interval):
    with pytest.raises(ValueError):
        asy.hybrid_distribution(interval, ONE_1D, [0.5, 1.0], sphere=S0)
    with pytest.raises(ValueError):
        asy.limiting_weak_type(interval, ONE_1D, [0.4, 0.2, 0.1], sphere=S0)


def test_limit_1d(interval):
    est = asy.limiting_weak_type(interval, ONE_1D, 0.2 * 2.0 ** -np.arange(6), R=40.0, eval_cells=2000, sphere=S0)
    assert est.target == pytest.approx(2.0)
    assert est.relative_error <= 0.01


def test_limit_translation_and_scaling(interval):
    sched = 0.2 * 2.0 ** -np.arange(6)
    base = asy.limiting_weak_type(interval, ONE_1D, sched, R=40.0, eval_cells=2000, sphere=S0)
    moved = asy.limiting_weak_type(interval.shifted(-0.5), ONE_1D, sched, R=40.0, eval_cells=2000, sphere=S0)
    assert moved.target == pytest.approx(base.target, rel=1e-12)
    assert moved.estimate == pytest.approx(base.estimate, rel=0.01)
    scaled = asy.limiting_weak_type(interval.scaled(3.0), ONE_1D, 3 * sched, R=40.0, eval_cells=2000, sphere=S0)
    assert scaled.target == pytest.approx(3 * base.target, rel=1e-12)
    assert scaled.estimate == pytest.approx(3 * base.estimate, rel=0.01)


def test_curve_csv(interval, tmp_path):
    curve = asy.hybrid_distribution(interval, ONE_1D, [0.4, 0.2], R=8.0, eval_cells=200, sphere=S0)
    text = curve.to_csv(tmp_path / "c.csv")
    lines = text.splitlines()
    assert lines[0] == "lambda,near,tail,total,product"
    assert len(lines) == 3
    assert (tmp_path / "c.csv").read_text() == text
    row = [float(v) for v in lines[1].split(",")]
    assert row[3] == row[1] + row[2]


def test_discrepancy_zero_kernel(interval):
    curve = asy.discrepancy_limit(interval, constant_kernel(1, 0.0), [0.4, 0.2, 0.1], sphere=S0)
    assert np.all(curve.product == 0)


def test_discrepancy_near_dirac_decreases():
    vals = np.zeros(64)
    vals[32] = 64.0
    f = GridFunction.from_values(1, (-1, 1), vals)
    lam = 0.2 * 2.0 ** -np.arange(8)
    curve = asy.discrepancy_limit(f, ONE_1D, lam, cells=64, sphere=S0)
    assert np.all(np.diff(curve.product) < 0)
    assert curve.product[-1] < 0.05 * f.mass()


def test_default_truncation(circle):
    R = asy.default_truncation(constant_kernel(2), circle, 4.0)
    assert R(1.0) == pytest.approx(4.0)


def test_sandwich_constant_kernel(circle):
    f = parse_function("indicator_ball:1", 2, 32)
    res = asy.sandwich_check(constant_kernel(2), f, 0.1, [20.0, 0.0], circle)
    assert res.ok
    assert res.lower <= res.value <= res.upper


def test_sandwich_zero_function(circle):
    f = GridFunction.from_values(2, [(-1, 1)] * 2, np.zeros((4, 4)))
    res = asy.sandwich_check(constant_kernel(2), f, 0.1, [3.0, 0.0], circle)
    assert res.ok and res.value == 0 and res.lower <= 0 <= res.upper


def test_sandwich_rejects_close_points(circle):
    f = parse_function("indicator_ball:1", 2, 16)
    R_eps, _ = asy.sandwich_radius(parse_kernel("raisedcos:1"), f, 0.1, circle)
    with pytest.raises(ValueError):
        asy.sandwich_check(parse_kernel("raisedcos:1"), f, 0.1, [R_eps * 0.9, 0.0], circle)


def test_sandwich_needs_circle():
    f = parse_function("indicator_interval:0,1", 1, 16)
    with pytest.raises(UnsupportedDimension):
        asy.sandwich_radius(ONE_1D, f, 0.1)


def test_sandwich_radius_uses_arcsin(circle):
    f = parse_function("indicator_ball:1", 2, 16)
    R_eps, d = asy.sandwich_radius(parse_kernel("raisedcos:1"), f, 0.1, circle)
    assert 0 < d < 0.2
    assert R_eps == pytest.approx(f.support_radius() / math.asin(d))


def test_recentred_interval_total_follows_far_field_model():
    # exact level set is |x| < 19.5 (measure 39); the far-field model 1/|x| beyond R = 4
    # gives 8 (near grid) + 2 (20 - 4) (tail) = 40
    f = parse_function("indicator_interval:-0.5,0.5", 1, 1000)
    curve = asy.hybrid_distribution(f, ONE_1D, [0.1, 0.05], R=4.0, eval_cells=2000, sphere=S0)
    assert curve.near[-1] == pytest.approx(8.0, abs=1e-9)
    assert curve.tail[-1] == pytest.approx(32.0, rel=1e-3)
    assert abs(curve.total[-1] - 39.0) / 39.0 > 0.02
