import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisomorrey.geometry import Parallelepiped
from anisomorrey.grid import (
    Box,
    EmptyBoxError,
    GridFunction,
    SummedTable,
    box_average,
    box_count,
    box_sum,
    build_prefix,
    cell_averages,
    snap_bounds,
)


def brute_range_sum(values, lo, hi):
    sl = tuple(slice(l, h + 1) for l, h in zip(lo, hi))
    return float(values[sl].sum())


@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.integers(1, 7), min_size=n, max_size=n)), st.data())
def test_summed_table_matches_brute_force(shape, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10 ** 6)))
    values = rng.normal(size=shape)
    table = SummedTable(values)
    lo = [data.draw(st.integers(0, s - 1)) for s in shape]
    hi = [data.draw(st.integers(l, s - 1)) for l, s in zip(lo, shape)]
    assert table.range_sum(np.array(lo), np.array(hi)) == pytest.approx(brute_range_sum(values, lo, hi), abs=1e-12)


def test_summed_table_empty_and_counter():
    table = SummedTable(np.ones((4, 4)))
    out = table.range_sum(np.array([[2, 2], [0, 0]]), np.array([[1, 3], [3, 3]]))
    assert out.tolist() == [0.0, 16.0]
    assert table.lookups == 2 * 4


def test_axis_range_sum_is_outer_product_of_queries():
    vals = np.arange(12.0).reshape(3, 4)
    table = SummedTable(vals)
    los = [np.array([0, 1]), np.array([0, 2, 3])]
    his = [np.array([2, 1]), np.array([1, 3, 3])]
    out = table.axis_range_sum(los, his)
    for i, j in itertools.product(range(2), range(3)):
        assert out[i, j] == brute_range_sum(vals, (los[0][i], los[1][j]), (his[0][i], his[1][j]))


def test_snap_rule_includes_centers_on_the_boundary():
    gf = GridFunction.zeros(Box([0.0], [1.0]), (10,))
    # centers at 0.05, 0.15, ...; a box reaching exactly a center includes it
    lo, hi = snap_bounds(gf, [0.25], [0.1])
    assert (int(lo[0]), int(hi[0])) == (1, 3)
    lo, hi = snap_bounds(gf, [0.25], [0.09])
    assert (int(lo[0]), int(hi[0])) == (2, 2)
    lo, hi = snap_bounds(gf, [5.0], [0.1])
    assert lo[0] > hi[0]


def test_box_helpers():
    gf = GridFunction(Box([-1.0, -1.0], [1.0, 1.0]), np.ones((8, 8)))
    table = build_prefix(gf)
    E = Parallelepiped([0.0, 0.0], 0.5, (1, 1))
    assert box_count(gf, E) == 16
    assert box_sum(table, E, gf) == pytest.approx(16 * gf.cell_volume)
    assert box_average(table, E, gf) == pytest.approx(1.0)
    with pytest.raises(EmptyBoxError):
        box_sum(table, Parallelepiped([5.0, 5.0], 0.1, (1, 1)), gf)


def test_grid_function_geometry():
    gf = GridFunction.zeros(Box([-1.0, 0.0], [1.0, 4.0]), (4, 8))
    assert gf.cell_size.tolist() == [0.5, 0.5]
    assert gf.centers().shape == (4, 8, 2)
    assert gf.point((0, 0)).tolist() == [-0.75, 0.25]
    assert gf.nearest_index([0.1, 3.99]) == (2, 7)
    assert not gf.origin_is_center()
    assert GridFunction.zeros(Box([-1.0], [1.0]), (3,)).origin_is_center()
    with pytest.raises(ValueError):
        GridFunction(Box([0.0], [1.0]), [np.inf, 1.0])
    with pytest.raises(ValueError):
        gf.values[0, 0] = 1.0


def test_origin_cell_subdivision_recovers_singular_integral():
    # average of |x|**-1/2 over [0, h] is 2 / sqrt(h); midpoint error on the
    # neighbouring sub-cells repeats at every level, so about 1% remains
    gf = GridFunction.zeros(Box([-1.0], [1.0]), (16,))
    h = 1.0 / 8
    vals = cell_averages(gf, lambda p: np.abs(p[:, 0]) ** -0.5, depth=12)
    assert vals[8] == pytest.approx(2 / np.sqrt(h), rel=2e-2)
    assert vals[7] == pytest.approx(vals[8], rel=1e-12)
    assert vals[0] == pytest.approx((1 - h / 2) ** -0.5)


def test_box_string_roundtrip():
    b = Box([-1.0, 0.0], [1.0, 2.5])
    assert str(b) == "-1.0:1.0,0.0:2.5"
    assert Box.from_intervals([(-1, 1), (0, 2.5)]) == b
