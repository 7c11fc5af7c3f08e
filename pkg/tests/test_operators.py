import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisomorrey.families import BoxFamily, ScaleLadder
from anisomorrey.geometry import Anisotropy
from anisomorrey.grid import SNAP_EPS, Box, GridFunction
from anisomorrey.operators import (
    UncoveredCellError,
    family_maximal,
    maximal,
    maximal_r,
    sharp_maximal,
    weighted_maximal,
)
from anisomorrey.weights import ConstantWeight, PowerAbsWeight

A12 = Anisotropy((1.0, 2.0))


def brute_centered(f, a, ladder):
    pts = f.centers().reshape(-1, f.n)
    vals = np.abs(f.values).ravel()
    out = np.full(len(pts), -np.inf)
    for i, x in enumerate(pts):
        for t in ladder.scales:
            hw = t ** a.array + SNAP_EPS * f.cell_size
            inside = np.all(np.abs(pts - x) <= hw, axis=1)
            out[i] = max(out[i], vals[inside].mean())
    return out.reshape(f.shape)


def brute_family(f, F, wvals=None):
    pts = f.centers().reshape(-1, f.n)
    vals = np.abs(f.values).ravel()
    wv = np.ones_like(vals) if wvals is None else wvals.ravel()
    out = np.full(len(pts), -np.inf)
    for c, hw in zip(F.centers, F.half_widths):
        inside = np.all(np.abs(pts - c) <= hw + SNAP_EPS * f.cell_size, axis=1)
        if inside.any():
            avg = np.sum(vals[inside] * wv[inside]) / np.sum(wv[inside])
            out[inside] = np.maximum(out[inside], avg)
    return out.reshape(f.shape)


def random_grid(seed, shape=(9, 11), dom=((-1.0, 1.0), (-2.0, 2.0))):
    rng = np.random.default_rng(seed)
    return GridFunction(Box.from_intervals(dom), rng.normal(size=shape))


@given(st.integers(0, 10 ** 6))
def test_centered_maximal_matches_brute_force(seed):
    f = random_grid(seed)
    lad = ScaleLadder.for_grid(f, A12, q=2 ** 0.5)
    np.testing.assert_allclose(maximal(f, A12, lad).values, brute_centered(f, A12, lad), rtol=1e-12)


@given(st.integers(0, 10 ** 6))
def test_uncentered_family_maximal_matches_brute_force(seed):
    f = random_grid(seed)
    F = BoxFamily.lattice_family(f, A12, stride=2, q=2.0)
    np.testing.assert_allclose(family_maximal(f, F).values, brute_family(f, F), rtol=1e-12)
    np.testing.assert_allclose(maximal(f, A12, family=F).values, brute_family(f, F), rtol=1e-12)


def test_weighted_maximal_matches_brute_force_and_reduces_to_plain():
    f = GridFunction(Box([-1.0], [1.0]), np.random.default_rng(2).normal(size=32))
    F = BoxFamily.lattice_family(f, Anisotropy((1.0,)), stride=3)
    w = PowerAbsWeight(-0.5)
    got = weighted_maximal(f, w, F).values
    np.testing.assert_allclose(got, brute_family(f, F, w.cell_values(f)), rtol=1e-12)
    np.testing.assert_allclose(weighted_maximal(f, ConstantWeight(5.0), F).values, family_maximal(f, F).values)
    total = weighted_maximal(f, w, F, containing=False).values
    assert np.all(total == total.max()) and total.max() >= got.max() * (1 - 1e-12)


def test_uncovered_cells_raise():
    f = GridFunction(Box([-1.0], [1.0]), np.ones(16))
    F = BoxFamily.explicit(list(BoxFamily.lattice_family(f, Anisotropy((1.0,)), stride=16, count=1)))
    with pytest.raises(UncoveredCellError):
        family_maximal(f, F)


def test_indicator_profile_in_one_dimension():
    # M of 1_[-1/2,1/2] at distance d > 1/2 from 0 is 1/(2 d + 1) on a fine ladder
    dom = Box([-4.0], [4.0])
    m = 2048
    x = GridFunction.zeros(dom, m).axis_centers(0)
    f = GridFunction(dom, (np.abs(x) <= 0.5).astype(float))
    lad = ScaleLadder.for_grid(f, Anisotropy((1.0,)), q=2 ** (1 / 64))
    Mf = maximal(f, (1.0,), lad).values
    assert Mf[m // 2] == 1.0
    i = int(np.argmin(np.abs(x - 1.5)))
    assert Mf[i] == pytest.approx(1.0 / (2 * x[i] + 1.0), rel=2e-2)
    assert np.all(Mf >= np.abs(f.values))


@given(st.integers(0, 10 ** 6), st.floats(-3, 3))
def test_sublinear_and_homogeneous(seed, c):
    f, g = random_grid(seed), random_grid(seed + 1)
    lad = ScaleLadder.for_grid(f, A12)
    Mf, Mg = maximal(f, A12, lad).values, maximal(g, A12, lad).values
    Mfg = maximal(f.with_values(f.values + g.values), A12, lad).values
    assert np.all(Mfg <= Mf + Mg + 1e-12)
    np.testing.assert_allclose(maximal(f.with_values(c * f.values), A12, lad).values, abs(c) * Mf, atol=1e-12)


def test_constant_function():
    f = GridFunction(Box([-1.0, -1.0], [1.0, 1.0]), np.full((8, 8), -2.5))
    np.testing.assert_allclose(maximal(f, A12).values, 2.5)
    assert np.all(sharp_maximal(f, A12).values == 0.0)
    # the literal form measures deviation from the mean of |f|: |-2.5 - 2.5|
    assert np.all(sharp_maximal(f, A12, mode="literal").values == 5.0)
    with pytest.raises(ValueError):
        sharp_maximal(f, A12, mode="other")


def test_sharp_maximal_bounded_by_twice_maximal():
    f = random_grid(5)
    lad = ScaleLadder.for_grid(f, A12)
    assert np.all(sharp_maximal(f, A12, lad).values <= 2 * maximal(f, A12, lad).values + 1e-12)


def test_mr_increases_with_r():
    f = random_grid(3)
    lad = ScaleLadder.for_grid(f, A12)
    vals = [maximal_r(f, r, A12, lad).values for r in (0.5, 1.0, 2.0, 4.0)]
    for lo, hi in zip(vals, vals[1:]):
        assert np.all(lo <= hi * (1 + 1e-12))
    np.testing.assert_array_equal(vals[1], maximal(f, A12, lad).values)
    with pytest.raises(ValueError):
        maximal_r(f, 0.0, A12)


def test_sharp_maximal_of_step_at_the_jump():
    dom = Box([-1.0], [1.0])
    x = GridFunction.zeros(dom, 64).axis_centers(0)
    f = GridFunction(dom, (x >= 0).astype(float))
    out = sharp_maximal(f, (1.0,)).values
    # windows centered on the two cells next to 0 are balanced around the jump
    assert out[31] == pytest.approx(0.5, rel=0.07)
    assert out[32] == pytest.approx(0.5, rel=0.07)
    assert out.max() <= 0.5 + 1e-12


def test_weight_concentrated_at_origin_raises_the_maximal_function():
    dom = Box([-2.0], [2.0])
    x = GridFunction.zeros(dom, 256).axis_centers(0)
    f = GridFunction(dom, ((x >= 0) & (x <= 1)).astype(float))
    F = BoxFamily.lattice_family(f, Anisotropy((1.0,)), stride=2)
    i = int(np.searchsorted(x, 1.05))
    plain = family_maximal(f, F).values[i]
    weighted = weighted_maximal(f, PowerAbsWeight(-0.5), F).values[i]
    assert weighted > plain
