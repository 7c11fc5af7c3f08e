import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisomorrey.geometry import (
    Anisotropy,
    BracketError,
    Parallelepiped,
    box_quasi_norm,
    dilate_point,
    lebesgue_measure,
    rho_quasi_norm,
    scale_parallelepiped,
)

# golden-ratio root of 1/t^2 + 1/t^4 = 1, solved by hand: t = sqrt((1 + sqrt 5) / 2)
PHI_ROOT = 1.272019649514069


def aniso_and_points(max_n=4):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(0.5, 3.0), min_size=n, max_size=n),
            st.lists(st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-6), min_size=n, max_size=n),
        )
    )


def test_euclidean_special_case():
    assert rho_quasi_norm([3.0, 4.0], (1, 1)) == pytest.approx(5.0, abs=1e-12)
    x = np.random.default_rng(0).normal(size=(500, 3))
    np.testing.assert_allclose(rho_quasi_norm(x, (1, 1, 1)), np.linalg.norm(x, axis=1), rtol=0, atol=1e-12)


def test_frozen_values():
    assert rho_quasi_norm([1.0, 1.0], (1, 2)) == pytest.approx(PHI_ROOT, rel=1e-13)
    assert rho_quasi_norm([2.0, 0.0], (2, 1)) == pytest.approx(math.sqrt(2), rel=1e-13)
    assert box_quasi_norm([8.0, -3.0], (3, 1)) == pytest.approx(3.0)


def test_origin_and_axis_points():
    assert rho_quasi_norm([0.0, 0.0], (1, 2)) == 0.0
    a = (0.7, 1.3, 2.2)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        assert rho_quasi_norm(e, a) == pytest.approx(1.0, abs=1e-14)


def test_vectorized_shapes():
    x = np.ones((4, 5, 2))
    out = rho_quasi_norm(x, (1, 2))
    assert out.shape == (4, 5)
    np.testing.assert_allclose(out, PHI_ROOT)


@given(aniso_and_points())
def test_residual_and_homogeneity(data):
    a, x = data
    x = np.array(x)
    t = rho_quasi_norm(x, a)
    if not np.any(x):
        assert t == 0.0
        return
    av = np.array(a)
    assert abs(np.sum(x ** 2 * t ** (-2 * av)) - 1) <= 1e-10
    lam = 3.7
    assert rho_quasi_norm(dilate_point(x, a, lam), a) == pytest.approx(lam * t, rel=1e-8)


@given(aniso_and_points())
def test_equivalence_with_box_norm(data):
    # |x|_a <= [x]_a <= n**(1/(2 a_min)) |x|_a
    a, x = data
    x = np.array(x)
    if not np.any(x):
        return
    r, b = rho_quasi_norm(x, a), box_quasi_norm(x, a)
    assert b * (1 - 1e-12) <= r <= b * len(a) ** (1 / (2 * min(a))) * (1 + 1e-12)


def test_invalid_input():
    with pytest.raises(ValueError):
        Anisotropy((1.0, 0.0))
    with pytest.raises(ValueError):
        rho_quasi_norm([1.0, np.nan], (1, 1))
    with pytest.raises(ValueError):
        rho_quasi_norm([1.0, 2.0, 3.0], (1, 1))
    with pytest.raises(BracketError):
        rho_quasi_norm([1e300, 1.0], (0.01, 1.0), max_iter=3)


def test_parallelepiped_measure_and_dilation():
    a = Anisotropy((1.0, 2.0, 0.5))
    E = Parallelepiped([0.1, -2.0, 3.0], 1.7, a)
    assert lebesgue_measure(E) == pytest.approx(float(np.prod(E.hi - E.lo)), rel=1e-12)
    assert lebesgue_measure(E) == pytest.approx(8 * 1.7 ** 3.5, rel=1e-12)
    for lam in (2.0, 3.0, 5.0):
        assert lebesgue_measure(scale_parallelepiped(E, lam)) == pytest.approx(lam ** 3.5 * lebesgue_measure(E),
                                                                              rel=1e-12)
    assert E.contains(E.center)
    assert not E.contains(E.hi + 1e-9)
    assert scale_parallelepiped(E, 2.0).contains_box(E)


def test_parallelepiped_rejects_bad_scale():
    with pytest.raises(ValueError):
        Parallelepiped([0.0], 0.0, (1.0,))
    with pytest.raises(ValueError):
        Parallelepiped([0.0, 1.0], 1.0, (1.0,))
