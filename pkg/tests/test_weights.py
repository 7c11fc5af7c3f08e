import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisomorrey.families import BoxFamily
from anisomorrey.geometry import Anisotropy, Parallelepiped
from anisomorrey.grid import Box, GridFunction
from anisomorrey.weights import (
    ConstantWeight,
    GridWeight,
    NonIntegrableWeight,
    PowerAbsWeight,
    PowerRhoWeight,
    a1_characteristic,
    ap_characteristic,
    doubling_constants,
    dual_exponent,
    parse_weight,
    power_ap_predicate,
    weight_measure,
)

A1 = Anisotropy((1.0,))


def origin_family(scales, a=A1):
    return BoxFamily.explicit([Parallelepiped(np.zeros(a.n), t, a) for t in scales])


def test_exact_a2_of_root_weight():
    # (avg |x|^a)(avg |x|^-a) = 1/(1 - a^2) on any interval centered at 0
    rep = ap_characteristic(PowerAbsWeight(0.5), 2.0, origin_family([0.1, 0.5, 1.0]), backend="exact")
    assert rep.characteristic == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert rep.backend == "exact"


def test_exact_doubling_of_inverse_root_weight():
    F = origin_family([0.125, 0.25])
    res = doubling_constants(PowerAbsWeight(-0.5), F, domain=Box([-1.0], [1.0]), backend="exact")
    assert res.D == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert res.D1 == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert res.tested == 2 and res.skipped == 0


def test_doubling_too_many_skipped():
    F = origin_family([0.75, 0.9, 0.1])
    with pytest.raises(ValueError):
        doubling_constants(ConstantWeight(), F, domain=Box([-1.0], [1.0]))


def test_constant_weight_is_a_p_with_constant_one():
    gf = GridFunction.zeros(Box([-1.0, -1.0], [1.0, 1.0]), (8, 8))
    a = Anisotropy((1.0, 2.0))
    F = BoxFamily.lattice_family(gf, a, stride=2, count=3)
    assert ap_characteristic(ConstantWeight(3.0), 2.0, F, gf, backend="quadrature").characteristic == pytest.approx(1.0)
    assert a1_characteristic(ConstantWeight(3.0), F, gf) == pytest.approx(1.0)


def test_non_integrable_dual_power():
    # |x|**2 with p = 2 has dual power |x|**-2
    with pytest.raises(NonIntegrableWeight):
        ap_characteristic(PowerAbsWeight(2.0), 2.0, origin_family([0.5]), backend="exact")


def test_quadrature_converges_at_the_square_root_rate():
    # the dual factor |x|**-1/2 leaves an O(h**1/2) snap error, so each halving
    # of h shrinks the error by about sqrt(2)
    w = PowerAbsWeight(0.5)
    dom = Box([-1.0], [1.0])
    errs = []
    for m in (64, 128, 256, 512):
        gf = GridFunction.zeros(dom, m)
        F = BoxFamily.explicit([Parallelepiped([0.0], 0.5, A1)])
        errs.append(abs(ap_characteristic(w, 2.0, F, gf, backend="quadrature").characteristic - 4.0 / 3.0))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.3) & (ratios < 1.5)), ratios


@given(st.integers(0, 10 ** 6), st.floats(1.1, 4.0))
def test_ap_is_at_least_one_and_decreases_in_p(seed, p):
    rng = np.random.default_rng(seed)
    gf = GridFunction(Box([0.0], [1.0]), rng.uniform(0.1, 5.0, size=16))
    w = GridWeight(gf)
    F = BoxFamily.lattice_family(gf, A1, stride=1, q=2.0)
    ap = ap_characteristic(w, p, F, gf).characteristic
    assert ap >= 1.0 - 1e-12
    assert ap_characteristic(w, p + 1.0, F, gf).characteristic <= ap * (1 + 1e-12)
    assert a1_characteristic(w, F, gf) >= ap * (1 - 1e-12)


@pytest.mark.parametrize(
    "alpha, a, p, expected",
    [
        (-1.0, (1.0,), 2.0, False),
        (-0.99, (1.0,), 2.0, True),
        (0.99, (1.0,), 2.0, True),
        (1.0, (1.0,), 2.0, False),
        (2.5, (1.0, 2.0), 2.0, True),
        (3.0, (1.0, 2.0), 2.0, False),
        (0.0, (1.0, 2.0), 1.0, True),
        (0.1, (1.0, 2.0), 1.0, False),
        (-2.9, (1.0, 2.0), 1.0, True),
    ],
)
def test_power_predicate(alpha, a, p, expected):
    assert power_ap_predicate(alpha, a, p) is expected


def test_measure_backends_agree_for_smooth_weights():
    a = Anisotropy((1.0,))
    E = Parallelepiped([0.3], 0.25, a)
    gf = GridFunction.zeros(Box([-1.0], [1.0]), 4096)
    w = PowerRhoWeight(1.0, a)
    exact = weight_measure(w, E, backend="exact")
    assert exact == pytest.approx(0.3 * 0.5, rel=1e-14)
    assert weight_measure(w, E, gf, backend="quadrature") == pytest.approx(exact, rel=1e-3)


def test_parse_weight_and_errors(tmp_path):
    a = Anisotropy((1.0, 2.0))
    assert isinstance(parse_weight("const:2"), ConstantWeight)
    assert isinstance(parse_weight("powabs:-0.5"), PowerAbsWeight)
    assert isinstance(parse_weight("powrho:1", a), PowerRhoWeight)
    for bad in ("powrho:1", "const:", "nope:1", "const:-1"):
        with pytest.raises(ValueError):
            parse_weight(bad)
    with pytest.raises(ValueError):
        dual_exponent(1.0)
    assert dual_exponent(3.0) == -0.5


def test_grid_weight_lookup_and_validation():
    gf = GridFunction(Box([0.0], [1.0]), np.array([1.0, 2.0, 3.0, 4.0]))
    w = GridWeight(gf)
    np.testing.assert_array_equal(w.pointwise([[0.1], [0.3], [0.99]]), [1.0, 2.0, 4.0])
    with pytest.raises(ValueError):
        GridWeight(gf.with_values(np.array([1.0, 0.0, 1.0, 1.0])))
    with pytest.raises(ValueError):
        w.cell_values(GridFunction.zeros(Box([0.0], [1.0]), 8))
