import numpy as np
import pytest

from anisomorrey.expr import (
    Const,
    Indicator,
    PowAbs,
    PowRho,
    Product,
    RandomField,
    Scale,
    SingularSampleError,
    Sum,
    parse_expr,
    sample,
)
from anisomorrey.geometry import Anisotropy
from anisomorrey.grid import Box


@pytest.mark.parametrize(
    "text, expected",
    [
        ("const(3)", Const(3.0)),
        ("powabs(-0.5)", PowAbs(-0.5, 0)),
        ("powabs(2, 1)", PowAbs(2.0, 1)),
        ("powrho(1.5)", PowRho(1.5)),
        ("ind(0:1)", Indicator(Box([0.0], [1.0]))),
        ("ind(0,1)", Indicator(Box([0.0], [1.0]))),
        ("ind(-1:1,0:2)", Indicator(Box([-1.0, 0.0], [1.0, 2.0]))),
        ("rand(7)", RandomField(7)),
    ],
)
def test_parse_atoms(text, expected):
    assert parse_expr(text) == expected


def test_parse_compound_evaluates_like_hand_built_term():
    e = parse_expr("ind(0,1)*powabs(-0.5) + const(1)")
    built = Sum((Product((Indicator(Box([0.0], [1.0])), PowAbs(-0.5, 0))), Const(1.0)))
    pts = np.array([[-0.5], [0.25], [0.81], [1.5]])
    a = Anisotropy.isotropic(1)
    np.testing.assert_allclose(e.evaluate(pts, a), built.evaluate(pts, a))
    np.testing.assert_allclose(e.evaluate(pts, a), [1.0, 3.0, 1 + 1 / 0.9, 1.0])


def test_scale_and_text_roundtrip():
    e = parse_expr("scale(2, ind(0:1))")
    assert isinstance(e, Scale)
    assert parse_expr(str(e)) == e


@pytest.mark.parametrize("bad", ["", "foo(1)", "ind(0:1,2)", "const(1) const(2)", "ind(0,1,2)", "(const(1)"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_expr(bad)


def test_powrho_uses_quasi_norm():
    a = Anisotropy((1.0, 2.0))
    v = PowRho(1.0).evaluate(np.array([[1.0, 1.0]]), a)
    assert v[0] == pytest.approx(1.272019649514069, rel=1e-12)


def test_sample_records_source_and_rejects_singular_centers():
    dom = Box([-1.0], [1.0])
    gf = sample(parse_expr("powabs(-0.5)"), dom, 8)
    assert gf.source is not None
    assert gf.values[4] == pytest.approx(0.125 ** -0.5)
    # odd cell count puts a center on the origin
    with pytest.raises(SingularSampleError):
        sample(parse_expr("powabs(-0.5)"), dom, 9)
    with pytest.raises(ValueError):
        sample(Const(1.0), dom, (4, 4))


def test_random_field_is_deterministic_across_resolutions():
    dom = Box([0.0, 0.0], [1.0, 1.0])
    a = Anisotropy((1.0, 2.0))
    coarse = sample(RandomField(3), dom, (4, 4), a)
    again = sample(RandomField(3), dom, (4, 4), a)
    np.testing.assert_array_equal(coarse.values, again.values)
    fine = sample(RandomField(3), dom, (12, 12), a)
    # cell centers of the 4x4 grid are centers of the 12x12 grid too
    np.testing.assert_allclose(fine.values[1::3, 1::3], coarse.values, rtol=0, atol=1e-14)
    assert not np.allclose(sample(RandomField(4), dom, (4, 4), a).values, coarse.values)
