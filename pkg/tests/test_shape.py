from fractions import Fraction

import pytest

from latsusy import shape, sqm
from latsusy.errors import InvalidArgument, NotShapeInvariant
from latsusy.powersum import PowerSum
from latsusy.units import Units

INV = PowerSum.monomial(1, -1)


def R(l):
    return Fraction(2 * l + 3, (l + 1) ** 2 * (l + 2) ** 2)


@pytest.mark.parametrize("l, rest", [(0, Fraction(3, 4)), (1, Fraction(5, 36))])
def test_coulomb_rest(l, rest):
    check = shape.check_shape_invariance(shape.coulomb_model(), l)
    assert check.holds and check.rest_extracted == rest and check.residual.is_zero()


def test_inverse_square_family_not_shape_invariant():
    model = shape.ShapeInvariantModel(
        "inverse-square",
        family=lambda a: sqm.Superpotential(PowerSum([(a, -2)])),
        phi=lambda a: a,
    )
    check = shape.check_shape_invariance(model, 1)
    assert not check.holds
    assert check.residual == PowerSum([(-4, -3)])  # 2 Delta1(n^-2)
    with pytest.raises(NotShapeInvariant) as info:
        shape.algebraic_spectrum(model, 1, 3)
    assert info.value.parameter == 1


def test_float_parameter_uses_relative_tolerance():
    check = shape.check_shape_invariance(shape.coulomb_model(), 0.3)
    assert check.holds
    assert check.rest_extracted == pytest.approx(float(2 * 0.3 + 3) / (1.3**2 * 2.3**2), rel=1e-12)


def test_spectrum_examples():
    spec = shape.algebraic_spectrum(shape.coulomb_model(), 0, 3)
    assert spec.e_susy == [0, Fraction(3, 4), Fraction(8, 9)]
    assert spec.e_paper == [1, Fraction(7, 4), Fraction(17, 9)]
    assert spec.trail == (0, 1, 2)
    assert [lv.parameter for lv in spec.levels] == [0, 1, 2]


def test_spectrum_zero_levels():
    assert shape.algebraic_spectrum(shape.coulomb_model(), 0, 0).levels == ()
    with pytest.raises(InvalidArgument):
        shape.algebraic_spectrum(shape.coulomb_model(), 0, -1)


@pytest.mark.parametrize("l", range(4))
def test_parameter_trail_shift(l):
    model = shape.coulomb_model()
    here = shape.algebraic_spectrum(model, l, 6).e_susy
    there = shape.algebraic_spectrum(model, l + 1, 5).e_susy
    assert [a - b for a, b in zip(here[1:], there)] == [R(l)] * 5


def test_spectrum_nondecreasing():
    e = shape.algebraic_spectrum(shape.coulomb_model(), 2, 15).e_susy
    assert all(b >= a for a, b in zip(e, e[1:]))


def test_hierarchy():
    model = shape.coulomb_model()
    members = shape.hamiltonian_hierarchy(model, 0, 3)
    assert members[0].offset == 0 and members[0].potential == 1 - 2 * INV
    assert members[1].potential.coefficient(-2) == 2
    assert members[1].potential.constant_term == Fraction(1, 4)
    assert [m.offset for m in members] == [0, R(0), R(0) + R(1)]
    assert [m.parameter for m in members] == [0, 1, 2]
    assert len(shape.hamiltonian_hierarchy(model, 0, 1)) == 1
    with pytest.raises(InvalidArgument):
        shape.hamiltonian_hierarchy(model, 0, 0)


def test_declared_rest_mismatch_detected():
    good = shape.coulomb_model()
    bad = shape.ShapeInvariantModel("wrong", good.family, good.phi, rest=lambda l: 1)
    with pytest.raises(NotShapeInvariant):
        shape.algebraic_spectrum(bad, 0, 2)


def test_free_model():
    spec = shape.algebraic_spectrum(shape.get_model("free"), 0, 4)
    assert spec.e_susy == [0, 0, 0, 0]


def test_unknown_model():
    with pytest.raises(InvalidArgument):
        shape.get_model("morse")


def test_model_from_config_reproduces_coulomb():
    spec = {
        "name": "coulomb-custom",
        "superpotential": [["1/(a+1)", 0], ["-(a+1)*p", -1]],
        "phi": {"scale": 1, "shift": 1},
        "rest": "(2*a+3)/((a+1)**2*(a+2)**2)",
        "e0": "1/(a+1)**2",
    }
    custom = shape.model_from_config(spec)
    ref = shape.coulomb_model()
    assert shape.algebraic_spectrum(custom, 0, 8).e_susy == shape.algebraic_spectrum(ref, 0, 8).e_susy
    assert shape.algebraic_spectrum(custom, 1, 3).e_paper == shape.algebraic_spectrum(ref, 1, 3).e_paper


def test_model_from_config_units():
    spec = {"superpotential": [["1/(a+1)", 0], ["-(a+1)*p", -1]], "phi": {"shift": 1}}
    units = Units(a=Fraction(1, 2))
    custom = shape.model_from_config(spec, units)
    assert custom.family(0).w == shape.coulomb_model(units).family(0).w


@pytest.mark.parametrize(
    "spec",
    [{}, {"superpotential": [[1, 2, 3]]}, {"superpotential": [["import os", 0]]}, {"superpotential": [[None, 0]]}],
)
def test_model_from_config_rejects_bad_specs(spec):
    with pytest.raises(ValueError):
        shape.model_from_config(spec)
