from __future__ import annotations

import pytest

from complexlie.codes import GeneralSecondOrderCode
from complexlie.expr import COMPLEX_ALPHABET, REAL_ALPHABET, Sampler, add, equiv_zero, mul, parse, sub
from complexlie.expr.sampling import Region
from complexlie.family import SolutionFamily
from complexlie.symmetry import (
    CASES,
    ComplexVectorField,
    DegenerateField,
    NotASymmetry,
    RealVectorField,
    bracket,
    classify_case,
    classify_theorem_case,
    flow_invariance_check,
    is_symmetry,
    is_zero_field,
    prolong_residual,
    proportionality,
    real_bracket_combinations,
    real_components_equal,
    realify_field,
)


def P(text):
    return parse(text, COMPLEX_ALPHABET)


def F(xi, eta):
    return ComplexVectorField(P(xi), P(eta))


def RF(*comps):
    return RealVectorField(tuple(parse(c, REAL_ALPHABET) for c in comps))


S = Sampler(samples=16)


def same_field(a, b):
    return is_zero_field(ComplexVectorField(sub(a.xi, b.xi), sub(a.eta, b.eta)), S)


# prolongation ---------------------------------------------------------------------


def test_translation_is_not_a_symmetry_of_u_pp_equals_z():
    r = prolong_residual(F("1", "0"), GeneralSecondOrderCode(P("z")))
    assert equiv_zero(sub(r, P("-1")), S)


@pytest.mark.parametrize(
    "w,fields",
    [
        ("-3*u*up - u^3", [("1", "0"), ("z", "-u")]),
        ("up^2/u", [("0", "z*u"), ("0", "u")]),
        ("(up + up^3)/z", [("1/z", "0"), ("u/z", "0")]),
        ("1", [("1", "z"), ("z", "z^2")]),
        ("0", [("1", "0"), ("0", "1"), ("z", "0"), ("u", "0"), ("z^2", "z*u")]),
    ],
)
def test_known_symmetries(w, fields):
    c = GeneralSecondOrderCode(P(w))
    for xi, eta in fields:
        assert is_symmetry(F(xi, eta), c, S)


def test_non_symmetry_detected():
    assert not is_symmetry(F("0", "1"), GeneralSecondOrderCode(P("u*up")), S)


# brackets -------------------------------------------------------------------------


def test_bracket_of_translation_and_scaling():
    Z1, Z2 = F("1", "0"), F("z", "-u")
    assert same_field(bracket(Z1, Z2), Z1)


def test_bracket_antisymmetry_and_jacobi():
    A, B, C = F("z^2", "u"), F("u", "z*u"), F("exp(z)", "u^2")
    ab, ba = bracket(A, B), bracket(B, A)
    assert is_zero_field(ComplexVectorField(add(ab.xi, ba.xi), add(ab.eta, ba.eta)), S)
    j = [bracket(A, bracket(B, C)), bracket(B, bracket(C, A)), bracket(C, bracket(A, B))]
    assert is_zero_field(ComplexVectorField(add(*(t.xi for t in j)), add(*(t.eta for t in j))), S)


def test_commuting_pair_example_two():
    assert is_zero_field(bracket(F("0", "z*u"), F("0", "u")), S)


# proportionality and cases --------------------------------------------------------


def test_constant_ratio_is_not_proportional():
    p = proportionality(F("z", "u"), F("2*z", "2*u"), S)
    assert p.rho is not None and p.constant and not p.proportional
    assert equiv_zero(sub(p.rho, P("1/2")), S)


def test_nonconstant_ratio():
    p = proportionality(F("0", "z*u"), F("0", "u"), S)
    assert p.proportional and equiv_zero(sub(p.rho, P("z")), S)


def test_degenerate_second_field():
    with pytest.raises(DegenerateField):
        proportionality(F("1", "0"), F("0", "0"), S)


@pytest.mark.parametrize(
    "Z1,Z2,case",
    [
        (("0", "1"), ("0", "z"), "Case3"),
        (("0", "1"), ("0", "u"), "Case4"),
        (("1", "0"), ("0", "1"), "Case5"),
        (("1", "0"), ("z", "-u"), "Case6"),
    ],
)
def test_synthetic_cases(Z1, Z2, case):
    cc = classify_theorem_case(F(*Z1), F(*Z2), S)
    assert cc.case == case
    assert cc.commuting == cc.real_commuting


def test_case_table():
    assert {classify_case(p, c) for p in (True, False) for c in (True, False)} == set(CASES.values())


def test_stated_case_discrepancy_is_noted():
    cc = classify_theorem_case(F("1", "z"), F("z", "z^2"), S, stated_case="Case6")
    assert cc.case == "Case4" and cc.discrepancy
    assert "Case6" in cc.note


def test_not_a_symmetry_raises():
    with pytest.raises(NotASymmetry):
        classify_theorem_case(F("0", "1"), F("1", "0"), S, code=GeneralSecondOrderCode(P("u*up")))


# realification of fields ------------------------------------------------------------


def test_realify_scaling_field():
    X, Y = realify_field(F("z", "-u"))
    assert real_components_equal(X, RF("x", "y", "-f", "-g"), S)
    assert real_components_equal(Y, RF("y", "-x", "-g", "f"), S)


def test_realify_inverse_field():
    X, Y = realify_field(F("1/z", "0"))
    assert real_components_equal(X, RF("x/(x^2+y^2)", "-y/(x^2+y^2)", "0", "0"), S)
    assert real_components_equal(Y, RF("-y/(x^2+y^2)", "-x/(x^2+y^2)", "0", "0"), S)


def test_realify_translation():
    X, Y = realify_field(F("1", "0"))
    assert real_components_equal(X, RF("1", "0", "0", "0"), S)
    assert real_components_equal(Y, RF("0", "-1", "0", "0"), S)


@pytest.mark.parametrize("pair", [(("1", "0"), ("z", "-u")), (("z^2", "u"), ("u", "z*u")), (("exp(z)", "0"), ("0", "u^2"))])
def test_realify_is_a_bracket_morphism(pair):
    # X acts as Z and Y as -iZ on analytic functions, so each combination is twice the realified bracket
    Z1, Z2 = F(*pair[0]), F(*pair[1])
    X, Y = realify_field(bracket(Z1, Z2))
    c1, c2 = real_bracket_combinations(Z1, Z2)
    twice = lambda V: RealVectorField(tuple(mul(2, c) for c in V.components))  # noqa: E731
    assert real_components_equal(c1, twice(X), S)
    assert real_components_equal(c2, twice(Y), S)


def test_field_dict_round_trip():
    Z = F("1/z", "u/z")
    assert same_field(ComplexVectorField.from_dict(Z.to_dict()), Z)
    X, _ = realify_field(Z)
    assert real_components_equal(RealVectorField.from_dict(X.to_dict()), X, S)


def test_field_rejects_up():
    with pytest.raises(ValueError):
        F("up", "0")


# flow invariance ------------------------------------------------------------------


def _cubic_family():
    return SolutionFamily(
        parse("z^3/6 + c1*z + c2", set(COMPLEX_ALPHABET) | {"c1", "c2"}),
        params={"c1": Region((-1, 1), (-1, 1)), "c2": Region((-1, 1), (-1, 1))},
        domain=Region((-1, 1), (-1, 1)),
    )


def test_flow_detects_non_symmetry():
    fr = flow_invariance_check(F("1", "0"), _cubic_family(), GeneralSecondOrderCode(P("z")))
    assert fr.status == "non-symmetry"
    assert fr.ratio == pytest.approx(2.0, rel=0.2)


def test_flow_of_a_symmetry_is_second_order():
    fam = SolutionFamily(
        parse("exp(z^2/2 + a + b*z)", set(COMPLEX_ALPHABET) | {"a", "b"}),
        params={"a": Region((-0.5, 0.5), (-0.5, 0.5)), "b": Region((-0.5, 0.5), (-0.5, 0.5))},
        domain=Region((0.3, 1.2), (-0.8, 0.8)),
    )
    fr = flow_invariance_check(F("0", "z*u"), fam, GeneralSecondOrderCode(P("up^2/u + u")))
    assert fr.status in ("symmetry", "exact")
    if fr.ratio is not None:
        assert abs(fr.ratio - 4) <= 0.8
