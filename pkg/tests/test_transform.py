from __future__ import annotations

import pytest

from complexlie.codes import FirstOrderCode, GeneralSecondOrderCode, decompose
from complexlie.expr import (
    COMPLEX_ALPHABET,
    REAL_ALPHABET,
    TARGET_ALPHABET,
    Sampler,
    equiv_zero,
    parse,
    sub,
)
from complexlie.expr.sampling import Exclusion, Region
from complexlie.family import SolutionFamily
from complexlie.transform import (
    ComplexPointTransformation,
    DegenerateParameters,
    GridSpec,
    MissingInverse,
    RealPointTransformation,
    SingularPushforward,
    StageResult,
    VerificationReport,
    case6_canonical_transform,
    case6_complex,
    case6_target_code,
    complex_jacobian,
    compose,
    compose_real,
    identity_transformation,
    jacobian_nonsingular,
    pushforward_solution,
    realify_transformation,
    round_trip_residuals,
    target_residual,
    verify_linearization,
    verify_ode_linearization,
    verify_pde_linearization,
)


def P(text, extra=()):
    return parse(text, set(COMPLEX_ALPHABET) | set(extra))


def R(text):
    return parse(text, REAL_ALPHABET)


S = Sampler(samples=16)


def same(a, b, s=S):
    return bool(equiv_zero(sub(a, b), s))


def riccati_family():
    return SolutionFamily(
        P("1/(z + c)", {"c"}),
        params={"c": Region((-1, 1), (-1, 1))},
        domain=Region((-1, 1), (-1, 1)),
        exclusions=(Exclusion(P("z + c", {"c"}), 0.2),),
        label="riccati",
    )


RICCATI = FirstOrderCode(P("-u^2"))
T3 = ComplexPointTransformation(P("z"), P("1/u - z"))


# realification and composition -------------------------------------------------


def test_realify_riccati_transformation():
    rt = realify_transformation(T3)
    assert same(rt.X, R("x")) and same(rt.Y, R("y"))
    assert same(rt.F, R("f/(f^2+g^2) - x"))
    assert same(rt.G, R("-g/(f^2+g^2) - y"))


def test_identity():
    t = identity_transformation()
    rt = realify_transformation(t)
    for c, s in zip(rt.components, "xyfg"):
        assert same(c, R(s))
    assert all(equiv_zero(e) for e in round_trip_residuals(t))


def test_realify_commutes_with_composition():
    a = ComplexPointTransformation(P("z^2 + u"), P("z*u"))
    b = ComplexPointTransformation(parse("Z + U^2", TARGET_ALPHABET), parse("exp(Z)", TARGET_ALPHABET), inputs=("Z", "U"))
    lhs = realify_transformation(compose(a, b))
    rhs = compose_real(realify_transformation(a), realify_transformation(b))
    assert lhs.inputs == ("x", "y", "f", "g")
    for p, q in zip(lhs.components, rhs.components):
        assert same(p, q)


def test_round_trip_with_inverse():
    t = ComplexPointTransformation(P("z"), P("1/u - z"), parse("Z", TARGET_ALPHABET), parse("1/(U + Z)", TARGET_ALPHABET))
    assert all(equiv_zero(e) for e in round_trip_residuals(t))


def test_round_trip_detects_wrong_inverse():
    t = ComplexPointTransformation(P("z"), P("2*u"), parse("Z", TARGET_ALPHABET), parse("U", TARGET_ALPHABET))
    assert not all(equiv_zero(e) for e in round_trip_residuals(t))


def test_missing_inverse():
    with pytest.raises(MissingInverse):
        round_trip_residuals(T3)


def test_transformation_dict_round_trip():
    t = ComplexPointTransformation(P("tan(z)"), P("u/cos(z)"), parse("atan(Z)", TARGET_ALPHABET),
                                   parse("U/sqrt(1+Z^2)", TARGET_ALPHABET))
    back = ComplexPointTransformation.from_dict(t.to_dict())
    assert back == t
    rt = realify_transformation(t)
    back_rt = RealPointTransformation.from_dict(rt.to_dict())
    for p, q in zip(back_rt.components, rt.components):
        assert same(p, q)


# pushforward and ODE-level verification ---------------------------------------------


def test_pushforward_riccati_is_constant():
    curve = pushforward_solution(riccati_family(), T3, S, order=1)
    s = riccati_family().sampler(S)
    assert same(curve.U, P("c", {"c"}), s)
    assert equiv_zero(curve.Up, s)
    assert equiv_zero(target_residual(curve, FirstOrderCode(P("0"))), s)


def test_pushforward_identity_keeps_solution():
    fam = riccati_family()
    curve = pushforward_solution(fam, identity_transformation(), S, order=1)
    assert same(curve.U, fam.u, fam.sampler(S))


def test_singular_pushforward():
    with pytest.raises(SingularPushforward):
        pushforward_solution(riccati_family(), ComplexPointTransformation(P("1"), P("u")), S, order=1)


def test_riccati_verifies():
    rep = verify_ode_linearization(RICCATI, T3, FirstOrderCode(P("0")), riccati_family(), S)
    assert rep.verdict == "Pass"


def test_identity_does_not_linearize_riccati():
    rep = verify_ode_linearization(RICCATI, identity_transformation(), FirstOrderCode(P("0")), riccati_family(), S)
    assert rep.verdict == "Fail"
    assert rep.failed_stage() == "target-ode-residual"


def test_wrong_family_fails_source_stage():
    fam = SolutionFamily(P("1/(z + c)^2", {"c"}), params={"c": Region((-1, 1), (-1, 1))},
                         domain=Region((-1, 1), (-1, 1)), exclusions=(Exclusion(P("z + c", {"c"}), 0.2),))
    rep = verify_ode_linearization(RICCATI, T3, FirstOrderCode(P("0")), fam, S)
    assert rep.failed_stage() == "source-residual"


# PDE level -------------------------------------------------------------------------


def test_full_riccati_pipeline():
    rep = verify_linearization(RICCATI, T3, FirstOrderCode(P("0")), riccati_family(), sampler=S,
                               z_of_Z=(parse("Z", TARGET_ALPHABET),), tol=1e-10, pde_tol=1e-10)
    assert rep.verdict == "Pass", rep.to_text()
    names = [s.name for s in rep.stages]
    assert names[-4:] == ["source-pde-residual", "jacobian", "target-pde-residual", "fd-oracle-residual"]
    assert rep.stage("fd-oracle-residual").max_residual < 1e-4


def test_wrong_real_transformation_fails():
    bad = RealPointTransformation(R("x"), R("y"), R("f/(f^2+g^2) - x"), R("g/(f^2+g^2) - y"))
    rep = verify_pde_linearization(decompose(RICCATI), bad, decompose(FirstOrderCode(P("0"))), riccati_family(),
                                   GridSpec(6, 6, n_params=2), tol=1e-10)
    assert rep.verdict == "Fail"
    assert rep.failed_stage() == "target-pde-residual"


def test_fd_stage_skipped_without_inverse():
    rep = verify_pde_linearization(decompose(RICCATI), realify_transformation(T3), decompose(FirstOrderCode(P("0"))),
                                   riccati_family(), GridSpec(6, 6, n_params=2), tol=1e-10)
    fd = rep.stage("fd-oracle-residual")
    assert not fd.executed
    assert rep.verdict == "Pass"


def test_grid_spec_parse():
    g = GridSpec.parse("8x10")
    assert (g.nx, g.ny) == (8, 10)


def test_report_records_have_no_timing():
    rep = verify_ode_linearization(RICCATI, T3, FirstOrderCode(P("0")), riccati_family(), S, label="r")
    for rec in rep.to_records():
        assert not any("time" in k or "elapsed" in k for k in rec)
    assert "r" in rep.to_text()


def test_stage_result_lower_bound():
    assert StageResult("jacobian", 0.5, 0.5, 10, 1e-6, lower_bound=True).passed
    assert not StageResult("jacobian", 1e-9, 1e-9, 10, 1e-6, lower_bound=True).passed
    # no stages means no evidence
    assert VerificationReport("empty").verdict == "Fail"


# Jacobian --------------------------------------------------------------------------


def test_identity_jacobian_is_one():
    ok, mn = jacobian_nonsingular(realify_transformation(identity_transformation()), S)
    assert ok and mn == pytest.approx(1.0)


def test_constant_map_is_singular():
    ok, mn = jacobian_nonsingular(realify_transformation(ComplexPointTransformation(P("1"), P("2"))), S)
    assert not ok and mn == 0


def test_real_jacobian_is_squared_modulus_of_complex_one():
    t = ComplexPointTransformation(P("z^2 + u"), P("z*u^2"))
    rt = realify_transformation(t)
    _, mn = jacobian_nonsingular(rt, S)
    from complexlie.transform import jacobian_matrix
    import numpy as np
    from complexlie.transform import evaluate_at

    b = {"z": 0.3 + 0.2j, "u": -0.7 + 0.4j}
    rb = {"x": 0.3, "y": 0.2, "f": -0.7, "g": 0.4}
    m = np.array([[evaluate_at(e, rb).real for e in row] for row in jacobian_matrix(rt)])
    assert abs(np.linalg.det(m)) == pytest.approx(abs(evaluate_at(complex_jacobian(t), b)) ** 2)


# case-6 canonical map ------------------------------------------------------------------


def test_case6_example_parameters():
    rt = case6_canonical_transform(-1, 0, 6, 0)
    assert rt.inputs == ("X", "Y", "F", "G")
    t = case6_complex(-1, 6)
    for p, q in zip(rt.components, realify_transformation(t).components):
        assert same(p, q)
    # Z~ = U - 2 Z, U~ = U^2/2 - 2 Z U + (2 - 1/2) Z^2
    assert same(t.Z, parse("U - 2*Z", TARGET_ALPHABET))
    assert same(t.U, parse("U^2/2 - 2*Z*U + 3/2*Z^2", TARGET_ALPHABET))


def test_case6_unit_parameters():
    rt = case6_canonical_transform(1, 0, 0, 0)
    assert same(rt.X, R("F")) and same(rt.Y, R("G"))
    assert same(rt.F, R("(F^2 - G^2)/2 + (X^2 - Y^2)/2"))
    assert same(rt.G, R("F*G + X*Y"))


def test_case6_degenerate():
    with pytest.raises(DegenerateParameters):
        case6_canonical_transform(0, 0, 1, 1)


@pytest.mark.parametrize("params", [(-1, 0, 6, 0), (2, 0, 1, 0), (1, 1, 1, 1), (0, 2, 3, 0)])
def test_case6_literal_agrees_when_b2_abar2_is_real(params):
    a = complex(params[0], params[1])
    b = complex(params[2], params[3])
    assert (b * b * a.conjugate() ** 2).imag == pytest.approx(0)
    lit = case6_canonical_transform(*params, literal=True)
    norm = case6_canonical_transform(*params)
    for p, q in zip(lit.components, norm.components):
        assert same(p, q)


def test_case6_literal_differs_in_last_component_otherwise():
    params = (1, 0.5, 1, 2)
    a, b = complex(*params[:2]), complex(*params[2:])
    assert abs((b * b * a.conjugate() ** 2).imag) > 0.1
    lit = case6_canonical_transform(*params, literal=True)
    norm = case6_canonical_transform(*params)
    agree = [same(p, q) for p, q in zip(lit.components, norm.components)]
    assert agree == [True, True, True, False]


def test_case6_target_code_is_scaled_second_derivative():
    c = case6_target_code(-1, 6)
    assert isinstance(c, GeneralSecondOrderCode)
    assert "z" in c.w.free_symbols
