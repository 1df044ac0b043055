from __future__ import annotations

import cmath
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complexlie.expr import (
    COMPLEX_ALPHABET,
    REAL_ALPHABET,
    Apply,
    DuplicateBinding,
    ExprSyntaxError,
    Pow,
    PoleOrSingularity,
    Sampler,
    SamplerExhausted,
    Sum,
    UnboundVariable,
    UnknownFunction,
    UnknownSymbol,
    Var,
    add,
    const,
    binding,
    derivative_agreement,
    diff,
    equiv_zero,
    evaluate,
    parse,
    realify,
    sub,
    to_text,
)
from complexlie.expr.sampling import Exclusion, Region


def P(text: str):
    return parse(text, COMPLEX_ALPHABET)


def same(a, b, sampler=None) -> bool:
    return bool(equiv_zero(sub(a, b), sampler or Sampler(samples=16)))


# parsing ------------------------------------------------------------------


def test_parse_power_node():
    e = P("u^2")
    assert isinstance(e, Pow)
    assert e.base == Var("u")


def test_parse_apply_node():
    e = P("tan(z)")
    assert isinstance(e, Apply) and e.fn == "tan" and e.arg == Var("z")


def test_parse_cubic_right_hand_side_is_a_sum():
    e = P("-3*u*up - u^3")
    assert isinstance(e, Sum)
    assert len(e.children) == 2
    assert same(e, P("-(u^3) - 3*up*u"))


def test_power_binds_tighter_than_unary_minus():
    assert evaluate(P("-2^2"), {}) == -4
    # right associative
    assert evaluate(P("2^3^2"), {}) == 2 ** 9


def test_imaginary_unit_literal():
    assert evaluate(P("i*i"), {}) == -1
    assert evaluate(P("2.5 + 3*i"), {}) == complex(2.5, 3)


@pytest.mark.parametrize(
    "text,exc",
    [
        ("u +", ExprSyntaxError),
        ("(u", ExprSyntaxError),
        ("u $ 2", ExprSyntaxError),
        ("q + 1", UnknownSymbol),
        ("abs(z)", UnknownFunction),
        ("conj(u)", UnknownFunction),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        P(text)


def test_syntax_error_reports_position():
    with pytest.raises(ExprSyntaxError) as info:
        P("u * * z")
    assert "4" in str(info.value) or "position" in str(info.value)


def test_real_alphabet_rejects_complex_symbols():
    with pytest.raises(UnknownSymbol):
        parse("u + x", REAL_ALPHABET)


def test_canonical_order_is_structural():
    assert P("z*u + up") == P("up + u*z")


def test_constant_folding():
    assert P("2*3 + 1") == const(7)


# random expression strategy -------------------------------------------------------

_atoms = st.sampled_from(["z", "u", "up", "1", "2", "3", "i", "0.5"])


def _combine(children):
    binop = st.tuples(children, st.sampled_from(["+", "-", "*", "/"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})"
    )
    powr = st.tuples(children, st.integers(min_value=2, max_value=3)).map(lambda t: f"({t[0]})^{t[1]}")
    fn = st.tuples(st.sampled_from(["sin", "cos", "exp", "sinh", "cosh"]), children).map(lambda t: f"{t[0]}({t[1]})")
    return binop | powr | fn | children.map(lambda c: f"-({c})")


expressions = st.recursive(_atoms, _combine, max_leaves=8)


@settings(max_examples=60, deadline=None)
@given(expressions)
def test_print_parse_round_trip(text):
    e = P(text)
    again = P(to_text(e))
    assert again == e
    assert P(to_text(again)) == again


@settings(max_examples=40, deadline=None)
@given(expressions, st.integers(min_value=0, max_value=10_000))
def test_realify_exactness_random(text, seed):
    e = P(text)
    re, im = realify(e)
    rng = random.Random(seed)
    zv, uv, pv = (complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3))
    b = {"z": zv, "u": uv, "up": pv, "x": zv.real, "y": zv.imag, "f": uv.real, "g": uv.imag, "h": pv.real, "l": pv.imag}
    try:
        value = evaluate(e, b)
    except PoleOrSingularity:
        return
    split = evaluate(re, b) + 1j * evaluate(im, b)
    assert abs(value - split) <= 1e-9 * (1 + abs(value))


# differentiation ---------------------------------------------------------------


@pytest.mark.parametrize(
    "text,sym,expected",
    [("z^2", "z", "2*z"), ("1/u", "u", "-1/u^2"), ("tan(z)", "z", "1 + tan(z)^2"), ("u*up", "up", "u")],
)
def test_diff_examples(text, sym, expected):
    assert same(diff(P(text), sym), P(expected))


def test_diff_of_missing_symbol_is_zero():
    assert diff(P("sin(z)"), "u") == const(0)


def test_derivative_agreement_with_finite_differences():
    e = P("exp(z*u)/(1 + u^2) + sqrt(z) * log(u)")
    s = Sampler(samples=40, exclusions=(Exclusion(P("z"), cut=True), Exclusion(P("u"), cut=True)))
    checks = derivative_agreement(e, s)
    assert {c.symbol for c in checks} == {"u", "z"}
    for c in checks:
        assert c.holds(), c


# evaluation ---------------------------------------------------------------------


def test_eval_examples():
    assert evaluate(P("u^2"), {"u": 1 + 1j}) == pytest.approx(2j)
    assert evaluate(P("tan(z)"), {"z": 0}) == 0


def test_eval_pole():
    with pytest.raises(PoleOrSingularity):
        evaluate(P("1/u"), {"u": 0})
    with pytest.raises(PoleOrSingularity):
        evaluate(P("log(u)"), {"u": 0})


def test_eval_unbound():
    with pytest.raises(UnboundVariable):
        evaluate(P("z + u"), {"z": 1})


def test_duplicate_binding():
    with pytest.raises(DuplicateBinding):
        binding(("z", 1), ("z", 2))


def test_principal_branches():
    assert evaluate(P("log(u)"), {"u": -1 + 1e-300j}) == pytest.approx(cmath.log(-1 + 1e-300j))
    assert evaluate(P("sqrt(u)"), {"u": 1j}) == pytest.approx(cmath.sqrt(1j))


# realify -------------------------------------------------------------------------


def test_realify_cube():
    re, im = realify(P("u^3"))
    assert same(re, parse("f^3 - 3*f*g^2", REAL_ALPHABET))
    assert same(im, parse("3*f^2*g - g^3", REAL_ALPHABET))


def test_realify_tan():
    re, im = realify(P("tan(z)"))
    den = "(cos(x)^2 + sinh(y)^2)"
    assert same(re, parse(f"(1/2*sin(2*x))/{den}", REAL_ALPHABET))
    assert same(im, parse(f"(1/2*sinh(2*y))/{den}", REAL_ALPHABET))


def test_realify_imaginary_unit():
    assert realify(P("i")) == (const(0), const(1))


def test_realify_output_is_real_alphabet():
    re, im = realify(P("exp(z)*up + log(u)"))
    assert (re.free_symbols | im.free_symbols) <= set(REAL_ALPHABET)


def test_cauchy_riemann_on_realified_function():
    re, im = realify(P("z^3 + exp(z)/(2 + z)"))
    s = Sampler(samples=16, default=Region((-1, 1), (-1, 1)))
    assert equiv_zero(sub(diff(re, "x"), diff(im, "y")), s)
    assert equiv_zero(add(diff(re, "y"), diff(im, "x")), s)


# zero test ------------------------------------------------------------------------


def test_equiv_zero_examples():
    assert equiv_zero(P("z - z"))
    assert equiv_zero(P("sin(z)^2 + cos(z)^2 - 1"))
    zt = equiv_zero(P("z*u"))
    assert not zt and zt.max_residual > 1e-3


def test_sampler_is_deterministic():
    s = Sampler(seed=7, samples=5)
    assert s.points(["z", "u"]) == s.points(["z", "u"])
    assert s.points(["z"]) != s.fork(1).points(["z"])


def test_sampler_exhausted():
    s = Sampler(samples=3, max_rejections=20, exclusions=(Exclusion(P("z"), min_abs=100.0),))
    with pytest.raises(SamplerExhausted):
        s.points(["z"])
