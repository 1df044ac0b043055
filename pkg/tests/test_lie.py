from __future__ import annotations

import pytest

from complexlie.codes import CubicCode, GeneralSecondOrderCode, real_coefficients
from complexlie.corpus import list_fixtures, load_fixture
from complexlie.expr import COMPLEX_ALPHABET, REAL_ALPHABET, Sampler, equiv_zero, parse, sub
from complexlie.lie import (
    LINEARIZABLE,
    NOT_LINEARIZABLE,
    check_linearizable,
    compare_paper_literal,
    complex_conditions,
    mapping_table,
    real_conditions,
)


def P(text):
    return parse(text, COMPLEX_ALPHABET)


def test_zero_code_conditions_vanish():
    cI, cII = complex_conditions(CubicCode())
    assert equiv_zero(cI) and equiv_zero(cII)
    assert all(equiv_zero(e) for e in real_conditions(real_coefficients(CubicCode())))
    assert compare_paper_literal(real_coefficients(CubicCode())) == []


def test_example_one_conditions_vanish():
    c = CubicCode(C=P("-3*u"), D=P("-u^3"))
    cI, cII = complex_conditions(c)
    assert equiv_zero(cI) and equiv_zero(cII)
    assert all(equiv_zero(e) for e in real_conditions(real_coefficients(c)))


def test_uup_condition_two_is_two_u():
    c = CubicCode(C=P("u"))
    cI, cII = complex_conditions(c)
    assert equiv_zero(cI)
    assert equiv_zero(sub(cII, P("2*u")))
    re_II = real_conditions(real_coefficients(c))[2]
    assert equiv_zero(sub(re_II, parse("2*f", REAL_ALPHABET)))


def test_uup_literal_rows_are_nonzero():
    rows = compare_paper_literal(real_coefficients(CubicCode(C=P("u"))))
    assert rows
    assert {r.condition for r in rows} == {"II"}


def test_literal_typo_detected_in_general_coefficients():
    c = CubicCode(A=P("z*u"), B=P("z^2"), C=P("u^2 + z"), D=P("z*u^3"))
    kinds = {r.kind for r in compare_paper_literal(real_coefficients(c))}
    assert "typo" in kinds and "weight-convention" in kinds


def test_mapping_table_covers_every_term():
    rows = mapping_table()
    assert {r["condition"] for r in rows} == {"I", "II"}
    assert all(r["re"] and r["im"] for r in rows)


@pytest.mark.parametrize(
    "w,verdict",
    [
        ("-3*u*up - u^3", LINEARIZABLE),
        ("0", LINEARIZABLE),
        ("u*up", NOT_LINEARIZABLE),
        ("exp(up)", NOT_LINEARIZABLE),
        ("up^4", NOT_LINEARIZABLE),
    ],
)
def test_check_linearizable(w, verdict):
    rep = check_linearizable(GeneralSecondOrderCode(P(w)), Sampler(samples=24))
    assert rep.verdict == verdict


def test_not_cubic_is_reported_structurally():
    rep = check_linearizable(GeneralSecondOrderCode(P("exp(up)")))
    assert rep.cond_I is None
    assert any("cubic" in a for a in rep.annotations)


@pytest.mark.parametrize("name", list_fixtures())
def test_fixture_verdicts_and_consistency(name):
    fx = load_fixture(name)
    rep = check_linearizable(fx.code, Sampler())
    assert rep.verdict == fx.expected_verdict
    assert rep.verdict_complex == rep.verdict_real
    assert rep.consistency <= 1e-12


def test_report_records_one_per_condition():
    rep = check_linearizable(GeneralSecondOrderCode(P("u*up")))
    recs = rep.to_records()
    assert [r["condition"] for r in recs] == ["I", "II", "Re I", "Im I", "Re II", "Im II"]
    assert "NotLinearizable" in rep.to_text()
