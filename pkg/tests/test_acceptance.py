"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are printed as each criterion finishes) or directly
with ``python3 tests/test_acceptance.py`` for the bare summary.
"""

from __future__ import annotations

import contextlib
import functools
import io
import time

import pytest

from complexlie.cli import main as cli_main
from complexlie.codes import CubicCode
from complexlie.corpus import NAMES, FixtureReport, load_fixture, run_fixture
from complexlie.expr import COMPLEX_ALPHABET, REAL_ALPHABET, Sampler, derivative_agreement, equiv_zero, parse, realify, sub
from complexlie.lie import LINEARIZABLE, NOT_LINEARIZABLE, check_linearizable, complex_conditions
from complexlie.symmetry import bracket, is_symmetry, is_zero_field
from complexlie.transform import case6_canonical_transform, compose_real, realify_transformation


@functools.lru_cache(maxsize=None)
def report(name: str) -> FixtureReport:
    return run_fixture(name)


def _stage_max(rep: FixtureReport, stage: str, label_prefix: str | None = None) -> float:
    vals = [
        v.stage(stage).max_residual
        for v in rep.verifications
        if (label_prefix is None or v.label.startswith(label_prefix)) and v.stage(stage).executed
    ]
    return max(vals) if vals else float("nan")


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


# criteria --------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    rep = run_fixture("RICATTI")
    elapsed = time.perf_counter() - t0
    src = _stage_max(rep, "source-pde-residual")
    tgt = _stage_max(rep, "target-pde-residual")
    ok = src < 1e-10 and tgt < 1e-10 and elapsed < 1.0 and rep.matched
    return ok, f"Riccati source {src:.1e}, transformed {tgt:.1e} (< 1e-10), {elapsed:.2f} s (< 1 s)"


def criterion_2():
    rep = report("SHO")
    fx = load_fixture("SHO")
    ft = fx.transformations[0]
    printed = ft.printed_real
    tan_re, tan_im = realify(parse("tan(z)", COMPLEX_ALPHABET))
    tan_ok = all(
        equiv_zero(sub(parse(printed[k], REAL_ALPHABET), e)) for k, e in (("X", tan_re), ("Y", tan_im))
    )
    tgt = _stage_max(rep, "target-pde-residual")
    src = _stage_max(rep, "source-pde-residual")
    check = next(p for p in rep.printed if p.ref == printed["ref"])
    annotated = any(a["kind"] == "typo" and "G" in a["text"] for a in fx.annotations)
    ok = max(tgt, src) < 1e-9 and tan_ok and check.mismatched == ("G",) and annotated and rep.matched
    return ok, (
        f"SHO PDE residual {max(tgt, src):.1e} (< 1e-9), realified tan matches printed X, Y: {tan_ok}, "
        f"printed components differing: {','.join(check.mismatched) or 'none'}"
    )


def criterion_3():
    rep = report("EX1")
    fx = load_fixture("EX1")
    comp = fx.transformation("T61+case6")
    built = compose_real(realify_transformation(fx.transformation("T61").t), case6_canonical_transform(-1, 0, 6, 0))
    printed = comp.printed_real
    comp_ok = all(
        equiv_zero(sub(parse(printed[k], REAL_ALPHABET), c)) for k, c in zip("XYFG", built.components)
    )
    final = _stage_max(rep, "target-pde-residual", "T61+case6")
    case = rep.classification.case if rep.classification else None
    ok = rep.lie_verdict == LINEARIZABLE and case == "Case6" and comp_ok and final < 1e-9 and rep.matched
    return ok, f"EX1 lie {rep.lie_verdict}, {case}, composed map equals printed form: {comp_ok}, final system {final:.1e} (< 1e-9)"


def criterion_4():
    parts = []
    ok = True
    for name in ("EX2_W0", "EX3", "EX4_W0", "EX4_WCONST"):
        rep = report(name)
        ode = _stage_max(rep, "target-ode-residual")
        pde = _stage_max(rep, "target-pde-residual")
        fd = _stage_max(rep, "fd-oracle-residual")
        fd_ok = fd != fd or fd < 1e-4  # nan when no inverse is supplied
        this = rep.lie_verdict == LINEARIZABLE and ode < 1e-9 and pde < 1e-9 and fd_ok and rep.matched
        ok &= this
        parts.append(f"{name} ode {ode:.0e} pde {pde:.0e} fd {fd:.0e}")
    return ok, "; ".join(parts)


def criterion_5():
    code = load_fixture("NONLIN_UUP").code
    rep = check_linearizable(code)
    cubic = CubicCode(C=parse("u", COMPLEX_ALPHABET))
    _, cII = complex_conditions(cubic)
    two_u = parse("2*u", COMPLEX_ALPHABET)
    worst = 0.0
    n = 0
    for s in Sampler().sweep([cII, two_u]):
        got, want = s.values
        worst = max(worst, abs(got - want) / abs(want))
        n += 1
    ok = rep.verdict == NOT_LINEARIZABLE and worst <= 1e-12
    return ok, f"u''=uu' {rep.verdict}, condition II vs 2u max relative error {worst:.1e} over {n} samples"


def criterion_6():
    worst = 0.0
    agree = True
    for name in NAMES:
        rep = check_linearizable(load_fixture(name).code)
        worst = max(worst, rep.consistency)
        agree &= rep.verdict_complex == rep.verdict_real and rep.verdict == load_fixture(name).expected_verdict
    ok = worst <= 1e-12 and agree
    return ok, f"real vs complex conditions max deviation {worst:.1e} (<= 1e-12), verdicts agree: {agree}"


def criterion_7():
    prolong_ok = True
    worst = 0.0
    for name in ("EX1", "EX2_W0", "EX3", "EX4_W0"):
        fx = load_fixture(name)
        for Z in fx.symmetries:
            zt = is_symmetry(Z, fx.code, Sampler(), 1e-9)
            prolong_ok &= bool(zt)
            worst = max(worst, zt.max_scaled)
    e1, e2 = load_fixture("EX1").symmetries, load_fixture("EX2_W0").symmetries
    b1 = bracket(*e1)
    b1_ok = bool(equiv_zero(sub(b1.xi, e1[0].xi))) and bool(equiv_zero(sub(b1.eta, e1[0].eta)))
    b2_ok = is_zero_field(bracket(*e2))
    ratios = []
    flows_ok = True
    for name in NAMES:
        for _, fr in report(name).flows:
            if fr.ratio is not None:
                ratios.append(fr.ratio)
            flows_ok &= fr.status in ("symmetry", "exact") and fr.epsilons == (1e-3, 5e-4)
    ratio_ok = bool(ratios) and all(abs(r - 4) <= 0.8 for r in ratios)
    ok = prolong_ok and b1_ok and b2_ok and flows_ok and ratio_ok
    return ok, (
        f"prolongation max {worst:.1e}, [Z1,Z2]=Z1: {b1_ok}, [Z1,Z2]=0: {b2_ok}, "
        f"flow ratios {min(ratios):.3f}..{max(ratios):.3f} over {len(ratios)} fields"
    )


def criterion_8():
    worst = 0.0
    n_exprs = 0
    thin = 0
    for name in NAMES:
        fx = load_fixture(name)
        for _, e, fam in fx.expressions():
            if not e.free_symbols:
                continue
            s = Sampler(samples=100)
            if fam is not None:
                s = fam.sampler(s)
            for c in derivative_agreement(e, s):
                worst = max(worst, c.max_error)
                thin += c.n_samples < 100
            n_exprs += 1
    dets = []
    for name in NAMES:
        for v in report(name).verifications:
            dets.append(v.stage("jacobian").max_residual)
    det_ok = bool(dets) and min(dets) > 1e-6
    ok = worst < 1e-4 and thin == 0 and det_ok
    return ok, f"derivative FD max relative error {worst:.1e} over {n_exprs} expressions, min |det J| {min(dets):.2e} (> 1e-6)"


def _corpus_jsonl() -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(["corpus", "--output", "jsonl"])
    assert code == 0
    return buf.getvalue()


def criterion_9():
    a, b = _corpus_jsonl(), _corpus_jsonl()
    ok = a == b and len(a) > 0
    return ok, f"two corpus runs: {len(a.splitlines())} records each, byte-identical: {a == b}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        results.append(ok)
        print(_line(k, ok, detail))
    raise SystemExit(0 if all(results) else 1)
