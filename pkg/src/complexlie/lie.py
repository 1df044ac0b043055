"""Lie linearizability conditions for cubic complex ODEs.

Two complex conditions on the coefficients of ``u'' = A up^3 + B up^2 +
C up + D`` are built term by term from :data:`TERMS`.  Their real forms are
obtained from the realified coefficients through the Wirtinger operators
``d/dz = (d/dx - i d/dy)/2`` and ``d/du = (d/df - i d/dg)/2``.

The printed real conditions use the operators ``d/dx - i d/dy`` without the
factor 1/2, so a term with ``k`` derivatives appears scaled by ``2**k``.
:func:`compare_paper_literal` evaluates the printed groups and sorts every
mismatch into ``weight-convention`` (ratio exactly ``2**k``) or ``typo``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .codes import (
    CubicCode,
    FirstOrderCode,
    GeneralSecondOrderCode,
    NotCubic,
    RealCoefficients,
    extract_cubic,
    real_coefficients,
)
from .expr import ZERO, Expr, add, diff, mul, parse, subs, to_text
from .expr.realify import Pair, padd, pmul, pscale
from .expr.sampling import Sampler

LINEARIZABLE = "Linearizable"
NOT_LINEARIZABLE = "NotLinearizable"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Term:
    """``coeff * mult * d^k K / d(vars)``; ``mult`` is a coefficient letter or None."""

    coeff: int
    mult: str | None
    target: str
    wrt: str  # sequence over "z", "u"

    @property
    def order(self) -> int:
        return len(self.wrt)

    @property
    def label(self) -> str:
        c = {1: "", -1: "-"}.get(self.coeff, f"{self.coeff}*")
        m = f"{self.mult}*" if self.mult else ""
        return f"{c}{m}{self.target}_{self.wrt}"


TERMS: dict[str, tuple[Term, ...]] = {
    "I": (
        Term(3, None, "A", "zz"),
        Term(3, "C", "A", "z"),
        Term(-3, "D", "A", "u"),
        Term(3, "A", "C", "z"),
        Term(1, None, "C", "uu"),
        Term(-6, "A", "D", "u"),
        Term(1, "B", "C", "u"),
        Term(-2, "B", "B", "z"),
        Term(-2, None, "B", "zu"),
    ),
    "II": (
        Term(6, "D", "A", "z"),
        Term(-3, "D", "B", "u"),
        Term(3, "A", "D", "z"),
        Term(1, None, "B", "zz"),
        Term(-2, None, "C", "zu"),
        Term(-3, "B", "D", "u"),
        Term(3, None, "D", "uu"),
        Term(2, "C", "C", "u"),
        Term(-1, "C", "B", "z"),
    ),
}

REAL_NAMES = ("Re I", "Im I", "Re II", "Im II")


# complex side ----------------------------------------------------------------


def _complex_term(t: Term, coeffs: dict[str, Expr]) -> Expr:
    d = coeffs[t.target]
    for s in t.wrt:
        d = diff(d, s)
    parts = [t.coeff, d]
    if t.mult:
        parts.append(coeffs[t.mult])
    return mul(*parts)


def complex_conditions(c: CubicCode) -> tuple[Expr, Expr]:
    coeffs = dict(zip("ABCD", c.coefficients()))
    return tuple(add(*(_complex_term(t, coeffs) for t in TERMS[k])) for k in ("I", "II"))  # type: ignore[return-value]


# real side -------------------------------------------------------------------

_REAL_OF = {"z": ("x", "y"), "u": ("f", "g")}


def _wirtinger(p: Pair, s: str) -> Pair:
    """d/ds of an analytic pair, written with both real partials."""
    a, b = _REAL_OF[s]
    k1, k2 = p
    return mul(0.5, add(diff(k1, a), diff(k2, b))), mul(0.5, add(diff(k2, a), mul(-1, diff(k1, b))))


def _real_term(t: Term, pairs: dict[str, Pair], weight: float = 1.0) -> Pair:
    d = pairs[t.target]
    for s in t.wrt:
        d = _wirtinger(d, s)
    out = pscale(t.coeff * weight, d)
    if t.mult:
        out = pmul(pairs[t.mult], out)
    return out


def real_conditions(rc: RealCoefficients) -> tuple[Expr, Expr, Expr, Expr]:
    """(Re I, Im I, Re II, Im II) over (x, y, f, g)."""
    pairs = rc.pairs()
    out: list[Expr] = []
    for k in ("I", "II"):
        re, im = padd(*(_real_term(t, pairs) for t in TERMS[k]))
        out += [re, im]
    return tuple(out)  # type: ignore[return-value]


def mapping_table() -> list[dict[str, str]]:
    """One row per complex term with its printed real and imaginary groups."""
    data = _literal_data()
    rows = []
    for k in ("I", "II"):
        block = data["conditions"][k]
        for t, g in zip(TERMS[k], block["groups"]):
            rows.append({"condition": k, "term": t.label, "derivatives": str(t.order), "re": g["re"], "im": g["im"]})
    return rows


# printed (literal) forms -------------------------------------------------------


def _literal_data() -> dict:
    return json.loads(resources.files("complexlie.data").joinpath("literal_conditions.json").read_text())


def _literal_symbol_values(rc: RealCoefficients, names: set[str]) -> dict[str, Expr]:
    pairs = rc.pairs()
    out: dict[str, Expr] = {}
    for name in names:
        head, _, suffix = name.partition("_")
        letter, part = head[0], int(head[1:]) - 1
        e = pairs[letter][part]
        for s in suffix:
            e = diff(e, s)
        out[name] = e
    return out


@dataclass
class LiteralRow:
    condition: str
    part: str
    term: str
    source: str
    printed: str
    kind: str  # weight-convention | typo
    expected_ratio: float
    max_ratio_error: float


def compare_paper_literal(rc: RealCoefficients, sampler: Sampler | None = None, tol: float = 1e-9) -> list[LiteralRow]:
    """Evaluate each printed group against the normative real term at shared samples.

    A group whose printed value equals ``2**k`` times the normative value
    everywhere is a weight-convention difference; any other mismatch is a typo.
    Groups that vanish on both sides produce no row.
    """
    sampler = sampler or Sampler()
    data = _literal_data()
    pairs = rc.pairs()
    jobs: list[tuple[str, str, Term, str, str, Expr, Expr]] = []
    for k in ("I", "II"):
        block = data["conditions"][k]
        for t, g in zip(TERMS[k], block["groups"]):
            norm = _real_term(t, pairs)
            for part, idx, src in (("Re", 0, block["re_source"]), ("Im", 1, block["im_source"])):
                text = g[part.lower()]
                lit_raw = parse(text, _identifiers(text))
                lit = subs(lit_raw, _literal_symbol_values(rc, lit_raw.free_symbols))
                if norm[idx] == ZERO and lit == ZERO:
                    continue
                jobs.append((k, part, t, src, text, lit, norm[idx]))
    if not jobs:
        return []
    exprs: list[Expr] = []
    for *_, lit, norm in jobs:
        exprs += [lit, norm]
    worst = [0.0] * len(jobs)
    nonzero = [False] * len(jobs)
    for s in sampler.sweep(exprs):
        for j, (k, part, t, *_rest) in enumerate(jobs):
            lv, nv = s.values[2 * j], s.values[2 * j + 1]
            scale = 1.0 + max(s.scales[2 * j], s.scales[2 * j + 1])
            err = abs(lv - (2**t.order) * nv) / scale
            worst[j] = max(worst[j], err)
            if abs(lv) / scale > tol or abs(nv) / scale > tol:
                nonzero[j] = True
    rows = []
    for j, (k, part, t, src, text, _lit, _norm) in enumerate(jobs):
        if not nonzero[j]:
            continue
        kind = "weight-convention" if worst[j] <= tol else "typo"
        rows.append(LiteralRow(k, part, t.label, src, text, kind, float(2**t.order), worst[j]))
    return rows


def _identifiers(text: str) -> set[str]:
    return set(re.findall(r"[A-Za-z][A-Za-z0-9_]*", text))


def literal_conditions(rc: RealCoefficients) -> tuple[Expr, Expr, Expr, Expr]:
    """The printed real conditions as whole expressions (for display and ratios)."""
    data = _literal_data()
    out = []
    for k in ("I", "II"):
        for part in ("re", "im"):
            text = " + ".join(f"({g[part]})" for g in data["conditions"][k]["groups"])
            raw = parse(text, _identifiers(text))
            out.append(subs(raw, _literal_symbol_values(rc, raw.free_symbols)))
    return tuple(out)  # type: ignore[return-value]


# verdicts ----------------------------------------------------------------------


@dataclass
class LieConditionReport:
    code: str
    cond_I: Expr | None
    cond_II: Expr | None
    real_conditions: tuple[Expr, ...] = ()
    residuals: dict[str, float] = field(default_factory=dict)
    verdict: str = INCONCLUSIVE
    verdict_complex: str = INCONCLUSIVE
    verdict_real: str = INCONCLUSIVE
    n_samples: int = 0
    n_rejected: int = 0
    annotations: list[str] = field(default_factory=list)
    literal: list[LiteralRow] = field(default_factory=list)
    consistency: float = 0.0  # max |real - Re/Im complex| relative, over samples

    def to_text(self) -> str:
        lines = [f"code: u'' = {self.code}", f"verdict: {self.verdict}"]
        if self.cond_I is not None:
            lines.append(f"condition I  = {to_text(self.cond_I)}")
            lines.append(f"condition II = {to_text(self.cond_II)}")
        for name in ("I", "II", *REAL_NAMES):
            if name in self.residuals:
                lines.append(f"  max residual {name:<6} {self.residuals[name]:.3e}")
        lines.append(f"samples: {self.n_samples} accepted, {self.n_rejected} rejected near singularities")
        if self.real_conditions:
            lines.append(f"complex/real verdicts: {self.verdict_complex} / {self.verdict_real}")
        for row in self.literal:
            lines.append(
                f"  [{row.kind}] {row.part} {row.condition} term {row.term} ({row.source}): "
                f"printed = {row.printed}; expected ratio {row.expected_ratio:g}"
            )
        for a in self.annotations:
            lines.append(f"  note: {a}")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        recs = []
        names = [("I", self.cond_I), ("II", self.cond_II)]
        for name, e in names:
            recs.append(
                {
                    "kind": "lie-condition",
                    "condition": name,
                    "expr": None if e is None else to_text(e),
                    "max_residual": self.residuals.get(name),
                    "verdict": self.verdict,
                }
            )
        for name, e in zip(REAL_NAMES, self.real_conditions):
            recs.append(
                {
                    "kind": "lie-real-condition",
                    "condition": name,
                    "max_residual": self.residuals.get(name),
                    "verdict": self.verdict_real,
                }
            )
        return recs


def _verdict(series: Sequence[Sequence[float]], tol: float) -> str:
    """series[i][j]: scaled residual of condition i at sample j."""
    if all(r <= tol for s in series for r in s):
        return LINEARIZABLE
    for s in series:
        if s and sum(r > 10 * tol for r in s) >= 0.75 * len(s):
            return NOT_LINEARIZABLE
    return INCONCLUSIVE


def check_linearizable(
    c: CubicCode | GeneralSecondOrderCode | FirstOrderCode,
    sampler: Sampler | None = None,
    tol: float = 1e-9,
    *,
    literal: bool = True,
) -> LieConditionReport:
    sampler = sampler or Sampler()
    if isinstance(c, FirstOrderCode):
        rep = LieConditionReport(to_text(c.w), None, None, verdict=LINEARIZABLE)
        rep.verdict_complex = rep.verdict_real = LINEARIZABLE
        rep.annotations.append("first-order code: linearizable by a point transformation without conditions")
        return rep
    try:
        cubic = extract_cubic(c, sampler)
    except NotCubic as exc:
        rep = LieConditionReport(to_text(c.w), None, None, verdict=NOT_LINEARIZABLE)
        rep.verdict_complex = rep.verdict_real = NOT_LINEARIZABLE
        rep.annotations.append(f"not cubic in up: {exc}")
        return rep
    cI, cII = complex_conditions(cubic)
    rc = real_coefficients(cubic)
    reals = real_conditions(rc)
    exprs = [cI, cII, *reals]
    names = ["I", "II", *REAL_NAMES]
    stats: dict = {}
    scaled: list[list[float]] = [[] for _ in exprs]
    raw_max = [0.0] * len(exprs)
    consistency = 0.0
    n = 0
    for s in sampler.sweep(exprs, stats=stats):
        n += 1
        for i, (v, sc) in enumerate(zip(s.values, s.scales)):
            raw_max[i] = max(raw_max[i], abs(v))
            scaled[i].append(abs(v) / (1.0 + sc))
        vI, vII = s.values[0], s.values[1]
        for got, want in zip(s.values[2:], (vI.real, vI.imag, vII.real, vII.imag)):
            consistency = max(consistency, abs(got.real - want) / (1.0 + abs(want)))
    rep = LieConditionReport(to_text(cubic.w), cI, cII, tuple(reals))
    rep.residuals = dict(zip(names, raw_max))
    rep.n_samples = n
    rep.n_rejected = stats.get("rejected", 0)
    rep.consistency = consistency
    rep.verdict_complex = _verdict(scaled[:2], tol)
    rep.verdict_real = _verdict(scaled[2:], tol)
    rep.verdict = _verdict(scaled, tol)
    if rep.verdict_complex != rep.verdict_real:
        rep.annotations.append("complex and real conditions disagree on the verdict")
    if rep.n_rejected:
        rep.annotations.append(f"{rep.n_rejected} samples rejected near poles or branch cuts")
    if literal:
        rep.literal = compare_paper_literal(rc, sampler, tol)
    return rep

