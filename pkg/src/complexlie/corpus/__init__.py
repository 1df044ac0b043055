"""Executable fixtures for the worked examples, and the runner that checks them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..codes import Code, code_from_dict, code_to_dict, decompose
from ..expr import (
    REAL_ALPHABET,
    TARGET_ALPHABET,
    Expr,
    mul,
    parse,
    realify,
    sub,
    subs,
    to_text,
    var,
)
from ..expr.errors import EvaluationError
from ..expr.sampling import Region, Sampler, equiv_zero
from ..family import SolutionFamily
from ..lie import LINEARIZABLE, NOT_LINEARIZABLE, LieConditionReport, check_linearizable
from ..symmetry import (
    CaseClassification,
    ComplexVectorField,
    FlowReport,
    RealVectorField,
    classify_theorem_case,
    flow_invariance_check,
    is_symmetry,
    realify_field,
)
from ..transform import (
    ComplexPointTransformation,
    GridSpec,
    RealPointTransformation,
    StageResult,
    VerificationReport,
    case6_canonical_transform,
    compose_real,
    realify_transformation,
    round_trip_residuals,
    verify_linearization,
    verify_pde_linearization,
)

NAMES = ("RICATTI", "SHO", "EX1", "EX2_W0", "EX2_WCONST", "EX3", "EX4_W0", "EX4_WCONST", "NONLIN_UUP")
ANNOTATION_KINDS = ("typo", "weight-convention", "classification-discrepancy")


class UnknownFixture(KeyError):
    pass


@dataclass(frozen=True)
class FixtureTransformation:
    label: str
    ref: str
    t: ComplexPointTransformation
    target: Code
    target_ref: str = ""
    z_of_Z: tuple[Expr, ...] = ()
    printed_real: Mapping[str, Any] | None = None
    case6: tuple[float, float, float, float] | None = None
    after: str | None = None
    inverse_region: Mapping[str, Any] | None = None

    @property
    def is_composition(self) -> bool:
        return self.case6 is not None


@dataclass(frozen=True)
class Fixture:
    name: str
    title: str
    code: Code
    expected_verdict: str
    symmetries: tuple[ComplexVectorField, ...] = ()
    stated_case: str | None = None
    printed_fields: tuple[Mapping[str, Any], ...] = ()
    families: tuple[SolutionFamily, ...] = ()
    transformations: tuple[FixtureTransformation, ...] = ()
    printed_systems: tuple[Mapping[str, Any], ...] = ()
    annotations: tuple[Mapping[str, str], ...] = ()
    pde_tol: float = 1e-9
    extra: Mapping[str, Any] = field(default_factory=dict)

    def transformation(self, label: str) -> FixtureTransformation:
        for t in self.transformations:
            if t.label == label:
                return t
        raise KeyError(label)

    def real_transformation(self, label: str) -> RealPointTransformation:
        """Realified transformation, composed with the canonical map where needed."""
        ft = self.transformation(label)
        if not ft.is_composition:
            return realify_transformation(ft.t)
        first = self.real_transformation(ft.after)  # type: ignore[arg-type]
        return compose_real(first, case6_canonical_transform(*ft.case6))  # type: ignore[misc]

    def expressions(self) -> list[tuple[str, Expr, SolutionFamily | None]]:
        """Every expression the fixture defines, with the family whose region applies."""
        out: list[tuple[str, Expr, SolutionFamily | None]] = [("code w", self.code.w, None)]
        for f in self.families:
            out.append((f"family {f.label}", f.u, f))
        for k, Z in enumerate(self.symmetries, 1):
            out += [(f"Z{k} xi", Z.xi, None), (f"Z{k} eta", Z.eta, None)]
        for ft in self.transformations:
            if not ft.is_composition:
                out += [(f"{ft.label} Z", ft.t.Z, None), (f"{ft.label} U", ft.t.U, None)]
            rt = self.real_transformation(ft.label)
            out += [(f"{ft.label} {k}", c, None) for k, c in zip("XYFG", rt.components)]
        return out

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "title": self.title, **dict(self.extra)}
        d["code"] = code_to_dict(self.code)
        d["expected_verdict"] = self.expected_verdict
        if self.symmetries:
            d["symmetries"] = {
                "ref": self.extra.get("symmetry_ref", ""),
                "fields": [z.to_dict() for z in self.symmetries],
                "stated_case": self.stated_case,
                "printed_real": [dict(p) for p in self.printed_fields],
            }
            d.pop("symmetry_ref", None)
        if self.families:
            d["families"] = [f.to_dict() for f in self.families]
        plain, comps = [], []
        for ft in self.transformations:
            td: dict[str, Any] = {"label": ft.label, "ref": ft.ref}
            if ft.is_composition:
                td.update(after=ft.after, case6=list(ft.case6))  # type: ignore[arg-type]
            else:
                td.update(ft.t.to_dict())
            td["target"] = code_to_dict(ft.target)
            td["target_ref"] = ft.target_ref
            td["z_of_Z"] = [to_text(e) for e in ft.z_of_Z]
            if ft.printed_real is not None:
                td["printed_real"] = dict(ft.printed_real)
            if ft.inverse_region is not None:
                td["inverse_region"] = dict(ft.inverse_region)
            (comps if ft.is_composition else plain).append(td)
        if plain:
            d["transformations"] = plain
        if comps:
            d["compositions"] = comps
        if self.printed_systems:
            d["printed_systems"] = [dict(p) for p in self.printed_systems]
        d["annotations"] = [dict(a) for a in self.annotations]
        d["pde_tol"] = self.pde_tol
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Fixture":
        fams = tuple(SolutionFamily.from_dict(f) for f in d.get("families", ()))
        params = sorted({p for f in fams for p in f.params})
        zalpha = set(TARGET_ALPHABET) | set(params)
        trs = []
        for td in d.get("transformations", ()):
            t = ComplexPointTransformation.from_dict(td)
            trs.append(
                FixtureTransformation(
                    td["label"], td.get("ref", ""), t, code_from_dict(td["target"]), td.get("target_ref", ""),
                    tuple(parse(s, zalpha) for s in td.get("z_of_Z", ())), td.get("printed_real"),
                    inverse_region=td.get("inverse_region"),
                )
            )
        for td in d.get("compositions", ()):
            trs.append(
                FixtureTransformation(
                    td["label"], td.get("ref", ""), ComplexPointTransformation(var("z"), var("u")),
                    code_from_dict(td["target"]), td.get("target_ref", ""),
                    tuple(parse(s, zalpha) for s in td.get("z_of_Z", ())), td.get("printed_real"),
                    tuple(float(v) for v in td["case6"]), td["after"],  # type: ignore[arg-type]
                )
            )
        sym = d.get("symmetries") or {}
        for a in d.get("annotations", ()):
            if a.get("kind") not in ANNOTATION_KINDS:
                raise ValueError(f"unknown annotation kind {a.get('kind')!r}")
        known = {
            "name", "title", "code", "expected_verdict", "symmetries", "families", "transformations",
            "compositions", "printed_systems", "annotations", "pde_tol",
        }
        extra = {k: v for k, v in d.items() if k not in known}
        if sym.get("ref"):
            extra["symmetry_ref"] = sym["ref"]
        return cls(
            name=d["name"],
            title=d.get("title", ""),
            code=code_from_dict(d["code"]),
            expected_verdict=d["expected_verdict"],
            symmetries=tuple(ComplexVectorField.from_dict(z) for z in sym.get("fields", ())),
            stated_case=sym.get("stated_case"),
            printed_fields=tuple(sym.get("printed_real", ())),
            families=fams,
            transformations=tuple(trs),
            printed_systems=tuple(d.get("printed_systems", ())),
            annotations=tuple(d.get("annotations", ())),
            pde_tol=float(d.get("pde_tol", 1e-9)),
            extra=extra,
        )


def _fixture_dir():
    return resources.files(__package__).joinpath("fixtures")


def list_fixtures() -> list[str]:
    found = {p.name[:-5] for p in _fixture_dir().iterdir() if p.name.endswith(".json")}
    return [n for n in NAMES if n in found] + sorted(found - set(NAMES))


def load_fixture(name: str | Path) -> Fixture:
    p = Path(name)
    if p.suffix == ".json" and p.exists():
        return Fixture.from_dict(json.loads(p.read_text()))
    res = _fixture_dir().joinpath(f"{name}.json")
    if not res.is_file():
        raise UnknownFixture(str(name))
    return Fixture.from_dict(json.loads(res.read_text()))


def save_fixture(fx: Fixture, path: str | Path) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / f"{fx.name}.json"
    p.write_text(json.dumps(fx.to_dict(), indent=2) + "\n")
    return p


def export_fixtures(directory: str | Path) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    return [save_fixture(load_fixture(n), d) for n in list_fixtures()]


# printed-form comparison ------------------------------------------------------------


@dataclass
class PrintedCheck:
    ref: str
    what: str
    declared: str
    detected: str
    mismatched: tuple[str, ...] = ()
    note: str = ""
    expected_mismatch: tuple[str, ...] | None = None

    @property
    def consistent(self) -> bool:
        if self.expected_mismatch is not None and sorted(self.expected_mismatch) != sorted(self.mismatched):
            return False
        return self.declared == self.detected

    def to_record(self) -> dict:
        return {
            "kind": "printed-form",
            "ref": self.ref,
            "what": self.what,
            "declared": self.declared,
            "detected": self.detected,
            "mismatched": list(self.mismatched),
            "consistent": self.consistent,
        }

    def to_text(self) -> str:
        mark = "ok" if self.consistent else "UNEXPECTED"
        extra = f" ({', '.join(self.mismatched)} differ)" if self.mismatched else ""
        return f"[{self.detected}] {self.ref} {self.what}{extra}  {mark}"


_LOWER = {c: var(c.lower()) for c in "XYFGHL"}


def _region_sampler(base: Sampler, regions: Mapping[str, Any] | None) -> Sampler:
    if not regions:
        return base
    extra = {k: Region(tuple(v["re"]), tuple(v["im"])) for k, v in regions.items()}
    return base.with_(regions={**base.regions, **extra})


def compare_printed_transformation(
    printed: Mapping[str, Any], rt: RealPointTransformation, sampler: Sampler, what: str = "transformation"
) -> PrintedCheck:
    s = _region_sampler(sampler, printed.get("region"))
    bad = []
    for k, normative in zip("XYFG", rt.components):
        lit = parse(str(printed[k]), REAL_ALPHABET)
        if not equiv_zero(sub(lit, normative), s):
            bad.append(k)
    expected = tuple(printed.get("mismatch", ()))
    declared = "typo" if expected else "match"
    detected = "typo" if bad else "match"
    return PrintedCheck(printed.get("ref", ""), what, declared, detected, tuple(bad), expected_mismatch=expected)


def compare_printed_field(entry: Mapping[str, Any], fields: Sequence[ComplexVectorField], sampler: Sampler) -> PrintedCheck:
    Z = fields[int(entry["field"])]
    X, Y = realify_field(Z)
    normative = X if entry["part"] == "X" else Y
    lit = RealVectorField.from_dict(entry["components"])
    bad = tuple(
        c for c, a, b in zip("xyfg", lit.components, normative.components) if not equiv_zero(sub(a, b), sampler)
    )
    detected = "typo" if bad else "match"
    return PrintedCheck(entry.get("ref", ""), f"{entry['part']}{int(entry['field']) + 1}", entry["status"], detected,
                        tuple(f"d/d{c}" for c in bad))


def compare_printed_system(entry: Mapping[str, Any], code: Code, sampler: Sampler) -> PrintedCheck:
    """Printed right-hand sides against realify(multiplier * w), operators read with their weight."""
    alpha = set(REAL_ALPHABET) | {"w1", "w2"}
    wv = {k: parse(str(v)) for k, v in (entry.get("w") or {}).items()}
    mult = parse(str(entry.get("multiplier", "1")))
    n_re, n_im = realify(mul(mult, code.w))
    bad = []
    for part, key, normative in (("re", "rhs_re", n_re), ("im", "rhs_im", n_im)):
        lit = subs(parse(str(entry[key]), alpha), wv)
        if entry.get("target_alphabet"):
            lit = subs(lit, _LOWER)
        if not equiv_zero(sub(lit, normative), sampler):
            bad.append(part)
    detected = "typo" if bad else "weight-convention"
    return PrintedCheck(entry.get("ref", ""), f"{entry.get('which', 'source')} system", entry["status"], detected,
                        tuple(bad), entry.get("note", ""))


# runner -----------------------------------------------------------------------------


@dataclass
class FixtureReport:
    name: str
    expected_verdict: str
    family_checks: list[StageResult] = field(default_factory=list)
    lie: LieConditionReport | None = None
    symmetry_checks: list[tuple[int, float, bool]] = field(default_factory=list)
    classification: CaseClassification | None = None
    flows: list[tuple[int, FlowReport]] = field(default_factory=list)
    verifications: list[VerificationReport] = field(default_factory=list)
    round_trips: list[tuple[str, bool]] = field(default_factory=list)
    printed: list[PrintedCheck] = field(default_factory=list)
    annotations: list[Mapping[str, str]] = field(default_factory=list)
    stopped_at: str | None = None

    @property
    def lie_verdict(self) -> str | None:
        return None if self.lie is None else self.lie.verdict

    def failures(self) -> list[str]:
        out = []
        for s in self.family_checks:
            if not s.passed:
                out.append(f"family {s.name}")
        if self.lie is not None and self.lie.verdict != LINEARIZABLE:
            out.append("lie")
        for k, _, ok in self.symmetry_checks:
            if not ok:
                out.append(f"symmetry Z{k + 1}")
        for k, fr in self.flows:
            if fr.status == "non-symmetry":
                out.append(f"flow Z{k + 1}")
        for v in self.verifications:
            if v.verdict != "Pass":
                out.append(f"{v.label}: {v.failed_stage()}")
        for label, ok in self.round_trips:
            if not ok:
                out.append(f"round trip {label}")
        for p in self.printed:
            if not p.consistent:
                out.append(f"printed {p.ref}")
        return out

    @property
    def verdict(self) -> str:
        return "Pass" if not self.failures() else "Fail"

    @property
    def matched(self) -> bool:
        if self.expected_verdict == NOT_LINEARIZABLE:
            return self.lie_verdict == NOT_LINEARIZABLE and self.stopped_at == "lie"
        return self.lie_verdict == LINEARIZABLE and self.verdict == "Pass"

    def to_text(self) -> str:
        lines = [f"== {self.name}: {self.verdict} (expected {self.expected_verdict}, matched {self.matched})"]
        for s in self.family_checks:
            lines.append(f"  family {s.name}: max {s.max_residual:.3e} over {s.n_points} samples")
        if self.lie is not None:
            lines.append("  lie check:")
            lines.extend("    " + ln for ln in self.lie.to_text().splitlines())
        if self.stopped_at:
            lines.append(f"  stopped after the {self.stopped_at} stage")
        for k, r, ok in self.symmetry_checks:
            lines.append(f"  symmetry Z{k + 1}: prolongation residual {r:.3e} {'ok' if ok else 'FAIL'}")
        if self.classification is not None:
            lines.extend("  " + ln for ln in self.classification.to_text().splitlines())
        for k, fr in self.flows:
            ratio = "n/a" if fr.ratio is None else f"{fr.ratio:.4f}"
            lines.append(f"  flow Z{k + 1}: {fr.status}, residual ratio {ratio}")
        for label, ok in self.round_trips:
            lines.append(f"  round trip {label}: {'ok' if ok else 'FAIL'}")
        for v in self.verifications:
            lines.extend("  " + ln for ln in v.to_text().splitlines())
        for p in self.printed:
            lines.append("  " + p.to_text())
            if p.note:
                lines.append(f"    {p.note}")
        for a in self.annotations:
            lines.append(f"  [{a['kind']}] {a['ref']}: {a['text']}")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        recs: list[dict] = []
        for s in self.family_checks:
            recs.append({"kind": "family", **s.to_record()})
        if self.lie is not None:
            recs.extend(self.lie.to_records())
        for k, r, ok in self.symmetry_checks:
            recs.append({"kind": "symmetry", "field": k + 1, "max_residual": r, "passed": ok})
        if self.classification is not None:
            recs.append(self.classification.to_record())
        for k, fr in self.flows:
            recs.append({**fr.to_record(), "field": k + 1})
        for label, ok in self.round_trips:
            recs.append({"kind": "round-trip", "label": label, "passed": ok})
        for v in self.verifications:
            recs.extend(v.to_records())
        recs.extend(p.to_record() for p in self.printed)
        for a in self.annotations:
            recs.append({"kind": "annotation", **a})
        recs.append(
            {
                "kind": "summary",
                "verdict": self.verdict,
                "lie_verdict": self.lie_verdict,
                "expected_verdict": self.expected_verdict,
                "matched": self.matched,
                "failures": self.failures(),
            }
        )
        return [{"fixture": self.name, **r} for r in recs]


def _family_check(fx: Fixture, fam: SolutionFamily, sampler: Sampler, tol: float) -> StageResult:
    from ..transform import code_residual

    z = equiv_zero(code_residual(fx.code, fam), fam.sampler(sampler), tol)
    return StageResult(fam.label or "family", z.max_scaled, sum(z.residuals) / max(len(z.residuals), 1), z.n_samples, tol)


def run_fixture(
    name: str | Fixture,
    sampler: Sampler | None = None,
    grid: GridSpec | None = None,
    tol: float = 1e-9,
) -> FixtureReport:
    """Family pre-check, lie check, symmetries, classification, ODE and PDE verification."""
    fx = name if isinstance(name, Fixture) else load_fixture(name)
    s = sampler or Sampler()
    grid = grid or GridSpec(seed=s.seed)
    rep = FixtureReport(fx.name, fx.expected_verdict, annotations=list(fx.annotations))

    for fam in fx.families:
        rep.family_checks.append(_family_check(fx, fam, s, tol))
    if any(not c.passed for c in rep.family_checks):
        rep.stopped_at = "family"
        return rep

    rep.lie = check_linearizable(fx.code, s, tol)
    if rep.lie.verdict != LINEARIZABLE:
        rep.stopped_at = "lie"
        return rep

    for k, Z in enumerate(fx.symmetries):
        zt = is_symmetry(Z, fx.code, s, tol)
        rep.symmetry_checks.append((k, zt.max_scaled, bool(zt)))
    for entry in fx.printed_fields:
        rep.printed.append(compare_printed_field(entry, fx.symmetries, s))
    if len(fx.symmetries) == 2:
        rep.classification = classify_theorem_case(*fx.symmetries, s, stated_case=fx.stated_case)
    if fx.families:
        for k, Z in enumerate(fx.symmetries):
            rep.flows.append((k, flow_invariance_check(Z, fx.families[0], fx.code, 1e-3, s)))

    source = decompose(fx.code)
    for ft in fx.transformations:
        rt = fx.real_transformation(ft.label)
        if ft.printed_real is not None:
            rep.printed.append(compare_printed_transformation(ft.printed_real, rt, s, f"{ft.label} real form"))
        if not ft.is_composition and ft.t.has_inverse:
            rs = _region_sampler(s, ft.inverse_region)
            ok = all(equiv_zero(e, rs, tol) for e in round_trip_residuals(ft.t))
            rep.round_trips.append((ft.label, ok))
        for fam in fx.families:
            label = f"{ft.label} | {fam.label}"
            try:
                if ft.is_composition:
                    v = verify_pde_linearization(
                        source, rt, decompose(ft.target), fam, grid, z_of_Z=ft.z_of_Z, tol=fx.pde_tol, label=label
                    )
                else:
                    v = verify_linearization(
                        fx.code, ft.t, ft.target, fam, sampler=s, grid=grid, z_of_Z=ft.z_of_Z, tol=tol,
                        pde_tol=fx.pde_tol, label=label,
                    )
            except (EvaluationError, ValueError) as exc:
                v = VerificationReport(label, [StageResult("setup", float("inf"), float("inf"), 0, 0.0, note=str(exc))])
            rep.verifications.append(v)

    for entry in fx.printed_systems:
        which = entry.get("which", "source")
        code = fx.code if which == "source" else fx.transformation(which.split(":", 1)[1]).target
        rep.printed.append(compare_printed_system(entry, code, s))
    return rep


def run_corpus(
    names: Sequence[str] | None = None, sampler: Sampler | None = None, grid: GridSpec | None = None, tol: float = 1e-9
) -> list[FixtureReport]:
    return [run_fixture(n, sampler, grid, tol) for n in (names or list_fixtures())]
