"""Command-line front end: decompose, check, classify, verify, corpus.

Exit codes: 0 ok/pass, 2 input error, 3 not linearizable, 4 inconclusive,
5 a supplied field is not a symmetry, 6 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

from .codes import CodeError, code_from_dict, decompose
from .corpus import UnknownFixture, list_fixtures, load_fixture, run_fixture
from .expr import ExprError
from .expr.sampling import Sampler
from .family import SolutionFamily
from .lie import INCONCLUSIVE, LINEARIZABLE, check_linearizable
from .symmetry import ComplexVectorField, NotASymmetry, classify_theorem_case
from .transform import (
    ComplexPointTransformation,
    GridSpec,
    RealPointTransformation,
    VerificationReport,
    verify_linearization,
    verify_pde_linearization,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_LINEARIZABLE = 3
EXIT_INCONCLUSIVE = 4
EXIT_NOT_SYMMETRY = 5
EXIT_VERIFY_FAIL = 6


class InputError(Exception):
    pass


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        nx, ny = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 12x12, got {text!r}") from None
    if nx < 2 or ny < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points per axis")
    return nx, ny


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="sampler seed (default 42)")
    common.add_argument("--samples", type=_positive_int, default=32, help="accepted samples per check (default 32)")
    common.add_argument("--tol", type=float, default=1e-9, help="zero-test tolerance (default 1e-9)")
    common.add_argument("--grid", type=_grid, default=(12, 12), help="PDE grid, e.g. 12x12")
    common.add_argument("--output", choices=("text", "jsonl"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="complexlie", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="print the real PDE system of a code")
    d.add_argument("code", help="code JSON file or fixture name")

    c = sub.add_parser("check", parents=[common], help="test the linearizability conditions")
    c.add_argument("code", help="code JSON file or fixture name")

    k = sub.add_parser("classify", parents=[common], help="classify a pair of symmetry fields")
    k.add_argument("fields", nargs="+", help="two field JSON files, or one fixture name")
    k.add_argument("--code", dest="code_file", help="code JSON file; both fields must be symmetries of it")
    k.add_argument("--stated-case", help="case stated for the pair, reported side by side")

    v = sub.add_parser("verify", parents=[common], help="verify a linearizing transformation")
    v.add_argument("case", nargs="?", help="fixture name")
    v.add_argument("--code", dest="code_file")
    v.add_argument("--transform")
    v.add_argument("--target")
    v.add_argument("--family")

    r = sub.add_parser("corpus", parents=[common], help="run the fixture corpus")
    r.add_argument("--case", action="append", help="restrict to this fixture (repeatable)")
    r.add_argument("--export", metavar="DIR", help="write the fixture files to DIR and exit")
    return p


# helpers ------------------------------------------------------------------------------


def _sampler(args) -> Sampler:
    return Sampler(seed=args.seed, samples=args.samples)


def _gridspec(args) -> GridSpec:
    return GridSpec(args.grid[0], args.grid[1], seed=args.seed)


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _load_code(ref: str):
    if not ref.endswith(".json") and ref in list_fixtures():
        return load_fixture(ref).code
    d = _read_json(ref)
    if "code" in d and isinstance(d["code"], dict):
        d = d["code"]
    return code_from_dict(d)


def _emit(args, text: str, records: Iterable[dict], out=None) -> None:
    out = out or sys.stdout
    if args.output == "jsonl":
        for rec in records:
            out.write(json.dumps(rec, sort_keys=True) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


# subcommands ------------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    c = _load_code(args.code)
    sys_ = decompose(c)
    from .expr import to_text

    lines = [f"order {sys_.order}, convention weight {sys_.convention_weight:g}"]
    lines += sys_.printed()
    rec = {
        "kind": "decomposition",
        "order": sys_.order,
        "rhs_re": to_text(sys_.rhs_re),
        "rhs_im": to_text(sys_.rhs_im),
        "convention_weight": sys_.convention_weight,
    }
    _emit(args, "\n".join(lines), [rec])
    return EXIT_OK


def cmd_check(args) -> int:
    c = _load_code(args.code)
    rep = check_linearizable(c, _sampler(args), args.tol)
    _emit(args, rep.to_text(), rep.to_records())
    if rep.verdict == LINEARIZABLE:
        return EXIT_OK
    return EXIT_INCONCLUSIVE if rep.verdict == INCONCLUSIVE else EXIT_NOT_LINEARIZABLE


def cmd_classify(args) -> int:
    code = None
    stated = args.stated_case
    if len(args.fields) == 1:
        name = args.fields[0]
        try:
            fx = load_fixture(name)
        except UnknownFixture:
            raise InputError(f"expected two field files or one fixture name, got {name!r}") from None
        if len(fx.symmetries) != 2:
            raise InputError(f"fixture {name} has no symmetry pair")
        Z1, Z2 = fx.symmetries
        code = fx.code
        stated = stated or fx.stated_case
    elif len(args.fields) == 2:
        Z1, Z2 = (ComplexVectorField.from_dict(_read_json(f)) for f in args.fields)
    else:
        raise InputError("classify takes two field files or one fixture name")
    if args.code_file:
        code = _load_code(args.code_file)
    try:
        cc = classify_theorem_case(Z1, Z2, _sampler(args), code=code, stated_case=stated)
    except NotASymmetry as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_SYMMETRY
    _emit(args, cc.to_text(), [cc.to_record()])
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.case:
        rep = run_fixture(args.case, _sampler(args), _gridspec(args), args.tol)
        _emit(args, rep.to_text(), rep.to_records())
        return EXIT_OK if rep.verdict == "Pass" else EXIT_VERIFY_FAIL
    if not (args.code_file and args.transform and args.target and args.family):
        raise InputError("verify needs a fixture name or --code, --transform, --target and --family")
    source = _load_code(args.code_file)
    target = _load_code(args.target)
    fam_d = _read_json(args.family)
    fam = SolutionFamily.from_dict(fam_d)
    td = _read_json(args.transform)
    if "Z" in td:
        t = ComplexPointTransformation.from_dict(td)
        rep: VerificationReport = verify_linearization(
            source, t, target, fam, sampler=_sampler(args), grid=_gridspec(args), tol=args.tol, pde_tol=args.tol,
            label=Path(args.transform).stem,
        )
    elif all(k in td for k in "XYFG"):
        rt = RealPointTransformation.from_dict(td)
        rep = verify_pde_linearization(
            decompose(source), rt, decompose(target), fam, _gridspec(args), tol=args.tol, label=Path(args.transform).stem
        )
    else:
        raise InputError("transformation file needs Z and U, or X, Y, F and G")
    _emit(args, rep.to_text(), rep.to_records())
    return EXIT_OK if rep.verdict == "Pass" else EXIT_VERIFY_FAIL


def cmd_corpus(args) -> int:
    if args.export:
        from .corpus import export_fixtures

        for p in export_fixtures(args.export):
            print(p)
        return EXIT_OK
    names = list_fixtures()
    chosen = args.case or names
    unknown = [n for n in chosen if n not in names]
    if unknown:
        raise InputError(f"unknown fixture(s): {', '.join(unknown)}; known: {', '.join(names)}")
    chosen = [n for n in names if n in chosen]  # fixture-name order regardless of flag order
    reports = [run_fixture(n, _sampler(args), _gridspec(args), args.tol) for n in chosen]
    rows = [f"{'fixture':<12} {'expected':<16} {'lie':<16} {'verdict':<8} matched"]
    for r in reports:
        rows.append(f"{r.name:<12} {r.expected_verdict:<16} {str(r.lie_verdict):<16} {r.verdict:<8} {r.matched}")
    n_ok = sum(r.matched for r in reports)
    rows.append(f"{len(reports)} fixtures, {n_ok} expected-verdict matches")
    if args.verbose:
        rows = [r.to_text() for r in reports] + [""] + rows
    records = [rec for r in reports for rec in r.to_records()]
    records.append({"kind": "corpus-summary", "fixtures": len(reports), "matched": n_ok})
    _emit(args, "\n".join(rows), records)
    return EXIT_OK if n_ok == len(reports) else EXIT_VERIFY_FAIL


COMMANDS = {
    "decompose": cmd_decompose,
    "check": cmd_check,
    "classify": cmd_classify,
    "verify": cmd_verify,
    "corpus": cmd_corpus,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputError, ExprError, CodeError, UnknownFixture, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
