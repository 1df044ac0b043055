"""Point transformations and end-to-end linearization checks.

Verification works on exact solution families.  At the ODE level the
family is pushed forward symbolically and the target residual is tested
with :func:`equiv_zero`.  At the PDE level four stages run on a regular
grid in the z-plane for a handful of seeded parameter tuples:

1. residual of the source system computed from the realified family with
   real partial derivatives;
2. non-singularity of the 4x4 Jacobian of the real transformation;
3. residual of the target system, from the real transformation by the
   real chain rule along the solution;
4. a finite-difference oracle: the target side is sampled on a regular
   (X, Y) stencil through a closed-form inverse of the induced map and
   differentiated numerically.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .codes import Code, FirstOrderCode, RealPdeSystem, decompose
from .expr import (
    COMPLEX_ALPHABET,
    REAL_ALPHABET,
    TARGET_ALPHABET,
    Expr,
    add,
    compile_expr,
    diff,
    div,
    mul,
    parse,
    power,
    realify,
    sub,
    subs,
    to_text,
)
from .expr.errors import EvaluationError
from .expr.realify import pdiv
from .expr.sampling import Sampler, equiv_zero
from .family import SolutionFamily

PASS = "Pass"
FAIL = "Fail"


class SingularPushforward(ValueError):
    pass


class SingularJacobian(ValueError):
    pass


class DegenerateParameters(ValueError):
    pass


class MissingInverse(ValueError):
    pass


# transformations ---------------------------------------------------------------


@dataclass(frozen=True)
class ComplexPointTransformation:
    """(z, u) -> (Z, U), optionally with the inverse written in (Z, U)."""

    Z: Expr
    U: Expr
    z_inv: Expr | None = None
    u_inv: Expr | None = None
    inputs: tuple[str, str] = ("z", "u")

    @property
    def has_inverse(self) -> bool:
        return self.z_inv is not None and self.u_inv is not None

    def to_dict(self) -> dict:
        d = {"Z": to_text(self.Z), "U": to_text(self.U)}
        if self.has_inverse:
            d["z_inv"] = to_text(self.z_inv)
            d["u_inv"] = to_text(self.u_inv)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ComplexPointTransformation":
        zi = parse(d["z_inv"], TARGET_ALPHABET) if "z_inv" in d else None
        ui = parse(d["u_inv"], TARGET_ALPHABET) if "u_inv" in d else None
        return cls(parse(d["Z"], COMPLEX_ALPHABET), parse(d["U"], COMPLEX_ALPHABET), zi, ui)


@dataclass(frozen=True)
class RealPointTransformation:
    """(x, y, f, g) -> (X, Y, F, G)."""

    X: Expr
    Y: Expr
    F: Expr
    G: Expr
    inverse: tuple[Expr, Expr, Expr, Expr] | None = None
    inputs: tuple[str, str, str, str] = ("x", "y", "f", "g")

    @property
    def components(self) -> tuple[Expr, Expr, Expr, Expr]:
        return self.X, self.Y, self.F, self.G

    def to_dict(self) -> dict:
        return {k: to_text(v) for k, v in zip("XYFG", self.components)}

    @classmethod
    def from_dict(cls, d: Mapping, inputs: Sequence[str] = ("x", "y", "f", "g")) -> "RealPointTransformation":
        return cls(*(parse(str(d[k]), REAL_ALPHABET) for k in "XYFG"), inputs=tuple(inputs))  # type: ignore[arg-type]


def identity_transformation() -> ComplexPointTransformation:
    return ComplexPointTransformation(parse("z"), parse("u"), parse("Z", TARGET_ALPHABET), parse("U", TARGET_ALPHABET))


def realify_transformation(t: ComplexPointTransformation) -> RealPointTransformation:
    X, Y = realify(t.Z)
    F, G = realify(t.U)
    inv = None
    if t.has_inverse:
        inv = (*realify(t.z_inv), *realify(t.u_inv))
    inputs = ("x", "y", "f", "g") if t.inputs == ("z", "u") else ("X", "Y", "F", "G")
    return RealPointTransformation(X, Y, F, G, inv, inputs)  # type: ignore[arg-type]


def compose(first: ComplexPointTransformation, second: ComplexPointTransformation) -> ComplexPointTransformation:
    """Apply ``first`` then ``second`` (``second`` is read in its own input names)."""
    a, b = second.inputs
    m = {a: first.Z, b: first.U}
    return ComplexPointTransformation(subs(second.Z, m), subs(second.U, m), inputs=first.inputs)


def compose_real(first: RealPointTransformation, second: RealPointTransformation) -> RealPointTransformation:
    m = dict(zip(second.inputs, first.components))
    return RealPointTransformation(*(subs(c, m) for c in second.components), inputs=first.inputs)  # type: ignore[arg-type]


def round_trip_residuals(t: ComplexPointTransformation) -> tuple[Expr, Expr]:
    """inverse(forward(z, u)) - (z, u); both vanish for a correct inverse."""
    if not t.has_inverse:
        raise MissingInverse("transformation has no inverse")
    m = {"Z": t.Z, "U": t.U}
    return sub(subs(t.z_inv, m), parse("z")), sub(subs(t.u_inv, m), parse("u"))


def case6_complex(a: complex, b: complex) -> ComplexPointTransformation:
    """Z~ = U + (b/3a) Z,  U~ = U^2/2 + (b/3a) Z U + (b^2/(18 a^2) + 1/(2a)) Z^2 in inputs (Z, U)."""
    Z, U = parse("Z", TARGET_ALPHABET), parse("U", TARGET_ALPHABET)
    k = b / (3 * a)
    q = b * b / (18 * a * a) + 1 / (2 * a)
    return ComplexPointTransformation(
        add(U, mul(k, Z)),
        add(mul(0.5, power(U, 2)), mul(k, Z, U), mul(q, power(Z, 2))),
        inputs=("Z", "U"),
    )


def case6_canonical_transform(a1: float, a2: float, b1: float, b2: float, *, literal: bool = False) -> RealPointTransformation:
    """Real canonical map for two non-proportional, non-commuting symmetries.

    ``literal=True`` returns the printed real components verbatim; they
    agree with the realified complex map whenever Im(b^2 conj(a)^2) = 0.
    """
    if a1 == 0 and a2 == 0:
        raise DegenerateParameters("a1 = a2 = 0")
    if not literal:
        return realify_transformation(case6_complex(complex(a1, a2), complex(b1, b2)))
    N = a1 * a1 + a2 * a2
    P = b1 * a1 + b2 * a2
    Q = b2 * a1 - b1 * a2
    R = (b1 * b1 - b2 * b2) * (a1 * a1 - a2 * a2) + 4 * b1 * b2 * a1 * a2
    S = 2 * b1 * b2 * (a1 * a1 - a2 * a2) - 2 * a1 * a2 * (b1 * b1 - b2 * b2)
    alpha = set(REAL_ALPHABET)
    X, Y, F, G = (parse(s, alpha) for s in "XYFG")
    lin_x = sub(mul(P, X), mul(Q, Y))
    lin_y = add(mul(P, Y), mul(Q, X))
    d2 = sub(power(X, 2), power(Y, 2))
    xy = mul(X, Y)
    Xt = add(F, div(lin_x, 3 * N))
    Yt = add(G, div(lin_y, 3 * N))
    Ft = add(
        mul(0.5, sub(power(F, 2), power(G, 2))),
        div(sub(mul(lin_x, F), mul(lin_y, G)), 3 * N),
        div(sub(mul(R, d2), mul(2 * S, xy)), 18 * N * N),
        div(add(mul(a1, d2), mul(2 * a2, xy)), 2 * N),
    )
    Gt = add(
        mul(F, G),
        div(add(mul(lin_x, G), mul(lin_y, F)), 3 * N),
        div(sub(mul(2 * R, xy), mul(S, d2)), 18 * N * N),
        div(sub(mul(2 * a1, xy), mul(a2, d2)), 2 * N),
    )
    return RealPointTransformation(Xt, Yt, Ft, Gt, inputs=("X", "Y", "F", "G"))


def case6_target_code(a: complex, b: complex) -> Code:
    """Z U'' = a U'^3 + b U'^2 + (1 + b^2/(3a)) U' + b/(3a) + b^3/(27 a^2), in (z, u, up)."""
    from .codes import GeneralSecondOrderCode

    up = parse("up")
    rhs = add(
        mul(a, power(up, 3)),
        mul(b, power(up, 2)),
        mul(1 + b * b / (3 * a), up),
        b / (3 * a) + b**3 / (27 * a * a),
    )
    return GeneralSecondOrderCode(div(rhs, parse("z")))


# reports ---------------------------------------------------------------------------


@dataclass
class StageResult:
    name: str
    max_residual: float
    mean_residual: float
    n_points: int
    tol: float
    n_skipped: int = 0
    executed: bool = True
    note: str = ""
    lower_bound: bool = False  # value must exceed tol (Jacobian determinant)

    @property
    def passed(self) -> bool:
        if not self.executed:
            return True
        if self.n_points == 0:
            return False
        return self.max_residual > self.tol if self.lower_bound else self.max_residual <= self.tol

    def to_record(self) -> dict:
        return {
            "stage": self.name,
            "executed": self.executed,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "n_points": self.n_points,
            "n_skipped": self.n_skipped,
            "tol": self.tol,
            "passed": self.passed,
            "lower_bound": self.lower_bound,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    label: str
    stages: list[StageResult] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def verdict(self) -> str:
        return PASS if self.stages and all(s.passed for s in self.stages) else FAIL

    def stage(self, name: str) -> StageResult:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def failed_stage(self) -> str | None:
        for s in self.stages:
            if not s.passed:
                return s.name
        return None

    def to_text(self) -> str:
        lines = [f"{self.label}: {self.verdict}"]
        for s in self.stages:
            if not s.executed:
                lines.append(f"  {s.name:<22} skipped ({s.note})")
                continue
            mark = "ok" if s.passed else "FAIL"
            if s.lower_bound:
                lines.append(
                    f"  {s.name:<22} min |det| {s.max_residual:.3e}  threshold {s.tol:.0e}  "
                    f"points {s.n_points} (skipped {s.n_skipped})  {mark}"
                )
                continue
            lines.append(
                f"  {s.name:<22} max {s.max_residual:.3e}  mean {s.mean_residual:.3e}  "
                f"tol {s.tol:.0e}  points {s.n_points} (skipped {s.n_skipped})  {mark}"
            )
            if s.note:
                lines.append(f"    {s.note}")
        for a in self.annotations:
            lines.append(f"  note: {a}")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [{"kind": "verification", "label": self.label, **s.to_record()} for s in self.stages]


def _stage(name: str, residuals: Sequence[float], tol: float, skipped: int = 0, note: str = "") -> StageResult:
    if not residuals:
        return StageResult(name, float("inf"), float("inf"), 0, tol, skipped, True, note or "no accepted points")
    return StageResult(name, max(residuals), sum(residuals) / len(residuals), len(residuals), tol, skipped, True, note)


# ODE level ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PushforwardCurve:
    Z: Expr
    U: Expr
    Up: Expr
    Upp: Expr | None


def pushforward_solution(
    fam: SolutionFamily, t: ComplexPointTransformation, sampler: Sampler | None = None, order: int = 2
) -> PushforwardCurve:
    """(Z(z), U(z), dU/dZ, d2U/dZ2) along the family, by the chain rule."""
    u = fam.u
    m = {"u": u}
    Zc, Uc = subs(t.Z, m), subs(t.U, m)
    dZ = diff(Zc, "z")
    s = fam.sampler(sampler)
    try:
        if equiv_zero(dZ, s, 1e-12):
            raise SingularPushforward("dZ/dz vanishes identically along the family")
    except EvaluationError as exc:
        raise SingularPushforward(str(exc)) from None
    Up = div(diff(Uc, "z"), dZ)
    Upp = div(diff(Up, "z"), dZ) if order == 2 else None
    return PushforwardCurve(Zc, Uc, Up, Upp)


def code_residual(c: Code, fam: SolutionFamily) -> Expr:
    u = fam.u
    if isinstance(c, FirstOrderCode):
        return sub(diff(u, "z"), subs(c.w, {"u": u}))
    return sub(diff(u, "z", 2), subs(c.w, {"u": u, "up": diff(u, "z")}))


def target_residual(curve: PushforwardCurve, target: Code) -> Expr:
    m = {"z": curve.Z, "u": curve.U, "up": curve.Up}
    if isinstance(target, FirstOrderCode):
        return sub(curve.Up, subs(target.w, m))
    return sub(curve.Upp, subs(target.w, m))


def verify_ode_linearization(
    source: Code,
    t: ComplexPointTransformation,
    target: Code,
    fam: SolutionFamily,
    sampler: Sampler | None = None,
    tol: float = 1e-9,
    label: str = "ode",
) -> VerificationReport:
    t0 = time.perf_counter()
    s = fam.sampler(sampler)
    rep = VerificationReport(label)
    for name, e in (("source-residual", code_residual(source, fam)),):
        z = equiv_zero(e, s, tol)
        rep.stages.append(StageResult(name, z.max_scaled, _mean(z.scaled), z.n_samples, tol))
    curve = pushforward_solution(fam, t, sampler, order=target.order)
    z = equiv_zero(target_residual(curve, target), s, tol)
    rep.stages.append(StageResult("target-ode-residual", z.max_scaled, _mean(z.scaled), z.n_samples, tol))
    rep.elapsed = time.perf_counter() - t0
    return rep


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


# Jacobian ------------------------------------------------------------------------------


def jacobian_matrix(rt: RealPointTransformation) -> list[list[Expr]]:
    return [[diff(c, v) for v in rt.inputs] for c in rt.components]


def jacobian_nonsingular(
    rt: RealPointTransformation, sampler: Sampler | None = None, threshold: float = 1e-6
) -> tuple[bool, float]:
    """Minimum |det J| over accepted samples, and whether it exceeds ``threshold``."""
    s = sampler or Sampler()
    entries = [e for row in jacobian_matrix(rt) for e in row]
    dets = []
    for smp in s.sweep(entries, rt.inputs):
        m = np.array([v.real for v in smp.values]).reshape(4, 4)
        dets.append(abs(float(np.linalg.det(m))))
    mn = min(dets) if dets else 0.0
    return mn > threshold, mn


# PDE level ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    nx: int = 12
    ny: int = 12
    n_params: int = 5
    seed: int = 42
    fd_step: float = 1e-3

    @classmethod
    def parse(cls, text: str, **kw) -> "GridSpec":
        a, _, b = text.lower().partition("x")
        return cls(int(a), int(b), **kw)


def _parameter_tuples(fam: SolutionFamily, n: int, seed: int) -> list[dict[str, complex]]:
    rng = random.Random(seed)
    out = []
    names = sorted(fam.params)
    for _ in range(n):
        d = {}
        for p in names:
            r = fam.params[p]
            re = rng.uniform(*r.re)
            im = rng.uniform(*r.im) if r.im[0] != r.im[1] else r.im[0]
            d[p] = complex(re, im)
        out.append(d)
    return out


def _grid(fam: SolutionFamily, spec: GridSpec) -> list[complex]:
    xs = np.linspace(*fam.domain.re, spec.nx)
    ys = np.linspace(*fam.domain.im, spec.ny) if fam.domain.im[0] != fam.domain.im[1] else [fam.domain.im[0]]
    return [complex(float(x), float(y)) for x in xs for y in ys]


def _total_x(e: Expr, order: int, w: tuple[Expr, Expr] | None) -> Expr:
    """Total x-derivative along a CR solution: h = f_x, l = g_x, (h_x, l_x) = w."""
    parts = [diff(e, "x"), mul(parse("h", REAL_ALPHABET), diff(e, "f")), mul(parse("l", REAL_ALPHABET), diff(e, "g"))]
    if order == 2 and w is not None:
        parts += [mul(w[0], diff(e, "h")), mul(w[1], diff(e, "l"))]
    return add(*parts)


def _total_y(e: Expr) -> Expr:
    """Total y-derivative of e(x, y, f, g) along a CR solution: f_y = -l, g_y = h."""
    h, l = parse("h", REAL_ALPHABET), parse("l", REAL_ALPHABET)
    return add(diff(e, "y"), mul(-1, l, diff(e, "f")), mul(h, diff(e, "g")))


def analyticity_residual_real(source: RealPdeSystem, rt: RealPointTransformation) -> tuple[Expr, ...]:
    """CR relations of (X, Y) and (F, G) along solutions of the source.

    The image of a CR solution is an analytic curve U(Z) only when these
    vanish; a real map that is not the realification of an analytic one
    fails here even if its x-derivatives happen to fit the target.
    """
    hl = {"h": source.rhs_re, "l": source.rhs_im} if source.order == 1 else {}
    out = []
    for a, b in ((rt.X, rt.Y), (rt.F, rt.G)):
        ax, bx = _total_x(a, 1, None), _total_x(b, 1, None)
        ay, by = _total_y(a), _total_y(b)
        out += [sub(ax, by), add(ay, bx)]
    return tuple(subs(e, hl) if hl else e for e in out)


def target_residual_real(source: RealPdeSystem, rt: RealPointTransformation, target: RealPdeSystem) -> tuple[Expr, Expr]:
    """Target-system residual in (x, y, f, g, h, l) along solutions of the source.

    For first-order sources (h, l) are themselves the source right-hand sides.
    """
    if rt.inputs != ("x", "y", "f", "g"):
        raise ValueError("transformation must act on (x, y, f, g)")
    w = (source.rhs_re, source.rhs_im)
    hl = {}
    if source.order == 1:
        hl = {"h": source.rhs_re, "l": source.rhs_im}
    comps = [subs(c, hl) if hl else c for c in rt.components]
    Dx = [_total_x(c, source.order, w) for c in comps]
    if source.order == 1:
        Dx = [subs(d, hl) for d in Dx]
    zp = (Dx[0], Dx[1])
    H, L = pdiv((Dx[2], Dx[3]), zp)
    m = {"x": rt.X, "y": rt.Y, "f": rt.F, "g": rt.G}
    if target.order == 1:
        m.update({"h": H, "l": L})
        return sub(H, subs(target.rhs_re, m)), sub(L, subs(target.rhs_im, m))
    if source.order == 1:
        raise ValueError("a first-order source cannot be mapped to a second-order target")
    Hx, Lx = _total_x(H, 2, w), _total_x(L, 2, w)
    Hpp, Lpp = pdiv((Hx, Lx), zp)
    m.update({"h": H, "l": L})
    return sub(Hpp, subs(target.rhs_re, m)), sub(Lpp, subs(target.rhs_im, m))


def source_residual_real(source: RealPdeSystem, u_member: Expr) -> tuple[Expr, Expr]:
    """Residual of the source system for the CR pair realified from one family member."""
    f, g = realify(u_member)
    fx, fy, gx, gy = diff(f, "x"), diff(f, "y"), diff(g, "x"), diff(g, "y")
    m = {"f": f, "g": g, "h": fx, "l": gx}
    if source.order == 1:
        lre = mul(0.5, add(fx, gy))
        lim = mul(0.5, sub(gx, fy))
    else:
        lre = mul(0.25, add(diff(fx, "x"), mul(-1, diff(fy, "y")), mul(2, diff(gx, "y"))))
        lim = mul(0.25, add(diff(gx, "x"), mul(-1, diff(gy, "y")), mul(-2, diff(fx, "y"))))
    return sub(lre, subs(source.rhs_re, m)), sub(lim, subs(source.rhs_im, m))


def verify_pde_linearization(
    source: RealPdeSystem,
    rt: RealPointTransformation,
    target: RealPdeSystem,
    fam: SolutionFamily,
    grid: GridSpec | None = None,
    *,
    z_of_Z: Sequence[Expr] | None = None,
    tol: float = 1e-9,
    fd_tol: float = 1e-4,
    jacobian_threshold: float = 1e-6,
    critical_tol: float = 0.1,
    label: str = "pde",
) -> VerificationReport:
    t0 = time.perf_counter()
    spec = grid or GridSpec()
    rep = VerificationReport(label)
    branches = tuple(fam.z_of_Z if z_of_Z is None else z_of_Z)
    params = _parameter_tuples(fam, spec.n_params, spec.seed)
    points = _grid(fam, spec)

    t_re, t_im = target_residual_real(source, rt, target)
    cr = analyticity_residual_real(source, rt)
    jac = [e for row in jacobian_matrix(rt) for e in row]
    real_syms = ("x", "y", "f", "g", "h", "l")
    f_t3 = [compile_expr(e, real_syms, margin=0.0) for e in (t_re, t_im, *cr)]
    f_jac = [compile_expr(e, real_syms[:4]) for e in jac]
    f_rt = [compile_expr(e, real_syms[:4]) for e in rt.components]
    f_trhs = [compile_expr(e, real_syms) for e in (target.rhs_re, target.rhs_im)]
    # dZ/dz along the solution; the induced map is not invertible where it vanishes
    dzX, dzY = (_total_x(c, 1, None) for c in rt.components[:2])
    f_dz = [compile_expr(e, real_syms) for e in (dzX, dzY)]

    s1, s2, s3, s4 = [], [], [], []
    skip = [0, 0, 0, 0]
    branch_fail = 0
    near_critical = 0
    for pv in params:
        member = fam.at(pv)
        r_re, r_im = source_residual_real(source, member)
        f_s1 = [compile_expr(e, ("x", "y"), margin=0.0) for e in (r_re, r_im)]
        f_u = compile_expr(member, ("z",), margin=0.0)
        f_up = compile_expr(diff(member, "z"), ("z",), margin=0.0)
        excl = [(ex, compile_expr(subs(ex.expr, pv), ("z",))) for ex in fam.exclusions]
        f_inv = [compile_expr(subs(b, pv), ("Z",), margin=1e-12) for b in branches]

        def accept(z: complex) -> bool:
            try:
                return not any(ex.rejects(g(z)) for ex, g in excl)
            except EvaluationError:
                return False

        def state(z: complex):
            u = f_u(z)
            up = f_up(z)
            return z.real, z.imag, u.real, u.imag, up.real, up.imag

        for z0 in points:
            if not accept(z0):
                for k in range(4):
                    skip[k] += 1
                continue
            # stage 1
            try:
                s1.append(max(abs(fn(complex(z0.real), complex(z0.imag))) for fn in f_s1))
            except EvaluationError:
                skip[0] += 1
            try:
                st = state(z0)
            except EvaluationError:
                for k in range(1, 4):
                    skip[k] += 1
                continue
            # stage 2
            try:
                m = np.array([fn(*st[:4]).real for fn in f_jac]).reshape(4, 4)
                s2.append(abs(float(np.linalg.det(m))))
            except EvaluationError:
                skip[1] += 1
            # stage 3
            try:
                s3.append(max(abs(fn(*st)) for fn in f_t3))
            except EvaluationError:
                skip[2] += 1
            # stage 4
            if not branches:
                continue
            try:
                dz = abs(complex(f_dz[0](*st).real, f_dz[1](*st).real))
            except EvaluationError:
                dz = 0.0
            if dz < critical_tol:
                near_critical += 1
                skip[3] += 1
                continue
            try:
                r, ok = _fd_residual(z0, st, f_rt, f_inv, f_u, f_trhs, target.order, spec.fd_step, accept)
            except EvaluationError:
                skip[3] += 1
                continue
            if not ok:
                branch_fail += 1
                skip[3] += 1
                continue
            s4.append(r)

    rep.stages.append(_stage("source-pde-residual", s1, tol, skip[0]))
    mn = min(s2) if s2 else 0.0
    rep.stages.append(StageResult("jacobian", mn, _mean(s2), len(s2), jacobian_threshold, skip[1], lower_bound=True))
    rep.stages.append(_stage("target-pde-residual", s3, tol, skip[2]))
    if branches:
        bits = []
        if near_critical:
            bits.append(f"{near_critical} points with |dZ/dz| < {critical_tol:g} skipped")
        if branch_fail:
            bits.append(f"{branch_fail} stencils rejected by branch round trip")
        note = "; ".join(bits)
        rep.stages.append(_stage("fd-oracle-residual", s4, fd_tol, skip[3], note))
    else:
        rep.stages.append(StageResult("fd-oracle-residual", 0.0, 0.0, 0, fd_tol, 0, False, "no closed-form inverse"))
        rep.annotations.append("stage 4 skipped: no closed-form inverse of the induced map")
    rep.elapsed = time.perf_counter() - t0
    return rep


_STENCIL = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]


def _fd_residual(z0, st, f_rt, f_inv, f_u, f_trhs, order, h, accept):
    """Finite-difference target residual at the image of z0; (residual, branch_ok)."""
    X0, Y0, F0, G0 = (fn(*st[:4]).real for fn in f_rt)
    Z0 = complex(X0, Y0)
    vals: dict[tuple[int, int], tuple[float, float]] = {}
    for a, b in _STENCIL:
        Zs = Z0 + h * complex(a, b)
        best = None
        for fn in f_inv:
            try:
                z = fn(Zs)
            except EvaluationError:
                continue
            if best is None or abs(z - z0) < abs(best - z0):
                best = z
        if best is None or abs(best - z0) > 10 * h * (1 + abs(z0)) * 10 or not accept(best):
            return 0.0, False
        u = f_u(best)
        X, Y, F, G = (fn(best.real, best.imag, u.real, u.imag).real for fn in f_rt)
        if abs(complex(X, Y) - Zs) > 1e-8 * (1 + abs(Zs)):
            return 0.0, False
        vals[(a, b)] = (F, G)
    F = {k: v[0] for k, v in vals.items()}
    G = {k: v[1] for k, v in vals.items()}
    FX = (F[(1, 0)] - F[(-1, 0)]) / (2 * h)
    FY = (F[(0, 1)] - F[(0, -1)]) / (2 * h)
    GX = (G[(1, 0)] - G[(-1, 0)]) / (2 * h)
    GY = (G[(0, 1)] - G[(0, -1)]) / (2 * h)
    H, L = FX, GX
    args = (X0, Y0, F[(0, 0)], G[(0, 0)], H, L)
    tre, tim = (fn(*map(complex, args)).real for fn in f_trhs)
    if order == 1:
        return max(abs(0.5 * (FX + GY) - tre), abs(0.5 * (GX - FY) - tim)), True
    FXX = (F[(1, 0)] - 2 * F[(0, 0)] + F[(-1, 0)]) / h**2
    FYY = (F[(0, 1)] - 2 * F[(0, 0)] + F[(0, -1)]) / h**2
    GXX = (G[(1, 0)] - 2 * G[(0, 0)] + G[(-1, 0)]) / h**2
    GYY = (G[(0, 1)] - 2 * G[(0, 0)] + G[(0, -1)]) / h**2
    FXY = (F[(1, 1)] - F[(1, -1)] - F[(-1, 1)] + F[(-1, -1)]) / (4 * h * h)
    GXY = (G[(1, 1)] - G[(1, -1)] - G[(-1, 1)] + G[(-1, -1)]) / (4 * h * h)
    r1 = 0.25 * (FXX - FYY + 2 * GXY) - tre
    r2 = 0.25 * (GXX - GYY - 2 * FXY) - tim
    return max(abs(r1), abs(r2)), True


def verify_linearization(
    source: Code,
    t: ComplexPointTransformation,
    target: Code,
    fam: SolutionFamily,
    *,
    sampler: Sampler | None = None,
    grid: GridSpec | None = None,
    z_of_Z: Sequence[Expr] | None = None,
    tol: float = 1e-9,
    pde_tol: float = 1e-9,
    label: str = "",
) -> VerificationReport:
    """ODE stages followed by PDE stages for one transformation."""
    ode = verify_ode_linearization(source, t, target, fam, sampler, tol, label)
    pde = verify_pde_linearization(
        decompose(source), realify_transformation(t), decompose(target), fam, grid, z_of_Z=z_of_Z, tol=pde_tol, label=label
    )
    rep = VerificationReport(label, [*ode.stages, *pde.stages], [*ode.annotations, *pde.annotations])
    rep.elapsed = ode.elapsed + pde.elapsed
    return rep


def complex_jacobian(t: ComplexPointTransformation) -> Expr:
    a, b = t.inputs
    return sub(mul(diff(t.Z, a), diff(t.U, b)), mul(diff(t.Z, b), diff(t.U, a)))


def evaluate_at(e: Expr, values: Mapping[str, complex]) -> complex:
    syms = sorted(e.free_symbols)
    return compile_expr(e, syms)(*(complex(values[s]) for s in syms))
