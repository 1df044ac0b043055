"""Complex ODEs and their decomposition into real PDE systems.

Semantics of a decomposed system: for an analytic solution ``u(z)`` with
``f + i g = u`` and ``h + i l = u'``, a second-order system states
``Re u'' = rhs_re`` and ``Im u'' = rhs_im``.  Written with real partial
derivatives the left-hand operators are ``f_xx - f_yy + 2 g_xy`` and
``g_xx - g_yy - 2 f_xy``, which equal ``4 Re u''`` and ``4 Im u''``; hence
``convention_weight = 1/4``.  First-order systems use ``f_x + g_y`` and
``g_x - f_y`` with weight ``1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .expr import (
    COMPLEX_ALPHABET,
    ZERO,
    Const,
    Expr,
    Pow,
    Prod,
    Quot,
    Sum,
    Var,
    add,
    div,
    mul,
    parse,
    power,
    realify,
    sub,
    to_text,
    var,
)
from .expr.sampling import Sampler, ZeroTest, equiv_zero


class CodeError(ValueError):
    """Invalid code definition."""


class NotCubic(CodeError):
    """The right-hand side is not a polynomial of degree <= 3 in up."""


def _check_free(e: Expr, allowed: Iterable[str], what: str) -> None:
    extra = e.free_symbols - set(allowed)
    if extra:
        raise CodeError(f"{what} may not depend on {', '.join(sorted(extra))}")


@dataclass(frozen=True)
class FirstOrderCode:
    """u' = w(z, u)."""

    w: Expr

    def __post_init__(self):
        _check_free(self.w, {"z", "u"}, "first-order right-hand side")

    order = 1


@dataclass(frozen=True)
class GeneralSecondOrderCode:
    """u'' = w(z, u, up)."""

    w: Expr

    def __post_init__(self):
        _check_free(self.w, COMPLEX_ALPHABET, "second-order right-hand side")

    order = 2


@dataclass(frozen=True)
class CubicCode:
    """u'' = A up^3 + B up^2 + C up + D with coefficients in (z, u)."""

    A: Expr = ZERO
    B: Expr = ZERO
    C: Expr = ZERO
    D: Expr = ZERO

    def __post_init__(self):
        for name in "ABCD":
            _check_free(getattr(self, name), {"z", "u"}, f"coefficient {name}")

    order = 2

    @property
    def w(self) -> Expr:
        up = var("up")
        return add(mul(self.A, power(up, 3)), mul(self.B, power(up, 2)), mul(self.C, up), self.D)

    def coefficients(self) -> tuple[Expr, Expr, Expr, Expr]:
        return self.A, self.B, self.C, self.D


Code = Union[FirstOrderCode, GeneralSecondOrderCode, CubicCode]


@dataclass(frozen=True)
class RealPdeSystem:
    order: int
    rhs_re: Expr
    rhs_im: Expr

    @property
    def convention_weight(self) -> float:
        return 0.25 if self.order == 2 else 0.5

    def operators(self) -> tuple[str, str]:
        if self.order == 2:
            return "f_xx - f_yy + 2*g_xy", "g_xx - g_yy - 2*f_xy"
        return "f_x + g_y", "g_x - f_y"

    def printed(self) -> list[str]:
        """Normative and literal forms, the latter with its weight annotated."""
        w = "1/4" if self.order == 2 else "1/2"
        lines = []
        for op, rhs in zip(self.operators(), (self.rhs_re, self.rhs_im)):
            lines.append(f"{w}*({op}) = {to_text(rhs)}")
        for op, rhs in zip(self.operators(), (self.rhs_re, self.rhs_im)):
            lines.append(f"{op} = {to_text(rhs)}    [weight-convention: operator carries factor {w}]")
        return lines


@dataclass(frozen=True)
class RealCoefficients:
    A1: Expr
    A2: Expr
    B1: Expr
    B2: Expr
    C1: Expr
    C2: Expr
    D1: Expr
    D2: Expr

    def pairs(self) -> dict[str, tuple[Expr, Expr]]:
        return {
            "A": (self.A1, self.A2),
            "B": (self.B1, self.B2),
            "C": (self.C1, self.C2),
            "D": (self.D1, self.D2),
        }


# cubic extraction -----------------------------------------------------------


def _poly_up(e: Expr) -> dict[int, Expr] | None:
    """Coefficients of ``e`` as a polynomial in ``up``, or None if it is not one."""
    if "up" not in e.free_symbols:
        return {0: e}
    if isinstance(e, Var):
        return {1: Const(1 + 0j)}
    if isinstance(e, Sum):
        out: dict[int, Expr] = {}
        for t in e.terms:
            p = _poly_up(t)
            if p is None:
                return None
            for k, c in p.items():
                out[k] = add(out.get(k, ZERO), c)
        return out
    if isinstance(e, Prod):
        acc: dict[int, Expr] = {0: Const(1 + 0j)}
        for f in e.factors:
            p = _poly_up(f)
            if p is None:
                return None
            nxt: dict[int, Expr] = {}
            for i, a in acc.items():
                for j, b in p.items():
                    nxt[i + j] = add(nxt.get(i + j, ZERO), mul(a, b))
            acc = nxt
        return acc
    if isinstance(e, Pow):
        if e.n < 0:
            return None
        base = _poly_up(e.base)
        if base is None:
            return None
        acc = {0: Const(1 + 0j)}
        for _ in range(e.n):
            nxt = {}
            for i, a in acc.items():
                for j, b in base.items():
                    nxt[i + j] = add(nxt.get(i + j, ZERO), mul(a, b))
            acc = nxt
        return acc
    if isinstance(e, Quot):
        if "up" in e.den.free_symbols:
            return None
        num = _poly_up(e.num)
        if num is None:
            return None
        return {k: div(c, e.den) for k, c in num.items()}
    return None  # Apply with up inside


def extract_cubic(g: GeneralSecondOrderCode | CubicCode, sampler: Sampler | None = None) -> CubicCode:
    if isinstance(g, CubicCode):
        return g
    p = _poly_up(g.w)
    if p is None:
        raise NotCubic("right-hand side depends non-polynomially on up")
    p = {k: c for k, c in p.items() if c != ZERO}
    if p and max(p) > 3:
        raise NotCubic(f"right-hand side has degree {max(p)} in up")
    code = CubicCode(p.get(3, ZERO), p.get(2, ZERO), p.get(1, ZERO), p.get(0, ZERO))
    check = equiv_zero(sub(code.w, g.w), sampler or Sampler())
    if not check:
        raise NotCubic(f"cubic reconstruction differs from w (max residual {check.max_residual:.3g})")
    return code


# decomposition --------------------------------------------------------------


def decompose_first(c: FirstOrderCode) -> RealPdeSystem:
    re, im = realify(c.w)
    return RealPdeSystem(1, re, im)


def decompose_second(c: CubicCode | GeneralSecondOrderCode) -> RealPdeSystem:
    re, im = realify(c.w)
    return RealPdeSystem(2, re, im)


def decompose(c: Code) -> RealPdeSystem:
    return decompose_first(c) if isinstance(c, FirstOrderCode) else decompose_second(c)


def real_coefficients(c: CubicCode) -> RealCoefficients:
    parts: list[Expr] = []
    for k in c.coefficients():
        parts.extend(realify(k))
    return RealCoefficients(*parts)


def template_rhs(rc: RealCoefficients) -> tuple[Expr, Expr]:
    """The general real right-hand sides in terms of the coefficient pairs."""
    h, l = var("h"), var("l")
    cube_re = sub(power(h, 3), mul(3, h, power(l, 2)))
    cube_im = sub(mul(3, power(h, 2), l), power(l, 3))
    sq_re = sub(power(h, 2), power(l, 2))
    sq_im = mul(2, h, l)
    re = add(
        mul(rc.A1, cube_re), mul(-1, rc.A2, cube_im),
        mul(rc.B1, sq_re), mul(-1, rc.B2, sq_im),
        mul(rc.C1, h), mul(-1, rc.C2, l), rc.D1,
    )
    im = add(
        mul(rc.A1, cube_im), mul(rc.A2, cube_re),
        mul(rc.B1, sq_im), mul(rc.B2, sq_re),
        mul(rc.C2, h), mul(rc.C1, l), rc.D2,
    )
    return re, im


def template_check(c: CubicCode, sampler: Sampler | None = None) -> tuple[ZeroTest, ZeroTest]:
    """Compare the decomposed system with the general coefficient template."""
    sys = decompose_second(c)
    t_re, t_im = template_rhs(real_coefficients(c))
    s = sampler or Sampler()
    return equiv_zero(sub(sys.rhs_re, t_re), s), equiv_zero(sub(sys.rhs_im, t_im), s)


def cr_check(pair: tuple[Expr, Expr], sampler: Sampler | None = None) -> bool:
    """Cauchy-Riemann relations of a realified pair in (x, y) and in (f, g)."""
    from .expr import diff

    s = sampler or Sampler()
    k1, k2 = pair
    for a, b in (("x", "y"), ("f", "g")):
        if not equiv_zero(sub(diff(k1, a), diff(k2, b)), s):
            return False
        if not equiv_zero(add(diff(k1, b), diff(k2, a)), s):
            return False
    return True


# file format ----------------------------------------------------------------


def code_from_dict(d: Mapping, params: Iterable[str] = ()) -> Code:
    alphabet = set(COMPLEX_ALPHABET) | set(params) | set(d.get("params", ()))
    try:
        order = int(d.get("order", 2))
        form = d.get("form", "general" if order == 2 else "first")
        if form == "first" or order == 1:
            return FirstOrderCode(parse(str(d["w"]), alphabet))
        if form == "cubic":
            return CubicCode(*(parse(str(d.get(k, "0")), alphabet) for k in "ABCD"))
        if form == "general":
            return GeneralSecondOrderCode(parse(str(d["w"]), alphabet))
    except KeyError as exc:
        raise CodeError(f"code definition missing field {exc.args[0]!r}") from None
    raise CodeError(f"unknown code form {form!r}")


def code_to_dict(c: Code) -> dict:
    if isinstance(c, FirstOrderCode):
        return {"order": 1, "form": "first", "w": to_text(c.w)}
    if isinstance(c, CubicCode):
        return {"order": 2, "form": "cubic", **{k: to_text(v) for k, v in zip("ABCD", c.coefficients())}}
    return {"order": 2, "form": "general", "w": to_text(c.w)}

