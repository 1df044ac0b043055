"""Infix printing that the parser reads back to the identical canonical tree."""

from __future__ import annotations

from .nodes import Apply, Const, Expr, Pow, Prod, Quot, Sum, Var, mul

_SUM, _NEG, _PROD, _POW, _ATOM = 1, 2, 3, 4, 5


def _fmt_real(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _const(v: complex) -> tuple[str, int]:
    re, im = v.real, v.imag
    if im == 0:
        return _fmt_real(re), (_ATOM if re >= 0 else _NEG)
    if im == 1:
        imag = "i"
    elif im == -1:
        imag = "-i"
    else:
        imag = f"{_fmt_real(im)}*i"
    if re == 0:
        return imag, (_NEG if im < 0 else (_ATOM if im == 1 else _PROD))
    if im < 0:
        return f"{_fmt_real(re)} - {imag[1:]}", _SUM
    return f"{_fmt_real(re)} + {imag}", _SUM


def _is_negative(t: Expr) -> bool:
    """True when a sum term reads better after a leading minus."""
    c = None
    if isinstance(t, Const):
        c = t.value
    elif isinstance(t, Prod) and isinstance(t.factors[0], Const):
        c = t.factors[0].value
    elif isinstance(t, Quot):
        return _is_negative(t.num)
    if c is None:
        return False
    return c.real < 0 or (c.real == 0 and c.imag < 0)


def _wrap(pair: tuple[str, int], need: int) -> str:
    text, prec = pair
    return f"({text})" if prec < need else text


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _const(e.value)
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Apply):
        return f"{e.fn}({_render(e.arg)[0]})", _ATOM
    if isinstance(e, Pow):
        return f"{_wrap(_render(e.base), _ATOM)}^{e.n}", _POW
    if isinstance(e, Prod):
        factors = list(e.factors)
        lead = ""
        prec = _PROD
        if isinstance(factors[0], Const):
            c = factors[0].value
            if c == -1:
                lead, prec = "-", _NEG
                factors = factors[1:]
            elif c.imag == 0 and c.real < 0:
                lead, prec = _fmt_real(c.real) + "*", _NEG
                factors = factors[1:]
        body = "*".join(_wrap(_render(f), _PROD) for f in factors)
        return lead + body, prec
    if isinstance(e, Quot):
        num = _wrap(_render(e.num), _NEG)
        den = _wrap(_render(e.den), _POW)
        return f"{num}/{den}", _PROD
    if isinstance(e, Sum):
        parts = [_wrap(_render(e.terms[0]), _NEG)]
        for t in e.terms[1:]:
            if _is_negative(t):
                parts.append(" - " + _wrap(_render(mul(-1, t)), _PROD))
            else:
                parts.append(" + " + _wrap(_render(t), _PROD))
        return "".join(parts), _SUM
    raise TypeError(f"unknown node {type(e).__name__}")


def to_text(e: Expr) -> str:
    return _render(e)[0]
