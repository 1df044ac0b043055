"""Symbolic partial differentiation and substitution."""

from __future__ import annotations

from typing import Mapping

from .nodes import (
    ONE,
    ZERO,
    Apply,
    Const,
    Expr,
    Pow,
    Prod,
    Quot,
    Sum,
    Var,
    add,
    apply,
    as_expr,
    const,
    cos,
    cosh,
    div,
    mul,
    neg,
    power,
    sinh,
    sqrt,
    sub,
    walk,
)


def _d_apply(fn: str, a: Expr) -> Expr:
    if fn == "sin":
        return cos(a)
    if fn == "cos":
        return neg(apply("sin", a))
    if fn == "tan":
        return add(1, power(apply("tan", a), 2))
    if fn == "sinh":
        return cosh(a)
    if fn == "cosh":
        return sinh(a)
    if fn == "exp":
        return apply("exp", a)
    if fn == "log":
        return div(1, a)
    if fn == "sqrt":
        return div(1, mul(2, sqrt(a)))
    if fn == "atan":
        return div(1, add(1, power(a, 2)))
    raise ValueError(fn)


def diff(e: Expr, s: str, n: int = 1) -> Expr:
    """Exact partial derivative of ``e`` with respect to symbol ``s`` (``n`` times)."""
    for _ in range(n):
        e = _diff_once(e, s)
    return e


def _diff_once(e: Expr, s: str) -> Expr:
    memo: dict[Expr, Expr] = {}
    for node in walk(e):
        if s not in node.free_symbols:
            memo[node] = ZERO
            continue
        if isinstance(node, Var):
            memo[node] = ONE
        elif isinstance(node, Sum):
            memo[node] = add(*(memo[t] for t in node.terms))
        elif isinstance(node, Prod):
            fs = node.factors
            terms = []
            for i, f in enumerate(fs):
                df = memo[f]
                if df == ZERO:
                    continue
                terms.append(mul(df, *fs[:i], *fs[i + 1 :]))
            memo[node] = add(*terms)
        elif isinstance(node, Pow):
            k = node.n
            memo[node] = mul(k, power(node.base, k - 1), memo[node.base])
        elif isinstance(node, Quot):
            n, d = node.num, node.den
            dn, dd = memo[n], memo[d]
            memo[node] = div(sub(mul(dn, d), mul(n, dd)), power(d, 2))
        elif isinstance(node, Apply):
            memo[node] = mul(_d_apply(node.fn, node.arg), memo[node.arg])
        else:
            memo[node] = ZERO
    return memo[e]


def rebuild(node: Expr, kids: list[Expr]) -> Expr:
    """Reconstruct ``node`` canonically from replacement children."""
    if isinstance(node, Sum):
        return add(*kids)
    if isinstance(node, Prod):
        return mul(*kids)
    if isinstance(node, Pow):
        return power(kids[0], kids[1])
    if isinstance(node, Quot):
        return div(kids[0], kids[1])
    if isinstance(node, Apply):
        return apply(node.fn, kids[0])
    return node


def subs(e: Expr, mapping: Mapping[str, object]) -> Expr:
    """Replace free symbols by expressions (or numbers) simultaneously."""
    repl = {k: as_expr(v) for k, v in mapping.items()}
    if not (e.free_symbols & repl.keys()):
        return e
    memo: dict[Expr, Expr] = {}
    for node in walk(e):
        if not (node.free_symbols & repl.keys()):
            memo[node] = node
        elif isinstance(node, Var):
            memo[node] = repl[node.name]
        else:
            memo[node] = rebuild(node, [memo[c] for c in node.children])
    return memo[e]


def is_constant(e: Expr) -> bool:
    return isinstance(e, Const)


__all__ = ["diff", "subs", "rebuild", "is_constant", "const"]
