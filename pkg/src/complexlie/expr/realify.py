"""Split complex expressions into real and imaginary parts.

Complex symbols are replaced by pairs of real symbols (``z -> x + i y``,
``u -> f + i g``, ``up -> h + i l`` and their capitalised target-side
counterparts), then each node is separated structurally.  Only the allowed
builtins appear on the real side; principal branches are written with the
half-angle arctangent form ``arg w = 2 atan(b / (|w| + a))``.
"""

from __future__ import annotations

from math import comb
from typing import Mapping

from .errors import ExprError, NonAnalyticNode
from .nodes import (
    REAL_ALPHABET,
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
    as_expr,
    atan,
    const,
    cos,
    cosh,
    div,
    exp,
    log,
    mul,
    neg,
    power,
    sin,
    sinh,
    sqrt,
    sub,
    var,
    walk,
)

Pair = tuple[Expr, Expr]

DEFAULT_SPLIT: dict[str, tuple[str, str]] = {
    "z": ("x", "y"),
    "u": ("f", "g"),
    "up": ("h", "l"),
    "Z": ("X", "Y"),
    "U": ("F", "G"),
    "Up": ("H", "L"),
}


# pair arithmetic -----------------------------------------------------------


def padd(*ps: Pair) -> Pair:
    return add(*(p[0] for p in ps)), add(*(p[1] for p in ps))


def psub(p: Pair, q: Pair) -> Pair:
    return sub(p[0], q[0]), sub(p[1], q[1])


def pscale(c, p: Pair) -> Pair:
    c = complex(c)
    if c.imag == 0:
        return mul(c.real, p[0]), mul(c.real, p[1])
    return pmul((const(c.real), const(c.imag)), p)


def pmul(p: Pair, q: Pair) -> Pair:
    a, b = p
    c, d = q
    return sub(mul(a, c), mul(b, d)), add(mul(a, d), mul(b, c))


def pdiv(p: Pair, q: Pair) -> Pair:
    a, b = p
    c, d = q
    if d == ZERO:
        return div(a, c), div(b, c)
    den = add(power(c, 2), power(d, 2))
    return div(add(mul(a, c), mul(b, d)), den), div(sub(mul(b, c), mul(a, d)), den)


def ppow(p: Pair, n: int) -> Pair:
    if n < 0:
        return pdiv((const(1), ZERO), ppow(p, -n))
    a, b = p
    if b == ZERO:
        return power(a, n), ZERO
    re_terms, im_terms = [], []
    for k in range(n + 1):
        term = mul(comb(n, k), power(a, n - k), power(b, k))
        sign = -1 if (k // 2) % 2 else 1
        (re_terms if k % 2 == 0 else im_terms).append(mul(sign, term))
    return add(*re_terms), add(*im_terms)


def _modulus(a: Expr, b: Expr) -> Expr:
    return sqrt(add(power(a, 2), power(b, 2)))


def _half_arg(a: Expr, b: Expr) -> Expr:
    """atan(b / (|w| + a)), i.e. half the principal argument of a + ib."""
    if b == ZERO:
        return ZERO
    return atan(div(b, add(_modulus(a, b), a)))


def papply(fn: str, p: Pair) -> Pair:
    a, b = p
    if fn == "sin":
        return mul(sin(a), cosh(b)), mul(cos(a), sinh(b))
    if fn == "cos":
        return mul(cos(a), cosh(b)), neg(mul(sin(a), sinh(b)))
    if fn == "tan":
        den = add(power(cos(a), 2), power(sinh(b), 2))
        return div(mul(0.5, sin(mul(2, a))), den), div(mul(0.5, sinh(mul(2, b))), den)
    if fn == "sinh":
        return mul(sinh(a), cos(b)), mul(cosh(a), sin(b))
    if fn == "cosh":
        return mul(cosh(a), cos(b)), mul(sinh(a), sin(b))
    if fn == "exp":
        return mul(exp(a), cos(b)), mul(exp(a), sin(b))
    if fn == "log":
        return mul(0.5, log(add(power(a, 2), power(b, 2)))), mul(2, _half_arg(a, b))
    if fn == "sqrt":
        if b == ZERO:
            return sqrt(a), ZERO
        r = sqrt(_modulus(a, b))
        t = _half_arg(a, b)
        return mul(r, cos(t)), mul(r, sin(t))
    if fn == "atan":
        # atan w = (i/2) (log(1 - i w) - log(1 + i w))
        l1 = papply("log", (add(1, b), neg(a)))
        l2 = papply("log", (sub(1, b), a))
        d1, d2 = psub(l1, l2)
        return mul(-0.5, d2), mul(0.5, d1)
    raise NonAnalyticNode(fn)


# realify ---------------------------------------------------------------------


def _symbol_pair(name: str, split: Mapping[str, Pair]) -> Pair:
    if name in split:
        return split[name]
    if name in REAL_ALPHABET:
        return var(name), ZERO
    raise ExprError(f"no real/imaginary split known for symbol {name!r}")


def realify(e: Expr, split: Mapping[str, object] | None = None) -> Pair:
    """Return ``(re, im)`` over real symbols with ``e == re + i*im``.

    ``split`` maps complex symbol names to pairs of real symbol names or
    expressions; it extends :data:`DEFAULT_SPLIT`.
    """
    table: dict[str, Pair] = {k: (var(a), var(b)) for k, (a, b) in DEFAULT_SPLIT.items()}
    for k, v in (split or {}).items():
        re, im = v
        table[k] = (var(re) if isinstance(re, str) else as_expr(re), var(im) if isinstance(im, str) else as_expr(im))
    memo: dict[Expr, Pair] = {}
    for node in walk(e):
        if isinstance(node, Const):
            memo[node] = const(node.value.real), const(node.value.imag)
        elif isinstance(node, Var):
            memo[node] = _symbol_pair(node.name, table)
        elif isinstance(node, Sum):
            memo[node] = padd(*(memo[t] for t in node.terms))
        elif isinstance(node, Prod):
            acc = memo[node.factors[0]]
            for f in node.factors[1:]:
                acc = pmul(acc, memo[f])
            memo[node] = acc
        elif isinstance(node, Pow):
            memo[node] = ppow(memo[node.base], node.n)
        elif isinstance(node, Quot):
            memo[node] = pdiv(memo[node.num], memo[node.den])
        elif isinstance(node, Apply):
            memo[node] = papply(node.fn, memo[node.arg])
        else:  # pragma: no cover
            raise NonAnalyticNode(type(node).__name__)
    return memo[e]

