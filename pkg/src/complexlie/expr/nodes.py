"""Immutable expression trees with shallow canonicalisation.

Nodes are never built directly; the module-level constructors (:func:`add`,
:func:`mul`, :func:`div`, :func:`power`, :func:`apply`, ...) fold constants,
flatten nested sums/products, merge like terms and like factors one level
deep, cancel structurally equal factors in quotients and sort children by a
deterministic total order.  Structural equality is digest equality.
"""

from __future__ import annotations

import cmath
import hashlib
from typing import Iterable, Union

from .errors import NonFinite, UnknownFunction

BUILTINS = ("sin", "cos", "tan", "sinh", "cosh", "exp", "log", "sqrt", "atan")

COMPLEX_ALPHABET = frozenset({"z", "u", "up"})
TARGET_ALPHABET = frozenset({"Z", "U", "Up"})
REAL_ALPHABET = frozenset({"x", "y", "f", "g", "h", "l", "X", "Y", "F", "G", "H", "L"})

_CMATH = {name: getattr(cmath, name) for name in BUILTINS}

Number = Union[int, float, complex]


def _blake(*parts: bytes) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for p in parts:
        h.update(p)
    return h.digest()


class Expr:
    """Base node.  Subclasses: Const, Var, Sum, Prod, Pow, Quot, Apply."""

    __slots__ = ("digest", "free_symbols", "_hash", "_key")
    _group = 9
    _rank = 0

    def _finish(self, payload: bytes, free: frozenset) -> None:
        self.digest = _blake(type(self).__name__.encode(), payload)
        self.free_symbols = free
        self._hash = int.from_bytes(self.digest[:8], "little")
        self._key = (self._group, self._hint(), self._rank, self.digest)

    def _hint(self) -> str:
        return ""

    @property
    def sort_key(self):
        return self._key

    @property
    def children(self) -> tuple["Expr", ...]:
        return ()

    def __eq__(self, other):
        return isinstance(other, Expr) and self.digest == other.digest

    def __hash__(self):
        return self._hash

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    def __repr__(self):
        return f"{type(self).__name__}<{self}>"

    # arithmetic sugar; numbers are coerced to constants
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, other):
        return power(self, other)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self


class Const(Expr):
    __slots__ = ("value",)
    _group = 0

    def __init__(self, value: complex):
        self.value = value
        self._finish(repr((value.real, value.imag)).encode(), frozenset())

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0


class Var(Expr):
    __slots__ = ("name",)
    _group = 1

    def __init__(self, name: str):
        self.name = name
        self._finish(name.encode(), frozenset((name,)))

    def _hint(self):
        return self.name


class Sum(Expr):
    __slots__ = ("terms",)
    _group = 5

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        self._finish(b"".join(t.digest for t in terms), frozenset().union(*(t.free_symbols for t in terms)))

    @property
    def children(self):
        return self.terms


class Prod(Expr):
    __slots__ = ("factors",)
    _group = 3

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        self._finish(b"".join(t.digest for t in factors), frozenset().union(*(t.free_symbols for t in factors)))

    def _hint(self):
        for f in self.factors:
            if not isinstance(f, Const):
                return f._hint()
        return ""

    @property
    def children(self):
        return self.factors


class Pow(Expr):
    """Integer power; non-integer exponents never survive canonicalisation."""

    __slots__ = ("base", "exponent")
    _group = 1
    _rank = 1

    def __init__(self, base: Expr, exponent: "Const"):
        self.base = base
        self.exponent = exponent
        self._finish(base.digest + exponent.digest, base.free_symbols)

    @property
    def n(self) -> int:
        return int(self.exponent.value.real)

    def _hint(self):
        return self.base._hint()

    @property
    def children(self):
        return (self.base, self.exponent)


class Quot(Expr):
    __slots__ = ("num", "den")
    _group = 4

    def __init__(self, num: Expr, den: Expr):
        self.num = num
        self.den = den
        self._finish(num.digest + b"/" + den.digest, num.free_symbols | den.free_symbols)

    def _hint(self):
        return self.num._hint()

    @property
    def children(self):
        return (self.num, self.den)


class Apply(Expr):
    __slots__ = ("fn", "arg")
    _group = 2

    def __init__(self, fn: str, arg: Expr):
        self.fn = fn
        self.arg = arg
        self._finish(fn.encode() + b"(" + arg.digest, arg.free_symbols)

    def _hint(self):
        return self.fn

    @property
    def children(self):
        return (self.arg,)


# --------------------------------------------------------------------------
# canonical constructors


def _finite(v: complex) -> bool:
    return cmath.isfinite(v)


def const(value: Number) -> Const:
    v = complex(value)
    if not _finite(v):
        raise NonFinite(f"non-finite constant {v!r}")
    return Const(complex(v.real + 0.0, v.imag + 0.0))


ZERO = const(0)
ONE = const(1)
I = const(1j)


def var(name: str) -> Var:
    return Var(name)


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, float, complex)):
        return const(obj)
    raise TypeError(f"cannot convert {type(obj).__name__} to Expr")


def _is_const(e: Expr, value: complex | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _split_coeff(t: Expr) -> tuple[complex, Expr]:
    """Split a non-constant term into (numeric coefficient, core)."""
    if isinstance(t, Prod) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Prod(rest)
    if isinstance(t, Quot):
        c, core = (1.0, t.num) if not isinstance(t.num, (Const, Prod)) else _num_coeff(t.num)
        if c != 1:
            return c, Quot(core, t.den)
    return 1.0, t


def _num_coeff(num: Expr) -> tuple[complex, Expr]:
    if isinstance(num, Const):
        return num.value, ONE
    if isinstance(num, Prod) and isinstance(num.factors[0], Const):
        rest = num.factors[1:]
        return num.factors[0].value, rest[0] if len(rest) == 1 else Prod(rest)
    return 1.0, num


def add(*terms) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    c = 0j
    coeffs: dict[Expr, complex] = {}
    for t in flat:
        if isinstance(t, Const):
            c += t.value
            continue
        k, core = _split_coeff(t)
        coeffs[core] = coeffs.get(core, 0) + k
    out: list[Expr] = []
    for core, k in coeffs.items():
        if k == 0:
            continue
        out.append(core if k == 1 else mul(const(k), core))
    out.sort(key=lambda e: e._key)
    if c != 0:
        out.insert(0, const(c))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def _base_exp(f: Expr) -> tuple[Expr, int]:
    if isinstance(f, Pow):
        return f.base, f.n
    return f, 1


def _factor_map(e: Expr) -> tuple[complex, dict[Expr, int]]:
    """Numeric coefficient and base -> exponent map of a quotient-free term."""
    factors = e.factors if isinstance(e, Prod) else (e,)
    c = 1 + 0j
    powers: dict[Expr, int] = {}
    for f in factors:
        if isinstance(f, Const):
            c *= f.value
            continue
        b, n = _base_exp(f)
        powers[b] = powers.get(b, 0) + n
    return c, powers


def _from_factor_map(c: complex, powers: dict[Expr, int]) -> Expr:
    out: list[Expr] = []
    for b, n in powers.items():
        if n == 0:
            continue
        p = _ipow(b, n)
        if isinstance(p, Prod):
            out.extend(p.factors)
        else:
            out.append(p)
    if c == 0:
        return ZERO
    out.sort(key=lambda e: e._key)
    if c != 1:
        out.insert(0, const(c))
    if not out:
        return ONE
    if len(out) == 1:
        return out[0]
    return Prod(tuple(out))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    c = 1 + 0j
    nums: list[Expr] = []
    dens: list[Expr] = []
    powers: dict[Expr, int] = {}
    for f in flat:
        if isinstance(f, Const):
            c *= f.value
        elif isinstance(f, Quot):
            nums.append(f.num)
            dens.append(f.den)
        else:
            b, n = _base_exp(f)
            powers[b] = powers.get(b, 0) + n
    if c == 0:
        return ZERO
    if not _finite(c):
        raise NonFinite("constant product overflowed")
    if dens:
        return div(mul(_from_factor_map(c, powers), *nums), mul(*dens))
    return _from_factor_map(c, powers)


def neg(e) -> Expr:
    return mul(-1, e)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(num, den) -> Expr:
    num, den = as_expr(num), as_expr(den)
    if isinstance(den, Const):
        if den.value == 0:
            return Quot(num, den)
        return mul(const(1 / den.value), num)
    if _is_const(num, 0):
        return ZERO
    if isinstance(num, Quot):
        return div(num.num, mul(num.den, den))
    if isinstance(den, Quot):
        return div(mul(num, den.den), den.num)
    cn, pn = _factor_map(num)
    cd, pd = _factor_map(den)
    for b in list(pn):
        if b in pd:
            k = min(pn[b], pd[b])
            pn[b] -= k
            pd[b] -= k
    top = _from_factor_map(cn / cd, pn)
    bottom = _from_factor_map(1, pd)
    if _is_const(bottom, 1):
        return top
    return Quot(top, bottom)


def _ipow(b: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return b
    if isinstance(b, Const):
        if b.value == 0 and n < 0:
            return Quot(ONE, ZERO)
        try:
            return const(b.value**n)
        except OverflowError as exc:
            raise NonFinite("constant power overflowed") from exc
    if n < 0:
        return div(ONE, _ipow(b, -n))
    if isinstance(b, Pow):
        return _ipow(b.base, b.n * n)
    if isinstance(b, Prod):
        return mul(*(_ipow(f, n) for f in b.factors))
    if isinstance(b, Quot):
        return div(_ipow(b.num, n), _ipow(b.den, n))
    return Pow(b, const(n))


def _integer_value(e: Expr) -> int | None:
    if isinstance(e, Const) and e.value.imag == 0 and float(e.value.real).is_integer():
        return int(e.value.real)
    return None


def power(base, exponent) -> Expr:
    """``base ** exponent``; non-integer exponents become exp(exponent*log(base))."""
    base, exponent = as_expr(base), as_expr(exponent)
    n = _integer_value(exponent)
    if n is not None:
        return _ipow(base, n)
    return apply("exp", mul(exponent, apply("log", base)))


def apply(fn: str, arg) -> Expr:
    if fn not in _CMATH:
        raise UnknownFunction(fn)
    arg = as_expr(arg)
    if isinstance(arg, Const):
        try:
            v = _CMATH[fn](arg.value)
        except (ValueError, ZeroDivisionError, OverflowError):
            v = None
        if v is not None and _finite(v):
            return const(v)
    return Apply(fn, arg)


def sin(a):
    return apply("sin", a)


def cos(a):
    return apply("cos", a)


def tan(a):
    return apply("tan", a)


def sinh(a):
    return apply("sinh", a)


def cosh(a):
    return apply("cosh", a)


def exp(a):
    return apply("exp", a)


def log(a):
    return apply("log", a)


def sqrt(a):
    return apply("sqrt", a)


def atan(a):
    return apply("atan", a)


def symbols(names: str | Iterable[str]) -> tuple[Var, ...]:
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(Var(n) for n in names)


def walk(e: Expr):
    """Yield every distinct node of ``e`` once, children before parents."""
    seen: set[bytes] = set()
    stack: list[tuple[Expr, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if node.digest in seen:
            continue
        if expanded or not node.children:
            seen.add(node.digest)
            yield node
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            if c.digest not in seen:
                stack.append((c, False))


def node_count(e: Expr) -> int:
    return sum(1 for _ in walk(e))
