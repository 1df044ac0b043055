"""Numerical evaluation by compiling a tree into straight-line Python.

Shared subtrees are emitted once, so differentiated trees that are large as
trees but small as DAGs stay cheap.  With ``margin > 0`` the compiled code
raises :class:`NearSingularity` whenever a denominator, a logarithm/square
root argument, an arctangent argument or a tangent pole comes within
``margin`` of trouble.  That is how samplers keep away from poles and
branch cuts.
"""

from __future__ import annotations

import cmath
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .errors import DuplicateBinding, NearSingularity, NonFinite, PoleOrSingularity, UnboundVariable
from .nodes import Apply, Const, Expr, Pow, Prod, Quot, Sum, Var, walk


class _Near(Exception):
    pass


def _guards(margin: float) -> dict[str, Callable]:
    m = margin

    def g_div(d):
        if abs(d) < m:
            raise _Near("denominator")
        return d

    def g_cut(w):
        a = abs(w)
        if a < m or (w.real < 0 and abs(w.imag) < m * a):
            raise _Near("branch cut")
        return w

    def g_atan(w):
        if abs(w - 1j) < m or abs(w + 1j) < m or (abs(w.real) < m and abs(w.imag) > 1 - m):
            raise _Near("atan cut")
        return w

    def g_tan(w):
        if abs(cmath.cos(w)) < m:
            raise _Near("tan pole")
        return w

    return {"_gd": g_div, "_gc": g_cut, "_ga": g_atan, "_gt": g_tan}


def _source(e: Expr, symbols: Sequence[str], margin: float, scale: bool):
    env: dict[str, object] = {"cmath": cmath}
    if margin > 0:
        env.update(_guards(margin))
    args = {s: f"a{i}" for i, s in enumerate(symbols)}
    names: dict[bytes, str] = {}
    lines: list[str] = []
    temps: list[str] = []
    nconst = 0
    for node in walk(e):
        if isinstance(node, Var):
            if node.name not in args:
                raise UnboundVariable([node.name])
            names[node.digest] = args[node.name]
            continue
        if isinstance(node, Const):
            key = f"k{nconst}"
            nconst += 1
            env[key] = node.value if node.value.imag else node.value.real
            names[node.digest] = key
            continue
        ref = lambda c: names[c.digest]  # noqa: E731
        if isinstance(node, Sum):
            rhs = " + ".join(ref(t) for t in node.terms)
        elif isinstance(node, Prod):
            rhs = " * ".join(ref(t) for t in node.factors)
        elif isinstance(node, Pow):
            rhs = f"{ref(node.base)} ** {node.n}"
        elif isinstance(node, Quot):
            den = ref(node.den)
            rhs = f"{ref(node.num)} / " + (f"_gd({den})" if margin > 0 else den)
        elif isinstance(node, Apply):
            a = ref(node.arg)
            if margin > 0:
                if node.fn in ("log", "sqrt"):
                    a = f"_gc({a})"
                elif node.fn == "atan":
                    a = f"_ga({a})"
                elif node.fn == "tan":
                    a = f"_gt({a})"
            rhs = f"cmath.{node.fn}({a})"
        else:  # pragma: no cover
            raise TypeError(type(node).__name__)
        name = f"v{len(temps)}"
        temps.append(name)
        names[node.digest] = name
        lines.append(f"    {name} = {rhs}")
    result = names[e.digest]
    header = f"def _f({', '.join(args[s] for s in symbols)}):"
    if scale:
        mags = [*(args[s] for s in symbols), *temps] or ["0.0"]
        lines.append(f"    return {result}, max(abs(_t) for _t in ({', '.join(mags)},))")
    else:
        lines.append(f"    return {result}")
    return "\n".join([header, *lines]), env


@lru_cache(maxsize=4096)
def _compiled(e: Expr, symbols: tuple[str, ...], margin: float, scale: bool):
    src, env = _source(e, symbols, margin, scale)
    exec(compile(src, "<complexlie-expr>", "exec"), env)
    raw = env["_f"]

    def fn(*values):
        try:
            out = raw(*values)
        except _Near as exc:
            raise NearSingularity(str(exc)) from None
        except ZeroDivisionError as exc:
            raise PoleOrSingularity(str(exc)) from None
        except ValueError as exc:
            raise PoleOrSingularity(str(exc)) from None
        except OverflowError as exc:
            raise NonFinite(str(exc)) from None
        v = out[0] if scale else out
        v = complex(v)
        if not cmath.isfinite(v):
            raise NonFinite("evaluation produced a non-finite value")
        return (v, float(out[1])) if scale else v

    return fn


def compile_expr(e: Expr, symbols: Sequence[str], *, margin: float = 0.0, scale: bool = False):
    """Return ``fn(*values)`` evaluating ``e`` with symbols bound positionally.

    With ``scale=True`` the function returns ``(value, largest |subterm|)``.
    """
    return _compiled(e, tuple(symbols), float(margin), bool(scale))


def binding(*pairs, **kwargs) -> dict[str, complex]:
    """Build a binding, refusing to bind a symbol twice."""
    out: dict[str, complex] = {}
    for name, value in [*pairs, *kwargs.items()]:
        if name in out:
            raise DuplicateBinding(f"symbol {name!r} bound twice")
        out[name] = complex(value)
    return out


def evaluate(e: Expr, b: Mapping[str, complex], *, margin: float = 0.0) -> complex:
    """Evaluate with principal branches; errors on poles, overflow, unbound symbols."""
    missing = e.free_symbols - b.keys()
    if missing:
        raise UnboundVariable(missing)
    syms = sorted(e.free_symbols)
    return compile_expr(e, syms, margin=margin)(*(complex(b[s]) for s in syms))
