"""Expression trees over complex and real alphabets."""

from .calculus import diff, subs
from .errors import (
    DuplicateBinding,
    EvaluationError,
    ExprError,
    ExprSyntaxError,
    NearSingularity,
    NonAnalyticNode,
    NonFinite,
    PoleOrSingularity,
    SamplerExhausted,
    UnboundVariable,
    UnknownFunction,
    UnknownSymbol,
)
from .evaluate import binding, compile_expr, evaluate
from .nodes import (
    BUILTINS,
    COMPLEX_ALPHABET,
    I,
    ONE,
    REAL_ALPHABET,
    TARGET_ALPHABET,
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
    atan,
    const,
    cos,
    cosh,
    div,
    exp,
    log,
    mul,
    neg,
    node_count,
    power,
    sin,
    sinh,
    sqrt,
    sub,
    symbols,
    tan,
    var,
    walk,
)
from .parser import parse
from .printer import to_text
from .realify import DEFAULT_SPLIT, realify
from .sampling import DerivativeCheck, Exclusion, Region, Sample, Sampler, ZeroTest, derivative_agreement, equiv_zero

__all__ = [name for name in dir() if not name.startswith("_")]
