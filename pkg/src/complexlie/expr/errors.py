"""Exception hierarchy for the expression engine."""

from __future__ import annotations


class ExprError(Exception):
    """Base class for every error raised by :mod:`complexlie.expr`."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {', '.join(expected)})"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class UnknownSymbol(ExprError):
    def __init__(self, name: str, position: int | None = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown symbol {name!r}{where}")
        self.name = name
        self.position = position


class UnknownFunction(ExprError):
    def __init__(self, name: str, position: int | None = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown function {name!r}{where}")
        self.name = name
        self.position = position


class EvaluationError(ExprError):
    """Numerical evaluation failed."""


class PoleOrSingularity(EvaluationError):
    """Division by zero, logarithm of zero, or a pole of a builtin."""


class NearSingularity(PoleOrSingularity):
    """A guarded evaluation came within the exclusion margin of a pole or cut."""


class NonFinite(EvaluationError):
    pass


class UnboundVariable(EvaluationError):
    def __init__(self, names):
        names = sorted(names)
        super().__init__(f"unbound variable(s): {', '.join(names)}")
        self.names = tuple(names)


class DuplicateBinding(ExprError):
    pass


class NonAnalyticNode(ExprError):
    pass


class SamplerExhausted(ExprError):
    pass
