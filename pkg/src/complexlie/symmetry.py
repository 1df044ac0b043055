"""Point symmetries of complex second-order ODEs and their real images.

A complex generator ``Z = xi d/dz + eta d/du`` realifies to two real fields
``X = realify(Z)`` and ``Y = realify(-i Z)`` over (x, y, f, g).  With this
convention ``[X1, X2] - [Y1, Y2] = 2 X[Z1, Z2]`` and
``[X1, Y2] + [Y1, X2] = 2 Y[Z1, Z2]``, so the complex bracket vanishes iff
both real combinations do.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .codes import CubicCode, GeneralSecondOrderCode
from .expr import (
    COMPLEX_ALPHABET,
    Expr,
    add,
    diff,
    div,
    mul,
    parse,
    realify,
    sub,
    subs,
    to_text,
    var,
)
from .expr.sampling import Sampler, equiv_zero
from .family import SolutionFamily

CASES = {(True, True): "Case3", (True, False): "Case4", (False, True): "Case5", (False, False): "Case6"}


class DegenerateField(ValueError):
    pass


class NotASymmetry(ValueError):
    pass


@dataclass(frozen=True)
class ComplexVectorField:
    xi: Expr
    eta: Expr

    def __post_init__(self):
        extra = (self.xi.free_symbols | self.eta.free_symbols) - {"z", "u"}
        if extra:
            raise ValueError(f"vector field components may not depend on {', '.join(sorted(extra))}")

    def apply(self, e: Expr) -> Expr:
        return add(mul(self.xi, diff(e, "z")), mul(self.eta, diff(e, "u")))

    def scaled(self, c) -> "ComplexVectorField":
        return ComplexVectorField(mul(c, self.xi), mul(c, self.eta))

    def __str__(self) -> str:
        return f"({to_text(self.xi)})*d/dz + ({to_text(self.eta)})*d/du"

    def to_dict(self) -> dict:
        return {"xi": to_text(self.xi), "eta": to_text(self.eta)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ComplexVectorField":
        return cls(parse(str(d["xi"]), COMPLEX_ALPHABET), parse(str(d["eta"]), COMPLEX_ALPHABET))


REAL_COORDS = ("x", "y", "f", "g")


@dataclass(frozen=True)
class RealVectorField:
    """Components along d/dx, d/dy, d/df, d/dg."""

    components: tuple[Expr, Expr, Expr, Expr]

    def apply(self, e: Expr) -> Expr:
        return add(*(mul(c, diff(e, s)) for c, s in zip(self.components, REAL_COORDS)))

    def bracket(self, other: "RealVectorField") -> "RealVectorField":
        return RealVectorField(
            tuple(sub(self.apply(b), other.apply(a)) for a, b in zip(self.components, other.components))  # type: ignore[arg-type]
        )

    def __sub__(self, other: "RealVectorField") -> "RealVectorField":
        return RealVectorField(tuple(sub(a, b) for a, b in zip(self.components, other.components)))  # type: ignore[arg-type]

    def __add__(self, other: "RealVectorField") -> "RealVectorField":
        return RealVectorField(tuple(add(a, b) for a, b in zip(self.components, other.components)))  # type: ignore[arg-type]

    def __str__(self) -> str:
        return " + ".join(f"({to_text(c)})*d/d{s}" for c, s in zip(self.components, REAL_COORDS))

    def to_dict(self) -> dict:
        return {s: to_text(c) for s, c in zip(REAL_COORDS, self.components)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "RealVectorField":
        from .expr import REAL_ALPHABET

        return cls(tuple(parse(str(d[s]), REAL_ALPHABET) for s in REAL_COORDS))  # type: ignore[arg-type]


def realify_field(Z: ComplexVectorField) -> tuple[RealVectorField, RealVectorField]:
    xr, xi_ = realify(Z.xi)
    er, ei = realify(Z.eta)
    yr, yi = realify(mul(-1j, Z.xi))
    fr, fi = realify(mul(-1j, Z.eta))
    return RealVectorField((xr, xi_, er, ei)), RealVectorField((yr, yi, fr, fi))


def real_components_equal(a: RealVectorField, b: RealVectorField, sampler: Sampler | None = None) -> bool:
    s = sampler or Sampler()
    return all(equiv_zero(sub(p, q), s) for p, q in zip(a.components, b.components))


# prolongation ------------------------------------------------------------------


def _total(e: Expr, w: Expr) -> Expr:
    up = var("up")
    return add(diff(e, "z"), mul(up, diff(e, "u")), mul(w, diff(e, "up")))


def prolong_residual(Z: ComplexVectorField, c: GeneralSecondOrderCode | CubicCode) -> Expr:
    """Second-prolongation determining expression; zero iff Z is a symmetry."""
    w = c.w
    up = var("up")
    eta1 = sub(_total(Z.eta, w), mul(up, _total(Z.xi, w)))
    eta2 = sub(_total(eta1, w), mul(w, _total(Z.xi, w)))
    return sub(eta2, add(mul(Z.xi, diff(w, "z")), mul(Z.eta, diff(w, "u")), mul(eta1, diff(w, "up"))))


def is_symmetry(Z: ComplexVectorField, c, sampler: Sampler | None = None, tol: float = 1e-9):
    return equiv_zero(prolong_residual(Z, c), sampler or Sampler(), tol)


# brackets and proportionality ------------------------------------------------------


def bracket(Z1: ComplexVectorField, Z2: ComplexVectorField) -> ComplexVectorField:
    return ComplexVectorField(sub(Z1.apply(Z2.xi), Z2.apply(Z1.xi)), sub(Z1.apply(Z2.eta), Z2.apply(Z1.eta)))


def is_zero_field(Z: ComplexVectorField, sampler: Sampler | None = None) -> bool:
    s = sampler or Sampler()
    return bool(equiv_zero(Z.xi, s)) and bool(equiv_zero(Z.eta, s))


@dataclass
class Proportionality:
    rho: Expr | None
    constant: bool = False

    @property
    def proportional(self) -> bool:
        """Nonconstant rho is required to count as proportional."""
        return self.rho is not None and not self.constant


def proportionality(Z1: ComplexVectorField, Z2: ComplexVectorField, sampler: Sampler | None = None) -> Proportionality:
    """Find rho with Z1 = rho Z2, if any."""
    s = sampler or Sampler()
    xi2_zero = bool(equiv_zero(Z2.xi, s))
    if xi2_zero and equiv_zero(Z2.eta, s):
        raise DegenerateField("second field vanishes identically on the sample region")
    if not equiv_zero(sub(mul(Z1.xi, Z2.eta), mul(Z1.eta, Z2.xi)), s):
        return Proportionality(None)
    rho = div(Z1.eta, Z2.eta) if xi2_zero else div(Z1.xi, Z2.xi)
    if not (equiv_zero(sub(Z1.xi, mul(rho, Z2.xi)), s) and equiv_zero(sub(Z1.eta, mul(rho, Z2.eta)), s)):
        return Proportionality(None)
    constant = bool(equiv_zero(diff(rho, "z"), s)) and bool(equiv_zero(diff(rho, "u"), s))
    return Proportionality(rho, constant)


@dataclass
class CaseClassification:
    proportional: bool
    rho: Expr | None
    rho_constant: bool
    commuting: bool
    bracket: ComplexVectorField
    case: str
    real_commuting: bool
    stated_case: str | None = None
    note: str = ""

    @property
    def discrepancy(self) -> bool:
        return self.stated_case is not None and self.stated_case != self.case

    def to_text(self) -> str:
        lines = [
            f"proportional: {self.proportional}"
            + (f" (rho = {to_text(self.rho)}{', constant' if self.rho_constant else ''})" if self.rho is not None else ""),
            f"bracket: {self.bracket}",
            f"commuting: {self.commuting} (real combinations vanish: {self.real_commuting})",
            f"case: {self.case}",
        ]
        if self.stated_case:
            lines.append(f"stated case: {self.stated_case}")
        if self.note:
            lines.append(f"[classification-discrepancy] {self.note}")
        return "\n".join(lines)

    def to_record(self) -> dict:
        return {
            "kind": "classification",
            "proportional": self.proportional,
            "rho": None if self.rho is None else to_text(self.rho),
            "rho_constant": self.rho_constant,
            "commuting": self.commuting,
            "real_commuting": self.real_commuting,
            "case": self.case,
            "stated_case": self.stated_case,
            "discrepancy": self.discrepancy,
        }


def classify_case(proportional: bool, commuting: bool) -> str:
    return CASES[(bool(proportional), bool(commuting))]


def real_bracket_combinations(Z1: ComplexVectorField, Z2: ComplexVectorField) -> tuple[RealVectorField, RealVectorField]:
    """([X1,X2] - [Y1,Y2], [X1,Y2] + [Y1,X2])."""
    X1, Y1 = realify_field(Z1)
    X2, Y2 = realify_field(Z2)
    return X1.bracket(X2) - Y1.bracket(Y2), X1.bracket(Y2) + Y1.bracket(X2)


def classify_theorem_case(
    Z1: ComplexVectorField,
    Z2: ComplexVectorField,
    sampler: Sampler | None = None,
    *,
    code=None,
    stated_case: str | None = None,
) -> CaseClassification:
    s = sampler or Sampler()
    if code is not None:
        for k, Z in enumerate((Z1, Z2), 1):
            if not is_symmetry(Z, code, s):
                raise NotASymmetry(f"field {k} is not a symmetry of the code")
    prop = proportionality(Z1, Z2, s)
    br = bracket(Z1, Z2)
    commuting = is_zero_field(br, s)
    c1, c2 = real_bracket_combinations(Z1, Z2)
    real_commuting = all(equiv_zero(e, s) for e in (*c1.components, *c2.components))
    case = classify_case(prop.proportional, commuting)
    note = ""
    if stated_case and stated_case != case:
        bits = ["proportional" if prop.proportional else "not proportional", "commuting" if commuting else "not commuting"]
        note = f"computed {case} ({', '.join(bits)}) but the stated case is {stated_case}"
    return CaseClassification(
        prop.proportional, prop.rho, prop.constant, commuting, br, case, real_commuting, stated_case, note
    )


# flow invariance -------------------------------------------------------------------


@dataclass
class FlowReport:
    epsilons: tuple[float, ...]
    residuals: tuple[float, ...]
    ratio: float | None
    status: str  # symmetry | exact | non-symmetry
    n_samples: int
    details: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "kind": "flow-invariance",
            "epsilons": list(self.epsilons),
            "residuals": list(self.residuals),
            "ratio": self.ratio,
            "status": self.status,
        }


def _flow_residual(Z: ComplexVectorField, fam: SolutionFamily, c, eps: float) -> Expr:
    u = fam.u
    up = diff(u, "z")
    Q = subs(sub(Z.eta, mul(var("up"), Z.xi)), {"u": u, "up": up})
    ue = add(u, mul(eps, Q))
    return sub(diff(ue, "z", 2), subs(c.w, {"u": ue, "up": diff(ue, "z")}))


def flow_invariance_check(
    Z: ComplexVectorField,
    fam: SolutionFamily,
    c,
    eps: float = 1e-3,
    sampler: Sampler | None = None,
    exact_tol: float = 1e-11,
) -> FlowReport:
    """Check that perturbing solutions along Z leaves an O(eps^2) residual.

    The residual is maximised over family samples at eps and eps/2; for a
    symmetry the ratio is close to 4, for a non-symmetry close to 2.
    Residuals at roundoff level for both step sizes are reported as exact.
    """
    s = fam.sampler(sampler)
    epsilons = (eps, eps / 2)
    exprs = [_flow_residual(Z, fam, c, e) for e in epsilons]
    worst = [0.0, 0.0]
    worst_scaled = [0.0, 0.0]
    n = 0
    for smp in s.sweep(exprs):
        n += 1
        for i in range(2):
            worst[i] = max(worst[i], abs(smp.values[i]))
            worst_scaled[i] = max(worst_scaled[i], abs(smp.values[i]) / (1.0 + smp.scales[i]))
    if max(worst_scaled) <= exact_tol:
        return FlowReport(epsilons, tuple(worst), None, "exact", n)
    ratio = worst[0] / worst[1] if worst[1] > 0 else float("inf")
    status = "symmetry" if 3.2 <= ratio <= 4.8 else "non-symmetry"
    return FlowReport(epsilons, tuple(worst), ratio, status, n)


def fields_from(defs: Sequence[Mapping]) -> list[ComplexVectorField]:
    return [ComplexVectorField.from_dict(d) for d in defs]

