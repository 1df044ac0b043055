"""Seeded samplers and the probabilistic zero test.

A sampler draws complex values for the symbols of the expressions it is
asked to evaluate.  Real symbols that are the real or imaginary part of a
complex symbol (``x``, ``y`` of ``z``; ``f``, ``g`` of ``u``; ...) are
bound from the same complex draw, so complex and realified expressions are
always compared at the same points.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import EvaluationError, SamplerExhausted
from .evaluate import compile_expr
from .nodes import Expr
from .realify import DEFAULT_SPLIT

# real symbol -> (complex parent, 0 for real part / 1 for imaginary part)
_PARENT: dict[str, tuple[str, int]] = {}
for _c, (_re, _im) in DEFAULT_SPLIT.items():
    _PARENT[_re] = (_c, 0)
    _PARENT[_im] = (_c, 1)


@dataclass(frozen=True)
class Region:
    """Rectangle in the complex plane; ``im=(0, 0)`` samples the real line."""

    re: tuple[float, float] = (-2.0, 2.0)
    im: tuple[float, float] = (-2.0, 2.0)


@dataclass(frozen=True)
class Exclusion:
    """Reject samples where ``|expr| < min_abs``.

    With ``cut=True`` samples are also rejected when ``expr`` lies within a
    relative angle ``min_abs`` of the negative real axis (log/sqrt cuts).
    """

    expr: Expr
    min_abs: float = 1e-3
    cut: bool = False

    def rejects(self, value: complex) -> bool:
        a = abs(value)
        if a < self.min_abs:
            return True
        return self.cut and value.real < 0 and abs(value.imag) < self.min_abs * a


@dataclass(frozen=True)
class Sample:
    binding: dict[str, complex]
    values: tuple[complex, ...]
    scales: tuple[float, ...]


@dataclass(frozen=True)
class Sampler:
    seed: int = 42
    samples: int = 32
    regions: Mapping[str, Region] = field(default_factory=dict)
    default: Region = Region()
    exclusions: tuple[Exclusion, ...] = ()
    margin: float = 1e-3
    max_rejections: int = 1000

    def with_(self, **changes) -> "Sampler":
        if "exclusions" in changes:
            changes["exclusions"] = tuple(changes["exclusions"])
        return replace(self, **changes)

    def fork(self, offset: int) -> "Sampler":
        """Independent sampler for a concurrent sweep."""
        return replace(self, seed=self.seed + offset)

    def excluding(self, *extra: Exclusion) -> "Sampler":
        return replace(self, exclusions=(*self.exclusions, *extra))

    def region(self, name: str) -> Region:
        return self.regions.get(name, self.default)

    def _draw(self, rng: random.Random, base: Sequence[str]) -> dict[str, complex]:
        out: dict[str, complex] = {}
        for name in base:
            r = self.region(name)
            re = rng.uniform(*r.re)
            im = rng.uniform(*r.im) if r.im[0] != r.im[1] else r.im[0]
            out[name] = complex(re, im)
        for real, (parent, part) in _PARENT.items():
            if parent in out:
                v = out[parent]
                out[real] = complex(v.real if part == 0 else v.imag)
        return out

    def sweep(
        self, exprs: Sequence[Expr], symbols: Iterable[str] = (), stats: dict | None = None
    ) -> Iterator[Sample]:
        """Yield ``samples`` accepted points with every expression evaluated.

        A point is redrawn when an exclusion fires or any evaluation meets a
        pole, branch cut or non-finite value.  ``stats["rejected"]`` counts
        redraws when a dict is supplied.
        """
        free: set[str] = set(symbols)
        for e in exprs:
            free |= e.free_symbols
        for ex in self.exclusions:
            free |= ex.expr.free_symbols
        base = sorted({_PARENT[s][0] if s in _PARENT else s for s in free})
        names = sorted(free | {s for s in _PARENT if _PARENT[s][0] in base})
        fns = [compile_expr(e, names, margin=self.margin, scale=True) for e in exprs]
        guards = [(ex, compile_expr(ex.expr, names)) for ex in self.exclusions]
        rng = random.Random(self.seed)
        rejected = 0
        accepted = 0
        if stats is not None:
            stats["rejected"] = 0
        while accepted < self.samples:
            b = self._draw(rng, base)
            args = [b[n] for n in names]
            try:
                if any(ex.rejects(g(*args)) for ex, g in guards):
                    raise EvaluationError("excluded")
                out = [fn(*args) for fn in fns]
            except EvaluationError:
                rejected += 1
                if stats is not None:
                    stats["rejected"] = rejected
                if rejected > self.max_rejections:
                    raise SamplerExhausted(
                        f"more than {self.max_rejections} rejected samples (accepted {accepted})"
                    ) from None
                continue
            accepted += 1
            yield Sample({n: b[n] for n in names}, tuple(v for v, _ in out), tuple(s for _, s in out))

    def points(self, symbols: Iterable[str], exprs: Sequence[Expr] = ()) -> list[dict[str, complex]]:
        return [s.binding for s in self.sweep(list(exprs), symbols)]


@dataclass
class ZeroTest:
    holds: bool
    max_residual: float
    max_scaled: float
    n_samples: int
    residuals: list[float] = field(default_factory=list, repr=False)
    scaled: list[float] = field(default_factory=list, repr=False)

    def __bool__(self) -> bool:
        return self.holds


def equiv_zero(e: Expr, sampler: Sampler | None = None, tol: float = 1e-9) -> ZeroTest:
    """Probabilistic test that ``e`` vanishes identically.

    A sample passes when ``|e| <= tol * (1 + largest |subterm|)``.
    """
    sampler = sampler or Sampler()
    residuals: list[float] = []
    scaled_all: list[float] = []
    worst_scaled = 0.0
    ok = True
    for s in sampler.sweep([e]):
        r = abs(s.values[0])
        residuals.append(r)
        scaled = r / (1.0 + s.scales[0])
        scaled_all.append(scaled)
        worst_scaled = max(worst_scaled, scaled)
        if scaled > tol:
            ok = False
    return ZeroTest(ok, max(residuals, default=0.0), worst_scaled, len(residuals), residuals, scaled_all)


@dataclass
class DerivativeCheck:
    symbol: str
    max_error: float
    n_samples: int
    n_skipped: int = 0

    def holds(self, tol: float = 1e-4) -> bool:
        return self.n_samples > 0 and self.max_error <= tol


def derivative_agreement(
    e: Expr, sampler: Sampler | None = None, step: float = 1e-5, margin: float = 1e-2
) -> list[DerivativeCheck]:
    """Compare ``diff(e, s)`` with a central difference in each free symbol.

    The error at a sample is ``|d_sym - d_fd| / (1 + |d_sym|)``.  Samples are
    kept ``margin`` away from poles and cuts so truncation error stays small.
    """
    from .calculus import diff

    base = (sampler or Sampler()).with_(margin=margin)
    out = []
    for s in sorted(e.free_symbols):
        d = diff(e, s)
        names = None
        f = None
        worst = 0.0
        n = skipped = 0
        for smp in base.sweep([e, d], [s]):
            if names is None:
                names = sorted(smp.binding)
                f = compile_expr(e, names)
            args = [smp.binding[k] for k in names]
            i = names.index(s)
            hi, lo = list(args), list(args)
            hi[i] += step
            lo[i] -= step
            try:
                fd = (f(*hi) - f(*lo)) / (2 * step)
            except EvaluationError:
                skipped += 1
                continue
            sym = smp.values[1]
            worst = max(worst, abs(sym - fd) / (1.0 + abs(sym)))
            n += 1
        out.append(DerivativeCheck(s, worst, n, skipped))
    return out
