"""Exact parametric solution families used as ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .expr import COMPLEX_ALPHABET, TARGET_ALPHABET, Expr, parse, subs, to_text
from .expr.sampling import Exclusion, Region, Sampler


@dataclass(frozen=True)
class SolutionFamily:
    """u = u(z; params) on a rectangle of the z-plane.

    ``z_of_Z`` lists closed-form branches of the inverse of the induced map
    ``z -> Z(z, u(z))`` (expressions in ``Z`` and the parameters); it is
    what the finite-difference oracle needs to sample the target side on a
    regular grid.
    """

    u: Expr
    params: Mapping[str, Region] = field(default_factory=dict)
    domain: Region = Region()
    exclusions: tuple[Exclusion, ...] = ()
    z_of_Z: tuple[Expr, ...] = ()
    label: str = ""

    def sampler(self, base: Sampler | None = None) -> Sampler:
        base = base or Sampler()
        regions = {**base.regions, "z": self.domain, **self.params}
        return base.with_(regions=regions, exclusions=(*base.exclusions, *self.exclusions))

    def at(self, values: Mapping[str, complex]) -> Expr:
        """The member of the family with the given parameter values."""
        return subs(self.u, {k: complex(v) for k, v in values.items() if k in self.params})

    def to_dict(self) -> dict:
        return {
            "u": to_text(self.u),
            "label": self.label,
            "params": {k: {"re": list(r.re), "im": list(r.im)} for k, r in self.params.items()},
            "domain": {"re": list(self.domain.re), "im": list(self.domain.im)},
            "exclusions": [
                {"expr": to_text(e.expr), "min_abs": e.min_abs, "cut": e.cut} for e in self.exclusions
            ],
            "z_of_Z": [to_text(e) for e in self.z_of_Z],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SolutionFamily":
        params = {k: Region(tuple(v["re"]), tuple(v["im"])) for k, v in d.get("params", {}).items()}
        alpha = set(COMPLEX_ALPHABET) | set(params)
        dom = d.get("domain", {})
        return cls(
            u=parse(d["u"], alpha),
            params=params,
            domain=Region(tuple(dom.get("re", (-2.0, 2.0))), tuple(dom.get("im", (-2.0, 2.0)))),
            exclusions=tuple(
                Exclusion(parse(e["expr"], alpha), float(e.get("min_abs", 1e-3)), bool(e.get("cut", False)))
                for e in d.get("exclusions", ())
            ),
            z_of_Z=tuple(parse(s, alpha | set(TARGET_ALPHABET)) for s in d.get("z_of_Z", ())),
            label=d.get("label", ""),
        )
