"""Verma module context: the highest weight ``h`` and the Shapovalov weights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .kernel import H, N, ONE, RationalFunction, to_fraction

__all__ = [
    "VermaContext",
    "InadmissibleWeight",
    "NonUnitarizable",
    "SYMBOLIC",
    "weight_ratio",
    "weight_ratio_value",
    "weight_value",
    "is_admissible_weight",
]


class InadmissibleWeight(ValueError):
    pass


class NonUnitarizable(ValueError):
    pass


def is_admissible_weight(h) -> bool:
    """``2h`` must not be a nonpositive integer."""
    t = 2 * to_fraction(h)
    return not (t.denominator == 1 and t <= 0)


@dataclass(frozen=True)
class VermaContext:
    """A weight that is either symbolic (``weight is None``) or a rational number.

    A symbolic weight is treated as generic, admissible and positive.
    """

    weight: Fraction | None = None

    def __post_init__(self):
        if self.weight is not None:
            object.__setattr__(self, "weight", to_fraction(self.weight))

    @classmethod
    def numeric(cls, h) -> "VermaContext":
        return cls(to_fraction(h))

    @property
    def is_symbolic(self) -> bool:
        return self.weight is None

    @property
    def admissible(self) -> bool:
        return self.weight is None or is_admissible_weight(self.weight)

    @property
    def unitarizable(self) -> bool:
        return self.weight is None or self.weight > 0

    @property
    def h(self) -> RationalFunction:
        return H if self.weight is None else RationalFunction.const(self.weight)

    @property
    def label(self) -> str:
        if self.weight is None:
            return "symbolic"
        w = self.weight
        return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"

    def specialize(self, f: RationalFunction) -> RationalFunction:
        return f if self.weight is None else f.subs_h(self.weight)

    def require_admissible(self):
        if not self.admissible:
            raise InadmissibleWeight(f"2h is a nonpositive integer for h={self.label}")

    def require_unitarizable(self):
        self.require_admissible()
        if not self.unitarizable:
            raise NonUnitarizable(f"h={self.label} is not positive; no Shapovalov inner product")


SYMBOLIC = VermaContext()


@lru_cache(maxsize=None)
def weight_ratio(s: int, ctx: VermaContext = SYMBOLIC) -> RationalFunction:
    """``w(n+s)/w(n)`` for ``w(n) = n! (2h)(2h+1)...(2h+n-1)``."""
    ctx.require_admissible()
    if s == 0:
        return ONE
    if s < 0:
        return ONE / weight_ratio(-s, ctx).shift(s)
    h = ctx.h
    out = ONE
    for j in range(1, s + 1):
        out = out * (N + j) * (N + 2 * h + j - 1)
    return out


def weight_value(n: int, h) -> Fraction:
    """``w(n)`` at a numeric weight."""
    h = to_fraction(h)
    out = Fraction(1)
    for j in range(n):
        out *= (j + 1) * (2 * h + j)
    return out


def weight_ratio_value(s: int, n: int, h) -> Fraction:
    """``w(n+s)/w(n)`` at a numeric weight, for ``n, n+s >= 0``."""
    h = to_fraction(h)
    lo, hi = (n, n + s) if s >= 0 else (n + s, n)
    out = Fraction(1)
    for m in range(lo, hi):
        out *= (m + 1) * (2 * h + m)
    return out if s >= 0 else 1 / out
