"""Weighted shift operators on the monomial basis ``{z^n : n >= 0}``.

A term with offset ``s`` sends ``z^n`` to ``c(n) z^(n+s)``.  The coefficient is
held as a stable rational function plus a finite boundary table for small
``n``.  Products follow sequential application: a factor that annihilates
``z^n`` makes the product vanish there, whatever the stable forms say
(``0/0`` at low degree is resolved this way).  Boundary keys are always below
the term threshold; from the threshold on the stable form is pole-free and
authoritative.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .context import (
    SYMBOLIC,
    VermaContext,
    is_admissible_weight,
    weight_ratio,
    weight_ratio_value,
)
from .kernel import (
    RING,
    ZERO,
    PoleError,
    RationalFunction,
    rational_roots,
    rf_eval,
    to_fraction,
)

__all__ = [
    "InadmissibleOperator",
    "ContextMismatch",
    "ShiftTerm",
    "ShiftOperator",
    "DenseTruncation",
    "op_make",
    "op_value",
    "op_add",
    "op_scale",
    "op_compose",
    "op_commutator",
    "op_adjoint",
    "op_truncate",
    "op_apply_vector",
    "singular_points",
]

_n, _h = RING.gens


class InadmissibleOperator(ValueError):
    pass


class ContextMismatch(ValueError):
    pass


# --- singularity analysis ----------------------------------------------------


@lru_cache(maxsize=4096)
def _n_part(den_key):
    """Denominator with its ``h``-only content removed.

    Factors free of ``n`` vanish at isolated weights for every degree; those
    weights are excluded generically rather than treated as poles in ``n``.
    """
    den = den_key
    if den.degree(_n) <= 0:
        return RING.one
    content = None
    for k in range(den.degree(_n) + 1):
        c = den.coeff_wrt(_n, k)
        if c:
            content = c if content is None else content.gcd(c)
    return den.exquo(content) if content is not None and content != RING.one else den


def _admissible_root(r: Fraction) -> bool:
    return is_admissible_weight(r)


def singular_at(f: RationalFunction, n: int, ctx: VermaContext) -> bool:
    """Whether ``f`` may fail to be defined at degree ``n`` for an admissible weight."""
    den = _n_part(f.den).subs(_n, n)
    if not den:
        return True
    if ctx.weight is not None or den.degree(_h) <= 0:
        return False
    roots = rational_roots(den)
    if any(_admissible_root(r) for r in roots):
        return True
    # irrational roots are admissible weights
    return len(roots) < den.degree(_h)


def singular_points(f: RationalFunction, ctx: VermaContext) -> list[int]:
    """All ``n >= 0`` where ``f`` may be undefined at an admissible weight.

    Handles denominators whose factors depend on ``n`` alone or are linear in
    ``n`` and ``h``, which covers every product of the generator formulas.
    """
    den = _n_part(f.den)
    if den.degree(_n) <= 0:
        return []
    points: set[int] = set()
    if ctx.weight is not None or den.degree(_h) <= 0:
        for r in rational_roots(den):
            if r.denominator == 1 and r >= 0:
                points.add(int(r))
        return sorted(points)
    _, factors = den.factor_list()
    for fac, _mult in factors:
        dn, dh = fac.degree(_n), fac.degree(_h)
        if dn <= 0:
            continue
        if dh <= 0:
            for r in rational_roots(fac):
                if r.denominator == 1 and r >= 0:
                    points.add(int(r))
            continue
        terms = dict(fac.terms())
        if set(terms) - {(1, 0), (0, 1), (0, 0)}:
            raise InadmissibleOperator(f"unsupported denominator factor {fac}")
        alpha = to_fraction(terms.get((1, 0), 0))
        beta = to_fraction(terms.get((0, 1), 0))
        gamma = to_fraction(terms.get((0, 0), 0))
        # root: 2h = -(p n + q)
        p, q = 2 * alpha / beta, 2 * gamma / beta
        if p.denominator != 1 or q.denominator != 1 or p <= 0:
            raise InadmissibleOperator(
                f"denominator factor {fac} vanishes at admissible weights for infinitely many n"
            )
        n = 0
        while p * n + q < 0:
            points.add(n)
            n += 1
    return sorted(points)


# --- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftTerm:
    offset: int
    stable: RationalFunction
    boundary: tuple = ()  # sorted ((n, value), ...)
    threshold: int = 0

    @property
    def boundary_map(self) -> dict:
        return dict(self.boundary)

    def value(self, n: int) -> RationalFunction:
        """Effective coefficient at degree ``n`` (a function of ``h`` only)."""
        if n < 0:
            raise ValueError("degree must be nonnegative")
        for k, v in self.boundary:
            if k == n:
                return v
        if n + self.offset < 0:
            return ZERO
        return self.stable.subs_n(n)

    def value_at(self, n: int, h) -> Fraction:
        for k, v in self.boundary:
            if k == n:
                return v.eval(0, h)
        if n + self.offset < 0:
            return Fraction(0)
        return rf_eval(self.stable, n, h)

    def render(self) -> str:
        text = f"offset {self.offset}: {self.stable}"
        if self.boundary:
            text += " [boundary " + ", ".join(f"n={k}: {v}" for k, v in self.boundary) + "]"
        return text


def _canonical_term(offset, stable, eff, n_scan, ctx) -> ShiftTerm | None:
    boundary = {}
    for n in range(n_scan):
        v = eff(n)
        if n + offset < 0:
            if not v.is_zero():
                raise AssertionError(f"annihilation violated at n={n}, offset {offset}")
            if singular_at(stable, n, ctx) or not stable.subs_n(n).is_zero():
                boundary[n] = ZERO
            continue
        if singular_at(stable, n, ctx) or stable.subs_n(n) != v:
            boundary[n] = v
    if stable.is_zero() and not any(not v.is_zero() for v in boundary.values()):
        return None
    keys = list(boundary)
    if offset < 0:
        keys.append(-offset - 1)
    threshold = 1 + max(keys) if keys else 0
    return ShiftTerm(offset, stable, tuple(sorted(boundary.items())), threshold)


# --- operators ---------------------------------------------------------------


class ShiftOperator:
    """Finite sum of weighted shift terms with distinct offsets."""

    __slots__ = ("terms", "ctx")

    def __init__(self, terms: dict | None = None, ctx: VermaContext = SYMBOLIC):
        self.terms = dict(sorted((terms or {}).items()))
        self.ctx = ctx

    @classmethod
    def zero(cls, ctx=SYMBOLIC):
        return cls({}, ctx)

    @classmethod
    def identity(cls, ctx=SYMBOLIC):
        return op_make([(0, RationalFunction.ONE)], ctx)

    @classmethod
    def diagonal(cls, coeff: RationalFunction, ctx=SYMBOLIC):
        return op_make([(0, coeff)], ctx)

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def offsets(self) -> list[int]:
        return list(self.terms)

    def term(self, s: int) -> ShiftTerm | None:
        return self.terms.get(s)

    def value(self, s: int, n: int) -> RationalFunction:
        t = self.terms.get(s)
        if t is None:
            return ZERO
        return t.value(n)

    def stable(self, s: int) -> RationalFunction:
        t = self.terms.get(s)
        return ZERO if t is None else t.stable

    def is_diagonal(self) -> bool:
        return set(self.terms) <= {0}

    def max_offset(self) -> int:
        return max((abs(s) for s in self.terms), default=0)

    # algebra
    def _check(self, other):
        if not isinstance(other, ShiftOperator):
            raise TypeError(f"expected ShiftOperator, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ContextMismatch(f"weights differ: {self.ctx.label} vs {other.ctx.label}")

    def __add__(self, other):
        return op_add(self, other)

    def __neg__(self):
        return op_scale(self, -1)

    def __sub__(self, other):
        return op_add(self, op_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, ShiftOperator):
            return op_compose(self, other)
        return op_scale(self, other)

    def __rmul__(self, other):
        return op_scale(self, other)

    def __matmul__(self, other):
        return op_compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, ShiftOperator):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, tuple(self.terms.items())))

    def render(self) -> str:
        if not self.terms:
            return "0"
        return "\n".join(t.render() for t in self.terms.values())

    __str__ = render

    def __repr__(self):
        return f"ShiftOperator(h={self.ctx.label}, {self.render()!r})"


def op_make(terms, ctx: VermaContext = SYMBOLIC) -> ShiftOperator:
    """Validate and canonicalize terms given as ``(offset, coeff)`` or
    ``(offset, coeff, {n: value})`` tuples, or as :class:`ShiftTerm`."""
    ctx.require_admissible()
    out = {}
    for spec in terms:
        if isinstance(spec, ShiftTerm):
            s, coeff, given = spec.offset, spec.stable, spec.boundary_map
        elif len(spec) == 2:
            (s, coeff), given = spec, {}
        else:
            s, coeff, given = spec
        if s in out:
            raise ValueError(f"duplicate offset {s}")
        if not isinstance(coeff, RationalFunction):
            coeff = RationalFunction.const(coeff)
        coeff = ctx.specialize(coeff)
        given = {int(k): ctx.specialize(v if isinstance(v, RationalFunction) else RationalFunction.const(v))
                 for k, v in given.items()}
        poles = singular_points(coeff, ctx)
        for p in poles:
            if p not in given and p + s >= 0:
                raise InadmissibleOperator(f"pole at n={p} for offset {s} not shielded by a boundary entry")

        def eff(n, coeff=coeff, given=given, s=s):
            if n in given:
                return given[n]
            if n + s < 0:
                return ZERO
            return coeff.subs_n(n)

        keys = list(poles) + list(given)
        if s < 0:
            keys.append(-s - 1)
        n_scan = 1 + max(keys) if keys else 0
        term = _canonical_term(s, coeff, eff, n_scan, ctx)
        if term is not None:
            out[s] = term
    return ShiftOperator(out, ctx)


def op_value(A: ShiftOperator, s: int, n: int):
    """Effective coefficient of offset ``s`` at ``z^n``; exact scalar at numeric weight."""
    v = A.value(s, n)
    if A.ctx.weight is not None:
        return v.constant_value()
    return v


def op_add(A: ShiftOperator, B: ShiftOperator) -> ShiftOperator:
    A._check(B)
    out = {}
    for s in sorted(set(A.terms) | set(B.terms)):
        ta, tb = A.terms.get(s), B.terms.get(s)
        if ta is None or tb is None:
            out[s] = ta or tb
            continue
        stable = ta.stable + tb.stable
        n_scan = max(ta.threshold, tb.threshold)
        term = _canonical_term(s, stable, lambda n: ta.value(n) + tb.value(n), n_scan, A.ctx)
        if term is not None:
            out[s] = term
    return ShiftOperator(out, A.ctx)


def op_scale(A: ShiftOperator, lam) -> ShiftOperator:
    """Multiply by a scalar that may depend on ``h`` but not on ``n``."""
    if not isinstance(lam, RationalFunction):
        lam = RationalFunction.const(lam)
    if not lam.free_of_n():
        raise ValueError("scalar must not depend on n")
    lam = A.ctx.specialize(lam)
    if lam.is_zero():
        return ShiftOperator.zero(A.ctx)
    out = {}
    for s, t in A.terms.items():
        out[s] = ShiftTerm(s, t.stable * lam, tuple((k, v * lam) for k, v in t.boundary), t.threshold)
    return ShiftOperator(out, A.ctx)


def op_compose(A: ShiftOperator, B: ShiftOperator) -> ShiftOperator:
    """``A . B`` (apply ``B`` first)."""
    A._check(B)
    groups: dict[int, list] = {}
    for ta in A.terms.values():
        for tb in B.terms.values():
            groups.setdefault(ta.offset + tb.offset, []).append((ta, tb))
    out = {}
    for s, pairs in sorted(groups.items()):
        stable = ZERO
        n_scan = 0
        for ta, tb in pairs:
            stable = stable + ta.stable.shift(tb.offset) * tb.stable
            n_scan = max(n_scan, tb.threshold, ta.threshold - tb.offset)

        def eff(n, pairs=pairs):
            total = ZERO
            for ta, tb in pairs:
                vb = tb.value(n)
                if vb.is_zero():
                    continue
                if n + tb.offset < 0:
                    raise InadmissibleOperator(f"annihilation violated at n={n}")
                try:
                    va = ta.value(n + tb.offset)
                except PoleError as exc:
                    raise InadmissibleOperator(f"genuine pole in composition at n={n}") from exc
                total = total + va * vb
            return total

        term = _canonical_term(s, stable, eff, n_scan, A.ctx)
        if term is not None:
            out[s] = term
    return ShiftOperator(out, A.ctx)


def op_commutator(A: ShiftOperator, B: ShiftOperator) -> ShiftOperator:
    return op_compose(A, B) - op_compose(B, A)


def op_adjoint(A: ShiftOperator) -> ShiftOperator:
    """Adjoint with respect to the Shapovalov form (real coefficients)."""
    ctx = A.ctx
    ctx.require_unitarizable()
    out = {}
    for s, t in A.terms.items():
        ratio = weight_ratio(s, ctx)
        stable = t.stable.shift(-s) * ratio.shift(-s)

        def eff(m, t=t, s=s, ratio=ratio):
            if m - s < 0:
                return ZERO
            v = t.value(m - s)
            if v.is_zero():
                return ZERO
            return v * ratio.subs_n(m - s)

        term = _canonical_term(-s, stable, eff, max(t.threshold + s, 0), ctx)
        if term is not None:
            out[-s] = term
    return ShiftOperator(out, ctx)


# --- truncation --------------------------------------------------------------


def _sqrt_fraction(x: Fraction) -> float:
    """Square root of a nonnegative rational, rounded from 64 extra bits."""
    if x == 0:
        return 0.0
    p, q = x.numerator, x.denominator
    bits = 2 * (64 + max(0, q.bit_length() - p.bit_length() + 1) // 2 + 1)
    k = bits // 2
    root = math.isqrt((p << bits) // q)
    return float(Fraction(root, 1 << k))


def _signed_sqrt_product(v: Fraction, r: Fraction) -> float:
    """``v * sqrt(r)`` from one exact rational radicand."""
    if v == 0:
        return 0.0
    mag = _sqrt_fraction(v * v * r)
    return mag if v > 0 else -mag


@dataclass
class DenseTruncation:
    """``N x N`` matrix of an operator in the orthonormal basis ``z^n/||z^n||``."""

    N: int
    h: Fraction
    matrix: np.ndarray = field(repr=False)
    edge: int = 0  # band width; rows this close to N are truncation artifacts

    def to_rows(self):
        rows = []
        for (r, c), val in zip(np.argwhere(self.matrix != 0).tolist(), self.matrix[self.matrix != 0]):
            rows.append((r, c, float(val.real), float(val.imag)))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "real", "imag"])
        for r, c, re, im in self.to_rows():
            w.writerow([r, c, f"{re:.17g}", f"{im:.17g}"])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "N": self.N,
            "h": str(self.h),
            "entries": [[r, c, float(f"{re:.17g}"), float(f"{im:.17g}")] for r, c, re, im in self.to_rows()],
        }
        return json.dumps(payload, separators=(",", ":"))


def op_truncate(A: ShiftOperator, N: int, h=None) -> DenseTruncation:
    """Leading ``N x N`` block in the orthonormal Shapovalov basis."""
    if N < 1:
        raise ValueError("N must be positive")
    if A.ctx.weight is not None:
        if h is not None and to_fraction(h) != A.ctx.weight:
            raise ContextMismatch("operator was built at a different weight")
        h = A.ctx.weight
    if h is None:
        raise ValueError("a numeric weight is required")
    h = to_fraction(h)
    VermaContext(h).require_unitarizable()
    M = np.zeros((N, N), dtype=complex)
    for s, t in A.terms.items():
        for n in range(max(0, -s), min(N, N - s)):
            v = t.value_at(n, h)
            if v:
                M[n + s, n] = _signed_sqrt_product(v, weight_ratio_value(s, n, h))
    return DenseTruncation(N, h, M)


def monomial_matrix(A: ShiftOperator, N: int, h=None) -> list[list[Fraction]]:
    """Exact ``N x N`` block in the monomial basis."""
    h = A.ctx.weight if A.ctx.weight is not None else to_fraction(h)
    M = [[Fraction(0)] * N for _ in range(N)]
    for s, t in A.terms.items():
        for n in range(max(0, -s), min(N, N - s)):
            M[n + s][n] = t.value_at(n, h)
    return M


def op_apply_vector(A: ShiftOperator, v) -> list:
    """Image of the polynomial ``sum v[n] z^n``; trailing zeros are dropped."""
    out: dict[int, object] = {}
    for n, c in enumerate(v):
        if not c:
            continue
        for s, t in A.terms.items():
            if n + s < 0:
                continue
            val = t.value(n)
            if val.is_zero():
                continue
            if A.ctx.weight is not None:
                val = val.constant_value()
            out[n + s] = out.get(n + s, 0) + val * c
    if not out:
        return []
    nonzero = [k for k, x in out.items() if x]
    size = max(nonzero) + 1 if nonzero else 0
    zero = Fraction(0) if A.ctx.weight is not None else ZERO
    return [out.get(k, zero) for k in range(size)]
