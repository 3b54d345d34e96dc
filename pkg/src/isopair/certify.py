"""Operator-class certificates from asymptotic degrees.

In the orthonormal basis ``u_n = z^n/||z^n||`` a term ``(s, c)`` has matrix
elements ``c(n) sqrt(w(n+s)/w(n))``, and the weight ratio grows like
``n^(2s)``.  The elements therefore behave like ``n^delta`` with
``delta = deg_n c + s``; a rational function has no logarithmic corrections,
so the exponent alone decides the class of a banded operator:

    delta >= 1   unbounded
    delta == 0   bounded, not compact
    delta == -1  Hilbert-Schmidt (and compact), not trace class
    delta <= -2  trace class

For banded operators compactness and the HS property coincide.  Boundary
tables are finite-rank perturbations and never change the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .context import SYMBOLIC, VermaContext
from .kernel import RationalFunction, rational_roots
from .shift import ShiftOperator, ShiftTerm, op_truncate

__all__ = [
    "VERDICTS",
    "ClassCertificate",
    "classify_term",
    "certify",
    "scalar_part",
    "tail_hs_norm",
]

VERDICTS = ("zero", "trace-class", "HS", "bounded-not-compact", "unbounded")
_RANK = {v: i for i, v in enumerate(VERDICTS)}


def _class_of(delta: int) -> str:
    if delta >= 1:
        return "unbounded"
    if delta == 0:
        return "bounded-not-compact"
    if delta == -1:
        return "HS"
    return "trace-class"


def _weakest(verdicts) -> str:
    return max(verdicts, key=_RANK.__getitem__, default="zero")


@dataclass(frozen=True)
class TermClass:
    offset: int
    delta: int | None  # None for a finite-rank (boundary only) term
    verdict: str
    leading: RationalFunction | None

    def exceptional_poly(self) -> RationalFunction | None:
        """Numerator of the leading coefficient when it depends on ``h``."""
        if self.leading is None or self.leading.free_of_h():
            return None
        return RationalFunction(self.leading.num)


def classify_term(term: ShiftTerm, ctx: VermaContext = SYMBOLIC) -> TermClass:
    """Band exponent and class of one weighted shift term."""
    ctx.require_admissible()
    if term.stable.is_zero():
        return TermClass(term.offset, None, "trace-class" if term.boundary else "zero", None)
    deg, lead = term.stable.degree_n()
    delta = deg + term.offset
    return TermClass(term.offset, delta, _class_of(delta), lead)


def scalar_part(A: ShiftOperator) -> RationalFunction | None:
    """``n -> oo`` limit of the diagonal stable coefficient, if bounded."""
    t = A.term(0)
    if t is None:
        return None
    if t.stable.is_zero():
        return RationalFunction.ZERO
    deg, lead = t.stable.degree_n()
    if deg > 0:
        return None
    return lead if deg == 0 else RationalFunction.ZERO


@dataclass
class ClassCertificate:
    verdict: str
    terms: list = field(default_factory=list)  # TermClass, by offset
    scalar_part: RationalFunction | None = None
    modulo_scalars: bool = False
    exceptional_h_poly: RationalFunction | None = None
    exceptional_h_roots: list = field(default_factory=list)
    finite_rank: bool = False
    no_inner_product: bool = False

    @property
    def compact(self) -> bool:
        return _RANK[self.verdict] <= _RANK["HS"]

    @property
    def scalar_plus_hs(self) -> bool:
        """Scalar plus HS (the scalar may be zero)."""
        return self.compact and not self.no_inner_product

    def delta_per_term(self) -> list:
        return [[t.offset, t.delta] for t in self.terms]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "delta_per_term": self.delta_per_term(),
            "scalar_part": None if self.scalar_part is None else self.scalar_part.render(),
            "exceptional_h_poly": None if self.exceptional_h_poly is None else self.exceptional_h_poly.render(),
            "exceptional_h_roots": [str(r) for r in self.exceptional_h_roots],
            "modulo_scalars": self.modulo_scalars,
            "finite_rank": self.finite_rank,
            "no_inner_product": self.no_inner_product,
        }


def _subtract_scalar(t: ShiftTerm, lam: RationalFunction) -> ShiftTerm:
    return ShiftTerm(0, t.stable - lam, tuple((k, v - lam) for k, v in t.boundary), t.threshold)


def certify(A: ShiftOperator, modulo_scalars: bool = False) -> ClassCertificate:
    """Weakest class over the terms of ``A`` (optionally after removing a scalar).

    At a nonpositive admissible weight there is no inner product; the exponent
    then uses raw coefficients and only compactness is meaningful.
    """
    ctx = A.ctx
    ctx.require_admissible()
    no_ip = not ctx.unitarizable
    terms = dict(A.terms)
    lam = None
    if modulo_scalars and 0 in terms:
        lam = scalar_part(A)
        if lam is not None and not lam.is_zero():
            terms[0] = _subtract_scalar(terms[0], lam)
    classes = []
    for s, t in sorted(terms.items()):
        tc = classify_term(t, ctx)
        if no_ip and tc.delta is not None:
            raw = tc.delta - s
            verdict = _class_of(raw)
            if verdict in ("HS", "trace-class"):
                verdict = "HS"  # reported as compact; no HS norm exists
            tc = TermClass(s, raw, verdict, tc.leading)
        if tc.verdict != "zero":
            classes.append(tc)
    verdict = _weakest(tc.verdict for tc in classes)
    finite_rank = bool(classes) and all(tc.delta is None for tc in classes)
    poly = None
    for tc in classes:
        p = tc.exceptional_poly()
        if p is not None:
            poly = p if poly is None else poly * p
    roots = sorted(set(rational_roots(poly))) if poly is not None else []
    return ClassCertificate(verdict, classes, lam, modulo_scalars, poly, roots, finite_rank, no_ip)


def tail_hs_norm(A: ShiftOperator, N: int, h=None, scalar: RationalFunction | None = None) -> float:
    """Frobenius norm of rows ``[N/2, N)`` of the ``N x N`` truncation.

    ``scalar`` (free of ``n``) is subtracted from the diagonal first.
    """
    M = op_truncate(A, N, h).matrix
    if scalar is not None:
        lam = float(A.ctx.specialize(scalar).constant_value() if A.ctx.weight is not None
                    else scalar.eval(0, h))
        M = M - lam * np.eye(N)
    return float(math.sqrt(np.sum(np.abs(M[N // 2:, :]) ** 2)))

