"""Spin-1/spin-2 tensor operators realizing the Witt isotopic pair on ``V_h``.

With ``xi = z d/dz`` acting on ``z^n`` as ``n``::

    e_k  -> (xi + (k+1)h) d^k                         k >= 0
    e_-k -> z^k (xi + (k+1)h) / ((xi+2h)...(xi+2h+k-1))  k >= 1
    f_k  -> d^k                                       k >= 0
    f_-k -> z^k / ((xi+2h)...(xi+2h+k-1))              k >= 1

Each chart's formula family makes sense for every integer ``k`` once falling
and rising products are continued to negative length; that continuation is
what :func:`chart_overlap_consistency` compares on the chart intersection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .context import SYMBOLIC, VermaContext
from .isotopic import Combo, PairPresentation, witt_charts, witt_pair
from .kernel import ONE, N, RationalFunction
from .shift import ShiftOperator, op_commutator, op_compose, op_make, op_scale

__all__ = [
    "falling",
    "rising",
    "chart_formula",
    "rep_generator",
    "Representation",
    "chart_of",
    "rep_identity_defect",
    "witt_deviation",
    "lb_probe",
    "nonlinear_sl2_probe",
    "chart_overlap_consistency",
    "verify_composed_representation",
]


def falling(x: RationalFunction, k: int) -> RationalFunction:
    """``x (x-1) ... (x-k+1)``; for ``k < 0`` it is ``1/((x+1)...(x+|k|))``."""
    out = ONE
    if k >= 0:
        for j in range(k):
            out = out * (x - j)
        return out
    for j in range(1, -k + 1):
        out = out * (x + j)
    return ONE / out


def rising(x: RationalFunction, k: int) -> RationalFunction:
    """``x (x+1) ... (x+k-1)``; for ``k < 0`` it is ``1/((x-1)...(x-|k|))``."""
    out = ONE
    if k >= 0:
        for j in range(k):
            out = out * (x + j)
        return out
    for j in range(1, -k + 1):
        out = out * (x - j)
    return ONE / out


def chart_formula(chart: int, family: str, index: int, ctx: VermaContext = SYMBOLIC) -> ShiftOperator:
    """Operator for ``family_index`` from the given chart's formula family."""
    ctx.require_admissible()
    h = ctx.h
    if chart == 1:
        k = index
        coeff = falling(N, k)
        if family == "e":
            coeff = (N - k + (k + 1) * h) * coeff
        return op_make([(-k, coeff)], ctx)
    if chart == 2:
        k = -index
        coeff = ONE / rising(N + 2 * h, k)
        if family == "e":
            coeff = (N + (k + 1) * h) * coeff
        return op_make([(k, coeff)], ctx)
    raise ValueError(f"unknown chart {chart}")


@lru_cache(maxsize=None)
def rep_generator(family: str, k: int, ctx: VermaContext = SYMBOLIC) -> ShiftOperator:
    """T1(e_k) for ``family='e'``, T2(f_k) for ``family='f'``."""
    if family not in ("e", "f"):
        raise ValueError(f"unknown family {family!r}")
    return chart_formula(1 if k >= 0 else 2, family, k, ctx)


# --- charts ------------------------------------------------------------------

def chart_of(elements, charts=None) -> int | None:
    """1-based id of the first chart containing every ``(family, index)`` pair."""
    charts = witt_charts() if charts is None else charts
    for cid, chart in enumerate(charts, start=1):
        if all(chart.contains(fam, idx) for fam, idx in elements):
            return cid
    return None


# --- representation ----------------------------------------------------------


@dataclass
class Representation:
    """Generator assignment at a fixed weight, with the pair it represents."""

    ctx: VermaContext = SYMBOLIC
    pair: PairPresentation = field(default_factory=witt_pair)

    def T(self, family: str, k: int) -> ShiftOperator:
        return rep_generator(family, k, self.ctx)

    def T1(self, k: int) -> ShiftOperator:
        return self.T("e", k)

    def T2(self, k: int) -> ShiftOperator:
        return self.T("f", k)

    def of_combo(self, combo: Combo) -> ShiftOperator:
        out = ShiftOperator.zero(self.ctx)
        for (fam, idx), c in combo.items():
            out = out + op_scale(self.T(fam, idx), c)
        return out


def rep_identity_defect(rep: Representation, side: str, X, Y, A) -> ShiftOperator:
    """Represented triple product minus represented isocommutator.

    ``side='T1'``: ``T1(X)T2(A)T1(Y) - T1(Y)T2(A)T1(X) - T1([X,Y]_A)``;
    ``side='T2'`` is the dual.  Zero means the defining identity holds.
    """
    if side not in ("T1", "T2"):
        raise ValueError(f"side must be T1 or T2, not {side!r}")
    fx, fy, fa = X[0], Y[0], A[0]
    if fx != fy or fx == fa:
        raise ValueError("X and Y must share a family and A must be in the other")
    TX, TY, TA = rep.T(*X), rep.T(*Y), rep.T(*A)
    product = op_compose(op_compose(TX, TA), TY) - op_compose(op_compose(TY, TA), TX)
    bracket = rep.pair.isobracket(Combo.gen(*X), Combo.gen(*Y), Combo.gen(*A))
    return product - rep.of_combo(bracket)


def witt_deviation(rep: Representation, i: int, j: int) -> ShiftOperator:
    """``[T1(e_i), T1(e_j)] - (i-j) T1(e_{i+j})``."""
    return op_commutator(rep.T1(i), rep.T1(j)) - op_scale(rep.T1(i + j), i - j)


@dataclass
class LBProbe:
    PQ: ShiftOperator
    QP: ShiftOperator
    commutator: ShiftOperator
    certificate: object


def lb_probe(rep: Representation) -> LBProbe:
    """Products of ``P = T2(f_1)`` and ``Q = T2(f_-1)``."""
    from .certify import certify

    P, Q = rep.T2(1), rep.T2(-1)
    PQ, QP = op_compose(P, Q), op_compose(Q, P)
    comm = PQ - QP
    return LBProbe(PQ, QP, comm, certify(comm, modulo_scalars=False))


@dataclass
class SL2Probe:
    k: int
    weight_relations: bool
    commutator: ShiftOperator
    closure: RationalFunction  # variable n stands for lambda = n + h
    boundary_mismatch: dict

    def closure_text(self) -> str:
        return self.closure.render(("lam", "h"))


def nonlinear_sl2_probe(rep: Representation, k: int) -> SL2Probe:
    """Closure function ``Phi_k`` with ``[T1(e_k), T1(e_-k)] = Phi_k(T1(e_0))``."""
    E0, Ek, Emk = rep.T1(0), rep.T1(k), rep.T1(-k)
    ok = (op_commutator(E0, Ek) == op_scale(Ek, -k)) and (op_commutator(E0, Emk) == op_scale(Emk, k))
    C = op_commutator(Ek, Emk)
    if not C.is_diagonal():
        raise ValueError("commutator is not diagonal")
    stable = C.stable(0)
    h = rep.ctx.h
    closure = stable.compose_n((N - h).num)  # n = lambda - h
    mismatch = {}
    term = C.term(0)
    if term is not None:
        for n, v in term.boundary:
            mismatch[n] = v
    return SL2Probe(k, ok, C, closure, mismatch)


def chart_overlap_consistency(ctx: VermaContext = SYMBOLIC) -> dict:
    """Compare both charts' formulas on ``e_-1, e_0, e_1, f_0``."""
    out = {}
    for fam, idx in (("e", -1), ("e", 0), ("e", 1), ("f", 0)):
        a, b = chart_formula(1, fam, idx, ctx), chart_formula(2, fam, idx, ctx)
        out[f"{fam}({idx})"] = (a == b, a)
    return out


def in_chart_triples(K: int, chart: int, side: str):
    """Same-chart triples with indices bounded by ``K``; X before Y."""
    lo_e, hi_e = (-1, K) if chart == 1 else (-K, 1)
    lo_f, hi_f = (0, K) if chart == 1 else (-K, 0)
    es = range(lo_e, hi_e + 1)
    fs = range(lo_f, hi_f + 1)
    if side == "T1":
        for i in es:
            for j in es:
                if i < j:
                    for a in fs:
                        yield ("e", i), ("e", j), ("f", a)
    else:
        for a in fs:
            for b in fs:
                if a < b:
                    for x in es:
                        yield ("f", a), ("f", b), ("e", x)


@dataclass
class ComposedReport:
    K: int
    h: str
    checked: int
    in_chart_failures: list
    cross_chart: list


def verify_composed_representation(rep: Representation, K: int, cross_pairs=None) -> ComposedReport:
    """In-chart identities must vanish; listed cross-chart defects are certified."""
    from .certify import certify

    if K < 2:
        raise ValueError("K must be at least 2")
    failures = []
    checked = 0
    seen = set()
    for chart in (1, 2):
        for side in ("T1", "T2"):
            for X, Y, A in in_chart_triples(K, chart, side):
                key = (side, X, Y, A)
                if key in seen:
                    continue
                seen.add(key)
                checked += 1
                d = rep_identity_defect(rep, side, X, Y, A)
                if not d.is_zero():
                    failures.append((side, X, Y, A, d))
    cross = []
    for side, X, Y, A in cross_pairs or ():
        d = rep_identity_defect(rep, side, X, Y, A)
        cross.append((side, X, Y, A, d, certify(d, modulo_scalars=True)))
    return ComposedReport(K, rep.ctx.label, checked, failures, cross)
