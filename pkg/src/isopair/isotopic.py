"""Isotopic pairs given by index-polynomial structure constants.

A rule ``[F(x), F(y) | G(a)] = c(x, y, a) * T(p x + q y + r a + s)`` fixes the
isocommutator of two generators of family ``F`` with an isotope from ``G``.
Coefficients live in ``QQ[x, y, a, t0..t5]``; the ``t`` variables carry
symbolic indices when axioms are checked as polynomial identities.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.rings import ring

from .kernel import to_fraction

__all__ = [
    "IDX",
    "Combo",
    "ElementCombo",
    "IsoRule",
    "PairPresentation",
    "AntisymmetryError",
    "FamilyMismatch",
    "DefectReport",
    "CompositeChart",
    "CompositeReport",
    "isobracket",
    "verify_jacobi",
    "verify_compatibility",
    "verify_composite",
    "witt_pair",
    "witt_charts",
    "abelian_pair",
    "FourierField",
    "geometric_isobracket",
]

IDX, _x, _y, _a, *_t = ring("x,y,a,t0,t1,t2,t3,t4,t5", QQ)
_SLOTS = (_x, _y, _a)


class AntisymmetryError(ValueError):
    pass


class FamilyMismatch(ValueError):
    pass


# --- element combinations ----------------------------------------------------


class Combo:
    """Finite formal sum ``sum c * family(index)`` with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            c = to_fraction(c)
            if c:
                clean[key] = c
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def gen(cls, family: str, index: int, coeff=1) -> "Combo":
        return cls({(family, int(index)): coeff})

    @classmethod
    def zero(cls) -> "Combo":
        return cls()

    def items(self):
        return self.terms.items()

    def families(self) -> set[str]:
        return {fam for fam, _ in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Combo") -> "Combo":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return Combo(out)

    def __neg__(self):
        return Combo({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, lam):
        lam = to_fraction(lam)
        return Combo({k: c * lam for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Combo) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def render(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for (fam, idx), c in self.terms.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = f"{fam}({idx})" if mag == 1 else f"{_frac_text(mag)}*{fam}({idx})"
            out += (("-" if sign == "-" else "") + body) if not out else f" {sign} {body}"
        return out

    __str__ = render

    def __repr__(self):
        return f"Combo({self.render()!r})"

    def to_json(self) -> list:
        return [[fam, idx, _frac_text(c)] for (fam, idx), c in self.terms.items()]


ElementCombo = Combo
_ZERO_COMBO = Combo()


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# --- presentations -----------------------------------------------------------


def _compile_coeff(poly):
    """Fast evaluator for an ``x, y, a`` polynomial at integer points."""
    terms = [(m[:3], to_fraction(c)) for m, c in poly.terms()]
    if any(any(m[3:]) for m, _ in poly.terms()):
        raise ValueError("structure constants may only use the slot variables")
    integral = all(c.denominator == 1 for _, c in terms)
    if integral:
        terms = [(m, int(c)) for m, c in terms]

    def f(i, j, k):
        total = 0
        for (ex, ey, ea), c in terms:
            total += c * i**ex * j**ey * k**ea
        return total

    return f


@dataclass(frozen=True)
class IsoRule:
    family: str
    iso: str
    coeff: object  # element of IDX in x, y, a
    target: str
    affine: tuple[int, int, int, int]  # x, y, a coefficients and constant
    names: tuple[str, str, str] = ("i", "j", "k")

    def target_index(self, i: int, j: int, k: int) -> int:
        p, q, r, s = self.affine
        return p * i + q * j + r * k + s

    def is_antisymmetric(self) -> bool:
        swapped = self.coeff.compose([(_x, _y), (_y, _x)])
        return swapped == -self.coeff and self.affine[0] == self.affine[1]


class PairPresentation:
    """Families with index-polynomial isocommutators.

    Antisymmetry in the bracketed slots is verified at construction unless
    ``check=False`` (used to build deliberately broken pairs).
    """

    def __init__(self, name: str, families, rules, charts=(), *, check: bool = True):
        families = list(families)
        if len(families) < 2:
            raise ValueError("at least two families required")
        if len(set(families)) != len(families):
            raise ValueError("duplicate family name")
        self.name = name
        self.families = families
        self.rules: dict[tuple[str, str], IsoRule] = {}
        for r in rules:
            for fam in (r.family, r.iso, r.target):
                if fam not in families:
                    raise ValueError(f"unknown family {fam!r}")
            if r.family == r.iso:
                raise ValueError("isotope must come from the other family")
            if (r.family, r.iso) in self.rules:
                raise ValueError(f"duplicate rule for [{r.family},{r.family}|{r.iso}]")
            if check and not r.is_antisymmetric():
                raise AntisymmetryError(f"isocommutator [{r.family},{r.family}|{r.iso}] is not antisymmetric")
            self.rules[(r.family, r.iso)] = r
        self.charts = list(charts)
        self._fast = {key: _compile_coeff(r.coeff) for key, r in self.rules.items()}
        self._memo: dict = {}

    def __eq__(self, other):
        return (
            isinstance(other, PairPresentation)
            and self.name == other.name
            and self.families == other.families
            and self.rules == other.rules
            and self.charts == other.charts
        )

    def other(self, family: str) -> str:
        return next(f for f in self.families if f != family)

    def gen_bracket(self, fam: str, i: int, j: int, iso_fam: str, k: int):
        """``[fam(i), fam(j)]_{iso_fam(k)}`` as ``(coeff, family, index)`` or ``None``."""
        memo_key = (fam, i, j, iso_fam, k)
        try:
            return self._memo[memo_key]
        except KeyError:
            pass
        key = (fam, iso_fam)
        rule = self.rules.get(key)
        out = None
        if rule is not None:
            c = self._fast[key](i, j, k)
            if c:
                out = c, rule.target, rule.target_index(i, j, k)
        if len(self._memo) < 1_000_000:
            self._memo[memo_key] = out
        return out

    def isobracket(self, x: Combo, y: Combo, a: Combo) -> Combo:
        return isobracket(self, x, y, a)


def _single_family(c: Combo, what: str) -> str | None:
    fams = c.families()
    if len(fams) > 1:
        raise FamilyMismatch(f"{what} mixes families {sorted(fams)}")
    return next(iter(fams), None)


def isobracket(P: PairPresentation, x: Combo, y: Combo, a: Combo) -> Combo:
    """Bilinear extension of the structure constants, linear in the isotope."""
    fx, fy, fa = _single_family(x, "x"), _single_family(y, "y"), _single_family(a, "a")
    if fx is not None and fy is not None and fx != fy:
        raise FamilyMismatch(f"bracketed elements come from {fx} and {fy}")
    fam = fx or fy
    if fam is not None and fa is not None and fam == fa:
        raise FamilyMismatch("isotope must come from the other family")
    out: dict = {}
    for (_, i), ci in x.items():
        for (_, j), cj in y.items():
            for (_, k), ck in a.items():
                r = P.gen_bracket(fam, i, j, fa, k)
                if r is None:
                    continue
                c, tf, t = r
                out[(tf, t)] = out.get((tf, t), 0) + ci * cj * ck * c
    return Combo(out)


# --- axiom verification ------------------------------------------------------


@dataclass
class DefectReport:
    check: str
    pair: str
    K: int
    checked: int
    defects: list = field(default_factory=list)  # (witness, Combo)
    symbolic_identity: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.defects

    @property
    def regime(self) -> str:
        return "polynomial-identity" if self.symbolic_identity else "window"

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "pair": self.pair,
            "K": self.K,
            "checked": self.checked,
            "regime": self.regime,
            "defects": [{"witness": list(w), "defect": d.to_json()} for w, d in self.defects],
        }


class _Acc(dict):
    def add(self, r, scale=1):
        if r is None:
            return
        c, fam, idx = r
        key = (fam, idx)
        self[key] = self.get(key, 0) + scale * c

    def combo(self, scale=1) -> Combo:
        if not any(self.values()):
            return _ZERO_COMBO
        return Combo({k: v * scale for k, v in self.items()})


def _br2(P, outer, inner_iso, fam, j, iso_fam):
    """``[g, fam(j)]_{iso}`` where ``g`` is an ``(c, family, index)`` result."""
    if outer is None:
        return None
    c, f, i = outer
    r = P.gen_bracket(f, i, j, iso_fam, inner_iso)
    if r is None:
        return None
    return c * r[0], r[1], r[2]


def verify_jacobi(P: PairPresentation, K: int) -> DefectReport:
    """Cyclic Jacobi sums of every ``k``-subscripted bracket on the window."""
    if K < 1:
        raise ValueError("K must be at least 1")
    rng = range(-K, K + 1)
    report = DefectReport("jacobi", P.name, K, 0)
    for (fam, iso), rule in sorted(P.rules.items()):
        if rule.target != fam:
            raise ValueError(f"rule [{fam},{fam}|{iso}] leaves its family; Jacobi is undefined")
        for i, j, l, k in itertools.product(rng, rng, rng, rng):
            report.checked += 1
            acc = _Acc()
            for u, v, w in ((i, j, l), (j, l, i), (l, i, j)):
                acc.add(_br2(P, P.gen_bracket(fam, u, v, iso, k), k, fam, w, iso))
            d = acc.combo()
            if not d.is_zero():
                report.defects.append(((fam, i, j, l, k), d))
    report.symbolic_identity = _symbolic_jacobi(P)
    return report


def _compat_terms(P, V1, V2, X, Y, Z, A, B):
    """Defect of ``[X,Y]_{[A,B]_Z} = 1/2(...)`` on generators (indices).

    Accumulates twice the defect so integer constants stay integers.
    """
    acc = _Acc()
    inner = P.gen_bracket(V2, A, B, V1, Z)
    if inner is not None:
        c, f, t = inner
        r = P.gen_bracket(V1, X, Y, f, t)
        if r is not None:
            acc.add((c * r[0], r[1], r[2]), 2)
    for first, second, third in ((X, Z, Y), (X, Y, Z), (Z, Y, X)):
        acc.add(_br2(P, P.gen_bracket(V1, first, second, V2, A), B, V1, third, V2), -1)
        acc.add(_br2(P, P.gen_bracket(V1, first, second, V2, B), A, V1, third, V2), 1)
    return acc.combo(Fraction(1, 2))


def verify_compatibility(P: PairPresentation, K: int) -> DefectReport:
    """Both six-term compatibility identities on all generator tuples."""
    if K < 1:
        raise ValueError("K must be at least 1")
    rng = range(-K, K + 1)
    report = DefectReport("compatibility", P.name, K, 0)
    V1, V2 = P.families[0], P.families[1]
    for side, (F, G) in (("V1", (V1, V2)), ("V2", (V2, V1))):
        for X, Y, Z, A, B in itertools.product(rng, repeat=5):
            report.checked += 1
            d = _compat_terms(P, F, G, X, Y, Z, A, B)
            if not d.is_zero():
                report.defects.append(((side, X, Y, Z, A, B), d))
    report.symbolic_identity = _symbolic_compat(P)
    return report


# symbolic regime: indices are affine forms in t0..t5, keys are the forms


def _form_poly(form):
    out = IDX(form[-1])
    for c, t in zip(form[:-1], _t):
        if c:
            out += c * t
    return out


def _unit_form(slot: int):
    form = [0] * 7
    form[slot] = 1
    return tuple(form)


def _sym_bracket(P, fam, u, v, iso_fam, w):
    """Symbolic generator bracket; ``u, v, w`` are index forms."""
    rule = P.rules.get((fam, iso_fam))
    if rule is None or not rule.coeff:
        return None
    c = rule.coeff.compose([(_x, _form_poly(u)), (_y, _form_poly(v)), (_a, _form_poly(w))])
    if not c:
        return None
    p, q, r, s = rule.affine
    form = tuple(p * a + q * b + r * d for a, b, d in zip(u, v, w))
    form = form[:-1] + (form[-1] + s,)
    return c, rule.target, form


def _sym_br2(P, outer, fam, w, iso_fam, z):
    if outer is None:
        return None
    c, f, u = outer
    r = _sym_bracket(P, f, u, w, iso_fam, z)
    if r is None:
        return None
    return c * r[0], r[1], r[2]


def _sym_zero(terms) -> bool:
    acc: dict = {}
    for r, scale in terms:
        if r is None:
            continue
        c, f, form = r
        acc[(f, form)] = acc.get((f, form), IDX.zero) + c * scale
    return all(not v for v in acc.values())


def _symbolic_jacobi(P) -> bool:
    i, j, l, k = (_unit_form(s) for s in range(4))
    for (fam, iso), rule in P.rules.items():
        terms = []
        for u, v, w in ((i, j, l), (j, l, i), (l, i, j)):
            terms.append((_sym_br2(P, _sym_bracket(P, fam, u, v, iso, k), fam, w, iso, k), 1))
        if not _sym_zero(terms):
            return False
    return True


def _symbolic_compat(P) -> bool:
    X, Y, Z, A, B = (_unit_form(s) for s in range(5))
    V1, V2 = P.families[0], P.families[1]
    half = QQ(-1, 2)
    for F, G in ((V1, V2), (V2, V1)):
        terms = []
        inner = _sym_bracket(P, G, A, B, F, Z)
        if inner is not None:
            c, f, t = inner
            r = _sym_bracket(P, F, X, Y, f, t)
            if r is not None:
                terms.append(((c * r[0], r[1], r[2]), 1))
        for a, b, d in ((X, Z, Y), (X, Y, Z), (Z, Y, X)):
            terms.append((_sym_br2(P, _sym_bracket(P, F, a, b, G, A), F, d, G, B), half))
            terms.append((_sym_br2(P, _sym_bracket(P, F, a, b, G, B), F, d, G, A), -half))
        if not _sym_zero(terms):
            return False
    return True


# --- composites --------------------------------------------------------------


@dataclass(frozen=True)
class CompositeChart:
    """Per-family index bounds; ``None`` means unbounded on that side."""

    name: str
    bounds: tuple  # ((family, lo, hi), ...) sorted by family

    @classmethod
    def make(cls, name: str, bounds: dict) -> "CompositeChart":
        return cls(name, tuple(sorted((fam, lo, hi) for fam, (lo, hi) in bounds.items())))

    def range_of(self, family: str):
        for fam, lo, hi in self.bounds:
            if fam == family:
                return lo, hi
        return None  # family absent from the chart

    def contains(self, family: str, index: int) -> bool:
        r = self.range_of(family)
        if r is None:
            return False
        lo, hi = r
        return (lo is None or index >= lo) and (hi is None or index <= hi)

    def intersect(self, other: "CompositeChart") -> "CompositeChart":
        out = {}
        for fam, lo, hi in self.bounds:
            r = other.range_of(fam)
            if r is None:
                continue
            lo2, hi2 = r
            nlo = lo2 if lo is None else (lo if lo2 is None else max(lo, lo2))
            nhi = hi2 if hi is None else (hi if hi2 is None else min(hi, hi2))
            if nlo is not None and nhi is not None and nlo > nhi:
                continue
            out[fam] = (nlo, nhi)
        return CompositeChart.make(f"{self.name}&{other.name}", out)

    def is_empty(self) -> bool:
        return not self.bounds


@dataclass
class CompositeReport:
    K: int
    closed: bool
    dense: bool
    connected: bool
    coherent: bool
    closure_failures: list
    uncovered: list
    intersections: dict  # (chart, chart) -> CompositeChart

    @property
    def ok(self) -> bool:
        return self.closed and self.dense and self.connected and self.coherent

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "closed": self.closed,
            "dense": self.dense,
            "connected": self.connected,
            "coherent": self.coherent,
            "closure_failures": [list(w) for w in self.closure_failures],
            "uncovered": [list(g) for g in self.uncovered],
            "intersections": {
                f"{a}|{b}": {fam: [lo, hi] for fam, lo, hi in c.bounds}
                for (a, b), c in sorted(self.intersections.items())
            },
        }


def _window(chart, fam, K):
    return [i for i in range(-K, K + 1) if chart.contains(fam, i)]


def _closure_failures(P, chart, K):
    failures = []
    for (fam, iso), _rule in sorted(P.rules.items()):
        xs, isos = _window(chart, fam, K), _window(chart, iso, K)
        for i, j in itertools.combinations(xs, 2):
            for k in isos:
                r = P.gen_bracket(fam, i, j, iso, k)
                if r is not None and not chart.contains(r[1], r[2]):
                    failures.append((chart.name, fam, i, j, iso, k))
    return failures


def verify_composite(P: PairPresentation, charts, K: int = 8) -> CompositeReport:
    """Closure, density on the window, connectedness and overlap coherence."""
    charts = list(charts)
    if not charts:
        raise ValueError("at least one chart required")
    failures = []
    for ch in charts:
        failures += _closure_failures(P, ch, K)
    uncovered = [
        (fam, i) for fam in P.families for i in range(-K, K + 1)
        if not any(ch.contains(fam, i) for ch in charts)
    ]
    inter = {}
    adj = {ch.name: set() for ch in charts}
    for a, b in itertools.combinations(charts, 2):
        c = a.intersect(b)
        inter[(a.name, b.name)] = c
        if any(_window(c, fam, K) for fam in P.families):
            adj[a.name].add(b.name)
            adj[b.name].add(a.name)
    seen = {charts[0].name}
    queue = deque(seen)
    while queue:
        for nxt in adj[queue.popleft()] - seen:
            seen.add(nxt)
            queue.append(nxt)
    # overlaps inherit the shared constants, so coherence means each overlap is a subpair
    coherent = all(not _closure_failures(P, c, K) for c in inter.values() if not c.is_empty())
    return CompositeReport(K, not failures, not uncovered, len(seen) == len(charts), coherent,
                           failures, uncovered, inter)


# --- standard pairs ----------------------------------------------------------


def witt_charts() -> list[CompositeChart]:
    return [
        CompositeChart.make("one", {"e": (-1, None), "f": (0, None)}),
        CompositeChart.make("two", {"e": (None, 1), "f": (None, 0)}),
    ]


def witt_pair() -> PairPresentation:
    """``[e_i, e_j]_{f_k} = (i-j) e_{i+j+k}`` and the same with ``e, f`` swapped."""
    rules = [
        IsoRule("e", "f", _x - _y, "e", (1, 1, 1, 0)),
        IsoRule("f", "e", _x - _y, "f", (1, 1, 1, 0)),
    ]
    return PairPresentation("witt", ["e", "f"], rules, witt_charts())


def abelian_pair() -> PairPresentation:
    rules = [
        IsoRule("e", "f", IDX.zero, "e", (1, 1, 1, 0)),
        IsoRule("f", "e", IDX.zero, "f", (1, 1, 1, 0)),
    ]
    return PairPresentation("abelian", ["e", "f"], rules)


# --- geometric pair on the circle --------------------------------------------


class FourierField:
    """Finite Laurent series in ``w = e^{it}`` over ``QQ(i)``.

    ``kind='function'`` is ``sum c_m w^m``; ``kind='field'`` is
    ``sum c_m w^m d/dt``.  Since ``d/dt w^m = i m w^m`` every operation stays
    inside Laurent polynomials.
    """

    __slots__ = ("kind", "coeffs")

    def __init__(self, kind: str, coeffs=None):
        if kind not in ("function", "field"):
            raise ValueError(f"unknown kind {kind!r}")
        self.kind = kind
        self.coeffs = {m: QQ_I.convert(c) for m, c in sorted((coeffs or {}).items()) if c}

    # basis: e_k = i w^k d/dt; f_k = unit * w^k
    @classmethod
    def e(cls, k: int) -> "FourierField":
        return cls("field", {k: QQ_I(0, 1)})

    @classmethod
    def f(cls, k: int, unit=QQ_I(1, 0)) -> "FourierField":
        return cls("function", {k: unit})

    def __add__(self, other):
        if other.kind != self.kind:
            raise FamilyMismatch("cannot add a function and a vector field")
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, QQ_I.zero) + c
        return FourierField(self.kind, out)

    def __neg__(self):
        return FourierField(self.kind, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FourierField":
        c = QQ_I.convert(c)
        return FourierField(self.kind, {m: c * v for m, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, FourierField) and self.kind == other.kind and self.coeffs == other.coeffs

    def __repr__(self):
        return f"FourierField({self.kind}, {self.coeffs})"

    def dt(self) -> "FourierField":
        return FourierField(self.kind, {m: c * QQ_I(0, m) for m, c in self.coeffs.items()})

    def times(self, other: "FourierField") -> "FourierField":
        """Pointwise product; at most one factor may be a vector field."""
        if self.kind == other.kind == "field":
            raise FamilyMismatch("product of two vector fields")
        kind = "field" if "field" in (self.kind, other.kind) else "function"
        out: dict = {}
        for m, c in self.coeffs.items():
            for p, d in other.coeffs.items():
                out[m + p] = out.get(m + p, QQ_I.zero) + c * d
        return FourierField(kind, out)

    def lie(self, g: "FourierField") -> "FourierField":
        """``L_v(g)`` for a vector field ``v = self`` and a function ``g``."""
        if self.kind != "field" or g.kind != "function":
            raise FamilyMismatch("Lie derivative needs a vector field and a function")
        return FourierField("function", self.times(g.dt()).coeffs)

    def commutator(self, other: "FourierField") -> "FourierField":
        a = FourierField("function", self.coeffs)
        b = FourierField("function", other.coeffs)
        return FourierField("field", (a.times(b.dt()) - b.times(a.dt())).coeffs)

    def to_combo(self, unit=QQ_I(1, 0)) -> Combo:
        """Coordinates in the basis ``e_k`` or ``f_k``; exact only when rational."""
        base = QQ_I(0, 1) if self.kind == "field" else unit
        fam = "e" if self.kind == "field" else "f"
        out = {}
        for m, c in self.coeffs.items():
            q = c / base
            if q.y != 0:
                raise ValueError(f"coordinate {q} of {fam}({m}) is not rational")
            out[(fam, m)] = to_fraction(q.x)
        return Combo(out)


def geometric_isobracket(a1: FourierField, a2: FourierField, iso: FourierField) -> FourierField:
    """Isocommutators of the pair (functions, vector fields) via Lie derivatives."""
    if a1.kind != a2.kind:
        raise FamilyMismatch("bracketed elements must have the same kind")
    if iso.kind == a1.kind:
        raise FamilyMismatch("isotope must be of the other kind")
    if a1.kind == "field":
        return a1.lie(iso).times(a2) - a2.lie(iso).times(a1) + iso.times(a1.commutator(a2))
    return iso.lie(a2).times(a1) - iso.lie(a1).times(a2)
