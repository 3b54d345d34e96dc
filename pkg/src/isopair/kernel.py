"""Exact rational functions in the degree variable ``n`` and the weight ``h``.

Scalars are :class:`fractions.Fraction`.  Polynomials live in the sparse ring
``QQ[n, h]`` (lex order, ``n > h``); a :class:`RationalFunction` keeps a
coprime numerator/denominator pair with the denominator monic, so equal
functions have identical representations and zero-testing is structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce

from sympy import QQ
from sympy.polys.rings import ring

from .expr import ParseError, evaluate, parse_expr

__all__ = [
    "PoleError",
    "RationalFunction",
    "RING",
    "N",
    "H",
    "to_fraction",
    "rf_normalize",
    "rf_arith",
    "rf_shift",
    "rf_degree_n",
    "rf_eval",
    "rational_roots",
]

RING, _n, _h = ring("n,h", QQ)


class PoleError(ZeroDivisionError):
    """Evaluation hit a zero denominator."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def _poly_key(p):
    return tuple(sorted((m, to_fraction(c)) for m, c in p.terms()))


class RationalFunction:
    """Canonical quotient of two polynomials in ``n`` and ``h``."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1, *, _canonical: bool = False):
        num = _coerce_poly(num)
        den = _coerce_poly(den)
        if not _canonical:
            if not den:
                raise ZeroDivisionError("zero denominator")
            if not num:
                num, den = RING.zero, RING.one
            else:
                g = num.gcd(den)
                if g != RING.one:
                    num = num.exquo(g)
                    den = den.exquo(g)
                lc = den.LC
                if lc != 1:
                    num = num.quo_ground(lc)
                    den = den.quo_ground(lc)
        self.num = num
        self.den = den
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, q) -> "RationalFunction":
        return cls(RING(QQ.convert(to_fraction(q))) if q else RING.zero, _canonical=True)

    @classmethod
    def from_polys(cls, num, den) -> "RationalFunction":
        return cls(num, den)

    # predicates
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den == RING.one

    def free_of_n(self) -> bool:
        return self.num.degree(_n) <= 0 and self.den.degree(_n) <= 0

    def free_of_h(self) -> bool:
        return self.num.degree(_h) <= 0 and self.den.degree(_h) <= 0

    def is_constant(self) -> bool:
        return self.free_of_n() and self.free_of_h()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return to_fraction(self.num.coeff(1)) if self.num else Fraction(0)

    # arithmetic
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_constant():
            c = other.constant_value()
            if c == 0:
                return ZERO
            return RationalFunction(self.num.mul_ground(QQ.convert(c)), self.den, _canonical=True)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((_poly_key(self.num), _poly_key(self.den)))
        return self._hash

    # substitution
    def shift(self, delta: int) -> "RationalFunction":
        """``f(n + delta, h)``."""
        if delta == 0:
            return self
        sub = _n + delta
        return RationalFunction(self.num.compose(_n, sub), self.den.compose(_n, sub))

    def subs_n(self, value) -> "RationalFunction":
        """Substitute a number for ``n``; raises :class:`PoleError` when the
        denominator vanishes identically there."""
        value = QQ.convert(to_fraction(value))
        den = self.den.subs(_n, value)
        if not den:
            raise PoleError(f"pole of {self} at n={to_fraction(value)}", ("n", to_fraction(value)))
        return RationalFunction(self.num.subs(_n, value), den)

    def subs_h(self, value) -> "RationalFunction":
        value = QQ.convert(to_fraction(value))
        den = self.den.subs(_h, value)
        if not den:
            raise PoleError(f"pole of {self} at h={to_fraction(value)}", ("h", to_fraction(value)))
        return RationalFunction(self.num.subs(_h, value), den)

    def compose_n(self, poly) -> "RationalFunction":
        """Substitute a polynomial for ``n``."""
        poly = _coerce_poly(poly)
        return RationalFunction(self.num.compose(_n, poly), self.den.compose(_n, poly))

    def eval(self, n, h=None) -> Fraction:
        return rf_eval(self, n, h)

    def degree_n(self):
        return rf_degree_n(self)

    # rendering
    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"RationalFunction({self.render()!r})"

    def render(self, names=("n", "h")) -> str:
        num = _render_poly(self.num, names)
        if self.den == RING.one:
            return num
        if len(self.num.terms()) > 1 or "/" in num:
            num = f"({num})"
        return f"{num}/({_render_poly(self.den, names)})"

    @classmethod
    def parse(cls, text: str) -> "RationalFunction":
        node = parse_expr(text)
        try:
            return evaluate(node, {"n": N, "h": H}, number=RationalFunction.const)
        except KeyError as exc:
            raise ParseError(f"unknown variable {exc.args[0]!r}") from None
        except ZeroDivisionError as exc:
            raise ParseError(str(exc)) from None


def _coerce_poly(p):
    if isinstance(p, RationalFunction):
        if p.den != RING.one:
            raise TypeError("expected a polynomial")
        return p.num
    if isinstance(p, (int, Fraction)):
        return RING(QQ.convert(to_fraction(p)))
    if getattr(p, "ring", None) is RING:
        return p
    return RING(p)


def _coerce(x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalFunction.const(x)
    return NotImplemented


def _render_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _render_poly(p, names=("n", "h")) -> str:
    if not p:
        return "0"
    parts = []
    for monom, coeff in p.terms():  # lex-descending, n before h
        c = to_fraction(coeff)
        factors = []
        for name, e in zip(names, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        sign = "-" if c < 0 else "+"
        c = abs(c)
        if not factors:
            body = _render_coeff(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = _render_coeff(c) + "*" + "*".join(factors)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += sign + body
    return out


N = RationalFunction(_n, _canonical=True)
H = RationalFunction(_h, _canonical=True)
ZERO = RationalFunction(_canonical=True)
ONE = RationalFunction(1, _canonical=True)
RationalFunction.N = N
RationalFunction.H = H
RationalFunction.ZERO = ZERO
RationalFunction.ONE = ONE


# Spec-level operation names -------------------------------------------------


def rf_normalize(num, den) -> RationalFunction:
    """Canonical coprime form of ``num/den``; raises on a zero denominator."""
    if isinstance(num, RationalFunction) or isinstance(den, RationalFunction):
        num = num if isinstance(num, RationalFunction) else RationalFunction(num)
        den = den if isinstance(den, RationalFunction) else RationalFunction(den)
        return num / den
    return RationalFunction(num, den)


def rf_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    ops = {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}
    ops["−"] = ops["-"]
    ops["×"] = ops["*"]
    ops["÷"] = ops["/"]
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op](b)


def rf_shift(f: RationalFunction, delta: int) -> RationalFunction:
    return f.shift(delta)


def rf_degree_n(f: RationalFunction) -> tuple[int, RationalFunction]:
    """Degree in ``n`` over the field of rational functions of ``h`` and the
    ratio of the leading ``n``-coefficients."""
    if f.is_zero():
        raise ValueError("degree of the zero function")
    dn = f.num.degree(_n)
    dd = f.den.degree(_n)
    lead = RationalFunction(f.num.coeff_wrt(_n, dn), f.den.coeff_wrt(_n, dd))
    return dn - dd, lead


def rf_eval(f: RationalFunction, n, h=None) -> Fraction:
    """Exact value at a point; ``h`` may be omitted when ``f`` is free of it."""
    point = {"n": to_fraction(n)}
    subs = [(_n, QQ.convert(point["n"]))]
    if h is not None:
        point["h"] = to_fraction(h)
        subs.append((_h, QQ.convert(point["h"])))
    elif not f.free_of_h():
        raise ValueError("a value for h is required")
    else:
        subs.append((_h, QQ(0)))
    den = f.den.evaluate(subs)
    if den == 0:
        raise PoleError(f"pole of {f} at {point}", point)
    return to_fraction(f.num.evaluate(subs)) / to_fraction(den)


def rational_roots(p) -> list[Fraction]:
    """Rational roots, with multiplicity and sorted, of a nonzero univariate
    polynomial (a polynomial in ``h`` alone or in ``n`` alone).

    Linear factors are extracted with an exact factorization over QQ; the
    rational-root theorem bounds the same candidates but its divisor
    enumeration blows up on the factorial-sized constants met here.
    """
    if isinstance(p, RationalFunction):
        if not p.is_polynomial():
            raise ValueError("rational_roots expects a polynomial")
        p = p.num
    p = _coerce_poly(p)
    if not p:
        raise ValueError("rational roots of the zero polynomial")
    if p.degree(_n) > 0 and p.degree(_h) > 0:
        raise ValueError("rational_roots expects a univariate polynomial")
    var = _n if p.degree(_n) > 0 else _h
    roots: list[Fraction] = []
    if p.degree(var) <= 0:
        return roots
    _, factors = p.factor_list()
    for fac, mult in factors:
        if fac.degree(var) == 1:
            a = to_fraction(fac.coeff_wrt(var, 1).LC)
            b = to_fraction(fac.coeff_wrt(var, 0).LC) if fac.coeff_wrt(var, 0) else Fraction(0)
            roots.extend([-b / a] * mult)
    return sorted(roots)


def poly_product(factors) -> RationalFunction:
    return reduce(lambda x, y: x * y, factors, ONE)
