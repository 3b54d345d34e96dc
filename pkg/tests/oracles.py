"""Reference computations that do not reuse the library's algebra.

* structure constants of the Witt pair evaluated by brute force on plain dicts
* the generator formulas applied to monomials with sympy differentiation and
  multiplied as ordinary dense matrices
* Lie derivatives on the circle computed by sympy in the angle variable
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import sympy as sp

# --- brute-force structure constants -----------------------------------------


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def iso(a: dict, b: dict, x: dict) -> dict:
    """Trilinear extension of ``[u_i, u_j]_{v_k} = (i-j) u_{i+j+k}``."""
    out: dict = {}
    for (fa, i), ca in a.items():
        for (fb, j), cb in b.items():
            assert fa == fb
            for (fx, k), cx in x.items():
                assert fx != fa
                _add(out, (fa, i + j + k), Fraction(ca * cb * cx * (i - j)))
    return out


def lin(*pairs) -> dict:
    out: dict = {}
    for c, d in pairs:
        for key, v in d.items():
            _add(out, key, c * v)
    return out


def g(fam: str, i: int) -> dict:
    return {(fam, i): Fraction(1)}


def jacobi_defect(fam: str, iso_fam: str, i: int, j: int, l: int, k: int) -> dict:
    a, b, c, x = g(fam, i), g(fam, j), g(fam, l), g(iso_fam, k)
    return lin(
        (1, iso(iso(a, b, x), c, x)),
        (1, iso(iso(b, c, x), a, x)),
        (1, iso(iso(c, a, x), b, x)),
    )


def compat_defect(F: str, G: str, X: int, Y: int, Z: int, A: int, B: int) -> dict:
    """LHS minus RHS of the six-term compatibility identity for family ``F``."""
    x, y, z, a, b = g(F, X), g(F, Y), g(F, Z), g(G, A), g(G, B)
    lhs = iso(x, y, iso(a, b, z))
    rhs = lin(
        (1, iso(iso(x, z, a), y, b)),
        (1, iso(iso(x, y, a), z, b)),
        (1, iso(iso(z, y, a), x, b)),
        (-1, iso(iso(x, z, b), y, a)),
        (-1, iso(iso(x, y, b), z, a)),
        (-1, iso(iso(z, y, b), x, a)),
    )
    return lin((1, lhs), (Fraction(-1, 2), rhs))


# --- dense generator matrices ------------------------------------------------

_z = sp.Symbol("z")


@lru_cache(maxsize=None)
def _image(family: str, k: int, n: int, h: Fraction) -> dict:
    """Image of ``z^n`` as ``{power: coefficient}``."""
    hh = sp.Rational(h.numerator, h.denominator)
    mono = _z**n
    if k >= 0:
        p = sp.diff(mono, _z, k)
        if family == "e":
            p = _z * sp.diff(p, _z) + (k + 1) * hh * p
    else:
        m = -k
        # xi acts on z^n as n before the z^m multiplication
        den = sp.prod([n + 2 * hh + j for j in range(m)])
        num = (n + (m + 1) * hh) if family == "e" else 1
        p = _z**m * num / den * mono
    p = sp.expand(p)
    if p == 0:
        return {}
    poly = sp.Poly(p, _z)
    return {mon[0]: Fraction(int(c.p), int(c.q)) for mon, c in zip(poly.monoms(), poly.coeffs())}


def dense(family: str, k: int, M: int, h: Fraction) -> list[list[Fraction]]:
    out = [[Fraction(0)] * M for _ in range(M)]
    for n in range(M):
        for p, c in _image(family, k, n, Fraction(h)).items():
            if p < M:
                out[p][n] = c
    return out


def matmul(A, B):
    n, m, q = len(A), len(B), len(B[0])
    out = [[Fraction(0)] * q for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for t in range(m):
            a = Ai[t]
            if a:
                Bt = B[t]
                row = out[i]
                for j in range(q):
                    if Bt[j]:
                        row[j] += a * Bt[j]
    return out


def matcomb(*pairs):
    n = len(pairs[0][1])
    return [[sum((c * P[r][s] for c, P in pairs), Fraction(0)) for s in range(n)] for r in range(n)]


def block(A, N):
    return [row[:N] for row in A[:N]]


def dense_identity_defect(side: str, X, Y, A, N: int, h: Fraction):
    """``T(X)T(A)T(Y) - T(Y)T(A)T(X) - T([X,Y]_A)`` on the leading ``N`` block.

    Products are formed at a padded size so that the leading block is exact.
    """
    pad = N + sum(abs(i) for _, i in (X, Y, A)) + 2
    TX, TY, TA = (dense(f, i, pad, h) for f, i in (X, Y, A))
    prod = matcomb((1, matmul(matmul(TX, TA), TY)), (-1, matmul(matmul(TY, TA), TX)))
    target = iso(g(*X), g(*Y), g(*A))
    parts = [(c, dense(f, i, pad, h)) for (f, i), c in target.items()]
    if parts:
        prod = matcomb((1, prod), *((-c, P) for c, P in parts))
    return block(prod, N)


def dense_commutator(P, Q):
    return matcomb((1, matmul(P, Q)), (-1, matmul(Q, P)))


def is_zero_matrix(A) -> bool:
    return all(not x for row in A for x in row)


# --- circle geometry ---------------------------------------------------------

_t = sp.Symbol("t", real=True)


def field_e(k: int):
    """Coefficient of ``d/dt`` for ``e_k``."""
    return sp.I * sp.exp(sp.I * k * _t)


def func_f(k: int, unit=1):
    return unit * sp.exp(sp.I * k * _t)


def geometric_fields(a, b, f):
    """``L_a(f) b - L_b(f) a + f [a, b]`` for fields given by ``d/dt`` coefficients."""
    La, Lb = a * sp.diff(f, _t), b * sp.diff(f, _t)
    br = a * sp.diff(b, _t) - b * sp.diff(a, _t)
    return La * b - Lb * a + f * br


def geometric_functions(f1, f2, v):
    return v * sp.diff(f2, _t) * f1 - v * sp.diff(f1, _t) * f2


def same(expr_a, expr_b) -> bool:
    return sp.simplify(sp.expand(expr_a - expr_b).rewrite(sp.exp)) == 0


# --- chart enumeration -------------------------------------------------------

CHARTS = ({"e": (-1, None), "f": (0, None)}, {"e": (None, 1), "f": (None, 0)})


def _inside(chart, fam, i):
    lo, hi = chart[fam]
    return (lo is None or i >= lo) and (hi is None or i <= hi)


def chart_triples(K: int):
    """``(side, X, Y, A)`` with all three generators in one chart and ``X < Y``.

    Both sides of each identity are antisymmetric in ``X, Y``.
    """
    out = set()
    rng = range(-K, K + 1)
    for chart in CHARTS:
        for side, (u, v) in (("T1", ("e", "f")), ("T2", ("f", "e"))):
            for i in rng:
                for j in rng:
                    for k in rng:
                        if i < j and _inside(chart, u, i) and _inside(chart, u, j) and _inside(chart, v, k):
                            out.add((side, (u, i), (u, j), (v, k)))
    return sorted(out)


def weight(n: int, h: Fraction) -> Fraction:
    """Squared norm ``n! (2h)_n`` of ``z^n``."""
    out = Fraction(1)
    for j in range(n):
        out *= (j + 1) * (2 * h + j)
    return out
