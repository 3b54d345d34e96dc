"""Shift maps ``R_{f_k}(e_i) = s e_{i+k}`` (and dually) as classical r-matrices.

``s`` is 1 under the ``paper`` normalization and 1/2 under ``half``.  Only
the half scaling turns the Witt bracket into the isocommutator through
``[a, b]_x = [R_x a, b] + [a, R_x b]``; only the unit scaling makes
``x -> R_x`` multiplicative.  Every result records which one was used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .isotopic import Combo, FamilyMismatch, PairPresentation, isobracket, witt_pair

__all__ = [
    "NORMALIZATIONS",
    "RMatrixMap",
    "witt_bracket",
    "r_apply",
    "r_identity_defect",
    "r_multiplicativity_defect",
    "mybe_defect",
    "MYBEResult",
]

NORMALIZATIONS = {"paper": Fraction(1), "half": Fraction(1, 2)}


@dataclass(frozen=True)
class RMatrixMap:
    isotope: tuple[str, int]  # (family, index)
    normalization: str = "paper"

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def scale(self) -> Fraction:
        return NORMALIZATIONS[self.normalization]

    @property
    def acts_on(self) -> str:
        return _PARTNER[self.isotope[0]]


_PARTNER = {"e": "f", "f": "e"}


def witt_bracket(a: Combo, b: Combo) -> Combo:
    """``[x_i, x_j] = (i-j) x_{i+j}`` within one family."""
    out: dict = {}
    for (fa, i), ca in a.items():
        for (fb, j), cb in b.items():
            if fa != fb:
                raise FamilyMismatch("Witt bracket of different families")
            if i != j:
                out[(fa, i + j)] = out.get((fa, i + j), 0) + ca * cb * (i - j)
    return Combo(out)


def r_apply(R: RMatrixMap, a: Combo) -> Combo:
    fam, k = R.isotope
    target = R.acts_on
    out = {}
    for (f, i), c in a.items():
        if f != target:
            raise FamilyMismatch(f"R_{fam}({k}) acts on family {target}, not {f}")
        out[(f, i + k)] = c * R.scale
    return Combo(out)


def _maps(family: str, k: int, normalization: str) -> RMatrixMap:
    return RMatrixMap((_PARTNER[family], k), normalization)


def r_identity_defect(P: PairPresentation | None, i: int, j: int, k: int, normalization: str = "paper",
                      family: str = "e") -> Combo:
    """``[R a, b] + [a, R b] - [a, b]_x`` with ``a = x_i``, ``b = x_j``, ``x`` the isotope of index ``k``."""
    P = P or witt_pair()
    R = _maps(family, k, normalization)
    a, b = Combo.gen(family, i), Combo.gen(family, j)
    lhs = witt_bracket(r_apply(R, a), b) + witt_bracket(a, r_apply(R, b))
    return lhs - isobracket(P, a, b, Combo.gen(*R.isotope))


def r_multiplicativity_defect(i: int, j: int, normalization: str = "paper", K: int = 6) -> dict:
    """``(R_i R_j - R_{i+j}) x_l`` for ``|l| <= K`` on both sides; keys ``(family, l)``."""
    out = {}
    for family in ("e", "f"):
        Ri, Rj, Rij = (_maps(family, m, normalization) for m in (i, j, i + j))
        for l in range(-K, K + 1):
            g = Combo.gen(family, l)
            out[(family, l)] = r_apply(Ri, r_apply(Rj, g)) - r_apply(Rij, g)
    return out


@dataclass(frozen=True)
class MYBEResult:
    normalization: str
    constant: Fraction
    defect: Combo
    compensated: Combo


def mybe_defect(i: int, j: int, k: int, normalization: str = "paper", constant=1,
                family: str = "e") -> MYBEResult:
    """Modified Yang-Baxter defect ``[Ra,Rb] - R([Ra,b]+[a,Rb]) + c[a,b]``.

    The compensated form replaces ``c[a,b]`` by ``R^2([a,b])``.
    """
    R = _maps(family, k, normalization)
    a, b = Combo.gen(family, i), Combo.gen(family, j)
    Ra, Rb = r_apply(R, a), r_apply(R, b)
    core = witt_bracket(Ra, Rb) - r_apply(R, witt_bracket(Ra, b) + witt_bracket(a, Rb))
    ab = witt_bracket(a, b)
    c = Fraction(constant)
    return MYBEResult(normalization, c, core + ab * c, core + r_apply(R, r_apply(R, ab)))
