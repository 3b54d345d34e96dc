"""Floating-point experiments on truncated generators.

Generators are combinations ``X = sum a_k T1(e_k)`` truncated to ``N x N`` in
the orthonormal Shapovalov basis.  ``T1(e_k)^* = T1(e_-k)`` holds exactly, so
``X`` is anti-Hermitian (and ``exp(tX)`` unitary for real ``t``) exactly when
``a_-k = -conj(a_k)``.  Truncation edges are artifacts: every reported norm is
taken on a leading window well inside the matrix.
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
from scipy.linalg import expm

from .context import VermaContext
from .kernel import to_fraction
from .shift import DenseTruncation, op_truncate
from .certify import scalar_part
from .verma import Representation, rep_generator, witt_deviation

__all__ = [
    "matexp",
    "taylor_exp",
    "FlowSpec",
    "flow",
    "generator_matrix",
    "DeviationCurve",
    "window_stable",
    "unitarity_deviation",
    "MobiusWord",
    "mobius_operator",
    "group_defect_mobius",
    "monoassociativity_check",
    "commutator_flow_scaling",
    "semigroup_probe",
    "orbit_coefficients",
]


# --- exponentials ------------------------------------------------------------


def matexp(M, t: complex = 1.0):
    """``exp(tM)`` by scaling and squaring; accepts arrays or truncations."""
    A = M.matrix if isinstance(M, DenseTruncation) else np.asarray(M)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = expm(t * A.astype(complex))
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed")
    if isinstance(M, DenseTruncation):
        return DenseTruncation(M.N, M.h, E)
    return E


def taylor_exp(M, terms: int = 50):
    """Plain Taylor sum, the reference for :func:`matexp` on small matrices."""
    A = np.asarray(M, dtype=complex)
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ A / k
        out = out + term
    return out


# --- generators and flows ----------------------------------------------------


@lru_cache(maxsize=256)
def _generator_block(k: int, N: int, h: Fraction) -> np.ndarray:
    M = op_truncate(rep_generator("e", k, VermaContext(h)), N).matrix
    M.setflags(write=False)
    return M


def generator_matrix(combo, N: int, h) -> np.ndarray:
    """Truncation of ``sum a_k T1(e_k)`` for ``combo = [(k, a_k), ...]``."""
    h = to_fraction(h)
    out = np.zeros((N, N), dtype=complex)
    for k, a in combo:
        if a:
            out = out + complex(a) * _generator_block(int(k), N, h)
    return out


def witt_combo_bracket(X, Y) -> list:
    """``[X, Y]`` in the Witt algebra for coefficient lists."""
    acc: dict = {}
    for i, a in X:
        for j, b in Y:
            if i != j:
                acc[i + j] = acc.get(i + j, 0) + complex(a) * complex(b) * (i - j)
    return sorted((k, v) for k, v in acc.items() if v)


@dataclass(frozen=True)
class FlowSpec:
    generator: tuple  # ((k, a_k), ...)
    t: complex = 1.0
    N: int = 64
    h: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "generator", tuple(sorted((int(k), complex(a)) for k, a in self.generator)))
        object.__setattr__(self, "h", to_fraction(self.h))
        if self.h <= 0:
            raise ValueError("flows need a unitarizable weight h > 0")

    @classmethod
    def from_json(cls, doc: dict) -> "FlowSpec":
        gen = [(k, complex(re, im)) for k, re, im in doc["generator"]]
        t = doc.get("t", 1.0)
        t = complex(*t) if isinstance(t, list) else complex(t)
        return cls(tuple(gen), t, int(doc.get("N", 64)), Fraction(str(doc.get("h", 1))))

    @property
    def edge(self) -> int:
        return max((abs(k) for k, _ in self.generator), default=0)

    @property
    def anti_hermitian(self) -> bool:
        """Reality condition ``a_-k = -conj(a_k)``."""
        coeffs = dict(self.generator)
        return all(abs(coeffs.get(-k, 0) + a.conjugate()) < 1e-15 for k, a in coeffs.items())

    def at(self, N: int) -> "FlowSpec":
        return FlowSpec(self.generator, self.t, N, self.h)

    def matrix(self) -> np.ndarray:
        return generator_matrix(self.generator, self.N, self.h)


def flow(spec: FlowSpec) -> DenseTruncation:
    """``exp(t X_N)``; the ``edge`` field records the band width."""
    return DenseTruncation(spec.N, spec.h, matexp(spec.matrix(), spec.t), spec.edge)


# --- deviation curves --------------------------------------------------------


def window_stable(prev: float, last: float, rel: float = 0.05, abs_tol: float = 1e-8) -> bool:
    """Relative change at most ``rel`` or absolute change at most ``abs_tol``."""
    change = abs(last - prev)
    return change <= max(rel * abs(prev), abs_tol)


@dataclass
class DeviationCurve:
    points: list  # [(N, value), ...]
    window: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        Ns = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("N values must be strictly increasing")

    @property
    def values(self) -> list:
        return [v for _, v in self.points]

    @property
    def last(self) -> float:
        return self.points[-1][1]

    @property
    def converged(self) -> bool:
        if len(self.points) < 2:
            return False
        return window_stable(self.points[-2][1], self.points[-1][1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "value"])
        for n, v in self.points:
            w.writerow([n, f"{v:.17g}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "points": [[n, float(f"{v:.17g}")] for n, v in self.points],
            "converged": self.converged,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fro(A) -> float:
    return float(np.linalg.norm(A))


def unitarity_deviation(spec: FlowSpec, M: int = 16, Ns=(64, 128, 256)) -> DeviationCurve:
    """HS norm of ``U*U - I`` on the leading ``M x M`` block."""
    if not spec.anti_hermitian:
        raise ValueError("reality condition a_-k = -conj(a_k) is not met")
    if not float(complex(spec.t).imag) == 0.0:
        raise ValueError("unitarity needs a real time")
    pts = []
    for N in Ns:
        U = flow(spec.at(N)).matrix
        D = U.conj().T @ U - np.eye(N)
        pts.append((N, _fro(D[:M, :M])))
    return DeviationCurve(pts, f"leading {M}x{M}")


def monoassociativity_check(spec: FlowSpec, t: complex, s: complex) -> float:
    """``||exp((t+s)X) - exp(tX) exp(sX)||`` on the full truncation."""
    X = spec.matrix()
    return _fro(matexp(X, t + s) - matexp(X, t) @ matexp(X, s))


# --- Moebius words -----------------------------------------------------------

# [E_i, E_j] = (i-j) E_{i+j} for i, j in {-1, 0, 1}
E_MINUS = np.array([[0.0, -1.0], [0.0, 0.0]])
E_ZERO = np.array([[0.5, 0.0], [0.0, -0.5]])
E_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])


@dataclass(frozen=True)
class MobiusWord:
    """``g = exp(a E_-1) exp(b E_0) exp(c E_1)``, i.e. ``[[B - ac/B, -a/B], [c/B, 1/B]]`` with ``B = e^(b/2)``."""

    a: float
    b: float
    c: float

    @property
    def matrix(self) -> np.ndarray:
        B = math.exp(self.b / 2)
        return np.array([[B - self.a * self.c / B, -self.a / B], [self.c / B, 1 / B]])

    @classmethod
    def from_matrix(cls, g) -> "MobiusWord":
        g = np.asarray(g, dtype=float)
        if abs(np.linalg.det(g) - 1) > 1e-12:
            raise ValueError("matrix is not unimodular")
        if g[1, 1] <= 0:
            raise ValueError("matrix is outside the Gauss-decomposable neighborhood")
        word = cls(-g[0, 1] / g[1, 1], -2 * math.log(g[1, 1]), g[1, 0] / g[1, 1])
        if np.max(np.abs(word.matrix - g)) > 1e-12:
            raise ValueError("Gauss factorization does not reproduce the matrix")
        return word

    def __matmul__(self, other: "MobiusWord") -> "MobiusWord":
        return MobiusWord.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MobiusWord":
        return MobiusWord.from_matrix(np.linalg.inv(self.matrix))


def _single_offset_exp(k: int, a: float, N: int, h: Fraction) -> np.ndarray:
    """``exp(a T1(e_k))`` for ``k = +-1`` from its finite series, column by column."""
    M = _generator_block(k, N, h)
    s = -k
    E = np.eye(N, dtype=complex)
    for n in range(N):
        val = 1.0 + 0j
        m, j = n, 0
        while 0 <= m + s < N:
            j += 1
            val = val * a * M[m + s, m] / j
            m += s
            E[m, n] = val
            if val == 0:
                break
    return E


def mobius_operator(w: MobiusWord, N: int, h) -> np.ndarray:
    """``exp(a X_-1) exp(b X_0) exp(c X_1)`` on the truncation."""
    h = to_fraction(h)
    D = np.diag(np.exp(w.b * (np.arange(N) + float(h)))).astype(complex)
    return _single_offset_exp(-1, w.a, N, h) @ D @ _single_offset_exp(1, w.c, N, h)


def group_defect_mobius(w1: MobiusWord, w2: MobiusWord, M: int = 16, Ns=(64, 128, 256), h=1) -> DeviationCurve:
    """Window norm of ``T(w1) T(w2) - lam T(w1 w2)`` with the best unit-free scalar ``lam``."""
    w12 = w1 @ w2
    pts, lams = [], []
    for N in Ns:
        A = (mobius_operator(w1, N, h) @ mobius_operator(w2, N, h))[:M, :M]
        B = mobius_operator(w12, N, h)[:M, :M]
        lam = np.vdot(B, A) / np.vdot(B, B)
        pts.append((N, _fro(A - lam * B)))
        lams.append(lam)
    lam = lams[-1]
    return DeviationCurve(pts, f"leading {M}x{M}", {"phase": [float(lam.real), float(lam.imag)],
                                                    "phase_modulus": float(abs(lam))})


# --- commutator flows --------------------------------------------------------


@dataclass
class ScalingReport:
    ts: list
    defects: list
    exponent: float
    correction: str

    def to_dict(self) -> dict:
        return {
            "t": [float(t) for t in self.ts],
            "defect": [float(f"{d:.17g}") for d in self.defects],
            "exponent": float(f"{self.exponent:.17g}"),
            "correction": self.correction,
        }


def _bracket_matrix(X: FlowSpec, Y: FlowSpec, correction: str) -> np.ndarray:
    Z = generator_matrix(witt_combo_bracket(X.generator, Y.generator), X.N, X.h)
    if correction == "none":
        return Z
    rep = Representation(VermaContext(X.h))
    for i, a in X.generator:
        for j, b in Y.generator:
            dev = witt_deviation(rep, i, j)
            if dev.is_zero():
                continue
            if correction == "scalar":
                lam = scalar_part(dev)
                if lam is not None and lam:
                    Z = Z + a * b * float(lam.constant_value()) * np.eye(X.N)
            elif correction == "full":
                Z = Z + a * b * op_truncate(dev, X.N).matrix
            else:
                raise ValueError(f"unknown correction {correction!r}")
    return Z


def commutator_flow_scaling(X: FlowSpec, Y: FlowSpec, ts=(0.01, 0.02, 0.04, 0.08), M: int = 16,
                            correction: str = "scalar") -> ScalingReport:
    """Fit ``p`` in ``||e^{tX} e^{tY} e^{-tX} e^{-tY} - e^{t^2 Z}|| ~ t^p`` on the window.

    ``Z`` is the truncated image of the Witt bracket, plus the scalar parts of
    the representation deviations (``correction='scalar'``) or the deviations
    themselves (``'full'``).
    """
    A, B = X.matrix(), Y.at(X.N).matrix()
    Z = _bracket_matrix(X, Y.at(X.N), correction)
    defects = []
    for t in ts:
        G = matexp(A, t) @ matexp(B, t) @ matexp(A, -t) @ matexp(B, -t)
        defects.append(_fro((G - matexp(Z, t * t))[:M, :M]))
    logs = [(math.log(t), math.log(d)) for t, d in zip(ts, defects) if d > 0]
    if len(logs) < 2:
        p = math.inf
    else:
        p = float(np.polyfit([u for u, _ in logs], [v for _, v in logs], 1)[0])
    return ScalingReport(list(ts), defects, p, correction)


# --- semigroup proxy ---------------------------------------------------------


def q_power(q: complex, N: int, h) -> np.ndarray:
    """``q^{T1(e_0)} = diag(q^{n+h})`` on the principal branch."""
    return np.diag(np.exp((np.arange(N) + float(to_fraction(h))) * np.log(complex(q))))


@dataclass
class SemigroupReport:
    product_error: float
    singular_ratio_error: float
    cr_residual: float

    def to_dict(self) -> dict:
        return {k: float(f"{v:.17g}") for k, v in self.__dict__.items()}


def semigroup_probe(q1: complex, q2: complex, k: int = 1, tau: complex = 0.1 + 0.05j, N: int = 32, h=1,
                    step: float = 1e-4) -> SemigroupReport:
    """Composition law, geometric singular values and holomorphy in ``tau``."""
    if abs(q1) >= 1 or abs(q2) >= 1:
        raise ValueError("|q| must be below 1")
    A1, A2, A12 = q_power(q1, N, h), q_power(q2, N, h), q_power(q1 * q2, N, h)
    product_error = float(np.max(np.abs(A1 @ A2 - A12)))
    sv = np.linalg.svd(A1, compute_uv=False)
    ratios = sv[1:] / sv[:-1]
    ratio_error = float(np.max(np.abs(ratios - abs(q1))))
    X = generator_matrix([(k, 1)], N, h)

    def F(z):
        return matexp(X, z) @ A1

    d_re = (F(tau + step) - F(tau - step)) / (2 * step)
    d_im = (F(tau + 1j * step) - F(tau - 1j * step)) / (2j * step)
    cr = float(np.max(np.abs(d_re - d_im)))
    return SemigroupReport(product_error, ratio_error, cr)


# --- orbit of the highest vector ---------------------------------------------


def orbit_coefficients(g, N: int, h=1) -> np.ndarray:
    """``T(g) u_0`` scaled so its first nonzero coordinate is 1."""
    if isinstance(g, MobiusWord):
        v = mobius_operator(g, N, h)[:, 0]
    elif isinstance(g, FlowSpec):
        v = flow(g.at(N)).matrix[:, 0]
    else:
        raise TypeError("expected a MobiusWord or a FlowSpec")
    nz = np.flatnonzero(np.abs(v) > 1e-300)
    if nz.size == 0:
        raise ValueError("orbit vector vanishes")
    return v / v[nz[0]]
