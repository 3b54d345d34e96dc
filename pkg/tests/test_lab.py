import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from isopair import lab
from isopair.lab import (
    E_MINUS,
    E_PLUS,
    E_ZERO,
    FlowSpec,
    MobiusWord,
    commutator_flow_scaling,
    flow,
    generator_matrix,
    group_defect_mobius,
    matexp,
    monoassociativity_check,
    orbit_coefficients,
    semigroup_probe,
    taylor_exp,
    unitarity_deviation,
)

I = 1j


def test_matexp_basics():
    assert np.allclose(matexp(np.zeros((3, 3))), np.eye(3), atol=0)
    d = np.array([0.3, -1.2, 2.0])
    assert np.allclose(matexp(np.diag(d)), np.diag(np.exp(d)), rtol=1e-15, atol=0)


@pytest.mark.parametrize("N", [2, 4, 8])
def test_matexp_matches_taylor(N):
    rng = np.random.default_rng(N)
    for _ in range(5):
        A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        A *= 5 / np.linalg.norm(A, 2)
        assert np.max(np.abs(matexp(A) - taylor_exp(A))) <= 1e-12


def test_matexp_nilpotent_is_finite_sum():
    X = generator_matrix([(1, 1)], 8, 1)
    assert np.allclose(np.tril(X, -1), 0) and np.allclose(np.diag(X), 0)
    finite = sum(np.linalg.matrix_power(X, k) / math.factorial(k) for k in range(8))
    assert np.max(np.abs(matexp(X) - finite)) <= 1e-12 * np.max(np.abs(finite))


def test_matexp_overflow():
    with pytest.raises(OverflowError):
        matexp(np.diag([800.0, 0.0]))


def test_truncated_generators_match_exact_weights():
    # orthonormal entries are sqrt(w(n+s)/w(n)) times the monomial coefficient
    h = Fraction(7, 2)
    X = generator_matrix([(-2, 1)], 6, h)
    mono = oracles.dense("e", -2, 6, h)
    for n in range(4):
        expected = float(mono[n + 2][n]) * math.sqrt(oracles.weight(n + 2, h) / oracles.weight(n, h))
        assert X[n + 2, n].real == pytest.approx(expected, rel=1e-14)


def test_rotation_flow_is_unitary_diagonal():
    U = flow(FlowSpec([(0, I)], 0.7, 16, 1)).matrix
    assert np.allclose(U, np.diag(np.exp(0.7j * (np.arange(16) + 1))), atol=1e-15)


def test_real_flow_unitary_on_window():
    spec = FlowSpec([(1, I), (-1, I)], 0.3, 64, 1)
    assert spec.anti_hermitian
    U = flow(spec).matrix
    assert np.max(np.abs((U.conj().T @ U - np.eye(64))[:32, :32])) <= 1e-10
    assert np.array_equal(flow(FlowSpec(spec.generator, 0, 64, 1)).matrix, np.eye(64))


def test_unitarity_curve():
    curve = unitarity_deviation(FlowSpec([(2, I), (-2, I)], 0.2, h=1), 16, (64, 128, 256))
    assert curve.last <= 1e-8 and curve.converged
    vals = curve.values
    assert all(b <= a * 1.1 + 1e-13 for a, b in zip(vals, vals[1:]))
    doubled = unitarity_deviation(FlowSpec([(2, I), (-2, I)], 0.4, h=1), 16, (64, 128, 256))
    assert doubled.last <= 1e-8
    assert unitarity_deviation(FlowSpec([(0, I)], 1.0), 16, (32, 64)).last <= 1e-13


def test_unitarity_requires_reality_condition():
    with pytest.raises(ValueError, match="reality"):
        unitarity_deviation(FlowSpec([(1, 1), (-1, 1)], 0.1))


def test_flows_need_positive_weight():
    with pytest.raises(ValueError):
        FlowSpec([(1, I)], 0.1, 8, Fraction(-1, 3))


def test_monoassociativity():
    spec = FlowSpec([(1, I), (-1, I)], N=64, h=1)
    assert monoassociativity_check(spec, 0.1, 0.2) <= 1e-10
    assert monoassociativity_check(spec, 0, 0) == 0
    neretin = FlowSpec([(1, 0.3 + 0.1j), (-1, -0.2j), (2, 0.05)], N=64, h=1)
    z = 0.05 + 0.02j
    assert monoassociativity_check(neretin, z, 2 * z) <= 1e-10


def test_sl2_matrices_realize_witt_brackets():
    E = {-1: E_MINUS, 0: E_ZERO, 1: E_PLUS}
    for i in E:
        for j in E:
            if -1 <= i + j <= 1:
                assert np.allclose(E[i] @ E[j] - E[j] @ E[i], (i - j) * E[i + j])


@settings(max_examples=30, deadline=None)
@given(*(st.floats(-0.5, 0.5) for _ in range(3)))
def test_gauss_factorization_round_trip(a, b, c):
    w = MobiusWord(a, b, c)
    g = matexp(a * E_MINUS) @ matexp(b * E_ZERO) @ matexp(c * E_PLUS)
    assert np.allclose(w.matrix, g.real, atol=1e-13)
    back = MobiusWord.from_matrix(w.matrix)
    assert back.a == pytest.approx(a, abs=1e-12)
    assert back.b == pytest.approx(b, abs=1e-12)
    assert back.c == pytest.approx(c, abs=1e-12)
    assert np.allclose((w @ w.inverse()).matrix, np.eye(2), atol=1e-12)


def test_mobius_group_law():
    w1, w2 = MobiusWord(0.1, 0.05, -0.08), MobiusWord(-0.05, 0.1, 0.07)
    curve = group_defect_mobius(w1, w2, 16, (64, 128, 256), 1)
    assert curve.last <= 1e-6
    assert abs(curve.extra["phase_modulus"] - 1) <= 1e-8
    inv = group_defect_mobius(w1, w1.inverse(), 16, (32, 64), 1)
    assert inv.last <= 1e-10
    assert inv.extra["phase"][0] == pytest.approx(1, abs=1e-10)
    rot = group_defect_mobius(MobiusWord(0, 0.2, 0), MobiusWord(0, -0.05, 0), 8, (16, 32), 1)
    assert rot.last <= 1e-14


def test_commutator_scaling_in_chart():
    X = FlowSpec([(1, I), (-1, I)], N=64, h=1)
    Y = FlowSpec([(0, 2 * I)], N=64, h=1)
    r = commutator_flow_scaling(X, Y)
    assert r.exponent == pytest.approx(3, abs=0.3)
    same = commutator_flow_scaling(X, X)
    assert max(same.defects) <= 1e-13


def test_commutator_scaling_cross_chart():
    X = FlowSpec([(2, I), (-2, I)], N=64, h=1)
    Y = FlowSpec([(3, I), (-3, I)], N=64, h=1)
    assert commutator_flow_scaling(X, Y, correction="scalar").exponent >= 2.7


def test_semigroup_probe():
    r = semigroup_probe(0.5, 0.5, 1, 0.1 + 0.05j, 32, 1)
    assert r.product_error <= 1e-12
    assert r.singular_ratio_error <= 1e-10
    assert r.cr_residual <= 1e-6
    with pytest.raises(ValueError):
        semigroup_probe(1.2, 0.5)


def test_orbit_coefficients():
    v = orbit_coefficients(MobiusWord(0.1, 0, 0), 8, 1)
    for n in range(8):
        expected = 0.1**n * math.sqrt(float(oracles.weight(n, Fraction(1)))) / math.factorial(n)
        assert v[n].real == pytest.approx(expected, rel=1e-12)
    assert v[1] == pytest.approx(0.1 * math.sqrt(2))
    rot = orbit_coefficients(FlowSpec([(0, I)], 0.9, 8, 1), 8, 1)
    assert np.allclose(rot, np.eye(8)[0])
    ident = orbit_coefficients(MobiusWord(0, 0, 0), 8, 1)
    assert np.allclose(ident, np.eye(8)[0])


def test_curve_serialization():
    curve = lab.DeviationCurve([(64, 1e-9), (128, 5e-10)], "leading 16x16")
    assert curve.to_csv().splitlines() == ["N,value", "64,1.0000000000000001e-09", "128,5.0000000000000003e-10"]
    assert json.loads(curve.to_json())["points"] == [[64, 1e-9], [128, 5e-10]]
    with pytest.raises(ValueError):
        lab.DeviationCurve([(64, 0.0), (64, 0.0)], "w")


def test_flowspec_from_json():
    spec = FlowSpec.from_json({"generator": [[2, 0, 1], [-2, 0, 1]], "t": 0.2, "N": 32, "h": "3/2"})
    assert spec.generator == ((-2, 1j), (2, 1j)) and spec.h == Fraction(3, 2) and spec.N == 32
    assert spec.edge == 2
