"""End-to-end acceptance checks, one group of tests per criterion.

Test names carry the criterion number (``test_criterion_NN_...``); the
conftest hook folds their outcomes into one PASS/FAIL line per criterion.
"""

import itertools
import json
from fractions import Fraction

import pytest

import oracles
from isopair.certify import certify
from isopair.cli import main, run_command
from isopair.context import VermaContext
from isopair.ipair import bundled_path, emit_pair_spec, parse_pair_spec
from isopair.isotopic import Combo, FourierField, geometric_isobracket, verify_compatibility, verify_jacobi, witt_pair
from isopair.kernel import H, N, rational_roots
from isopair.lab import (
    FlowSpec,
    MobiusWord,
    commutator_flow_scaling,
    group_defect_mobius,
    matexp,
    monoassociativity_check,
    semigroup_probe,
    taylor_exp,
    unitarity_deviation,
)
from isopair.rmatrix import mybe_defect, r_identity_defect, r_multiplicativity_defect
from isopair.shift import ShiftOperator, monomial_matrix, op_adjoint, op_value
from isopair.verma import (
    Representation,
    chart_overlap_consistency,
    lb_probe,
    nonlinear_sl2_probe,
    rep_identity_defect,
    witt_deviation,
)

WEIGHTS = [Fraction(1, 3), Fraction(1), Fraction(7, 2)]
TRIPLES = oracles.chart_triples(5)
R = Representation()


# 1 -------------------------------------------------------------------------


def test_criterion_01_isotopic_axioms():
    P = parse_pair_spec(bundled_path().read_text(encoding="utf-8"))
    jac, comp = verify_jacobi(P, 6), verify_compatibility(P, 6)
    assert jac.ok and jac.checked == 2 * 13**4
    assert comp.ok and comp.checked == 2 * 13**5
    assert jac.regime == comp.regime == "polynomial-identity"
    rng = range(-6, 7)
    for fam, other in (("e", "f"), ("f", "e")):
        for i, j, l, k in itertools.product(rng, repeat=4):
            assert not oracles.jacobi_defect(fam, other, i, j, l, k)
    # full six-index sweep is 742586 oracle calls; cover it at |.| <= 4
    for F, G in (("e", "f"), ("f", "e")):
        for t in itertools.product(range(-4, 5), repeat=5):
            assert not oracles.compat_defect(F, G, *t)


# 2 -------------------------------------------------------------------------


def test_criterion_02_geometric_match():
    E, F = (lambda i: Combo.gen("e", i)), (lambda i: Combo.gen("f", i))
    for i, j, k in itertools.product(range(-5, 6), repeat=3):
        g = geometric_isobracket(FourierField.e(i), FourierField.e(j), FourierField.f(k)).to_combo()
        assert g == (E(i + j + k) * (i - j) if i != j else Combo())
        g = geometric_isobracket(FourierField.f(i), FourierField.f(j), FourierField.e(k)).to_combo()
        assert g == (F(i + j + k) * (i - j) if i != j else Combo())


# 3 -------------------------------------------------------------------------


def test_criterion_03_in_chart_exact_symbolic():
    assert len(TRIPLES) == 459
    assert {t[0] for t in TRIPLES} == {"T1", "T2"}
    for side, X, Y, A in TRIPLES:
        assert rep_identity_defect(R, side, X, Y, A).is_zero(), (side, X, Y, A)


@pytest.mark.parametrize("h", WEIGHTS, ids=str)
def test_criterion_03_dense_oracle(h):
    rep = Representation(VermaContext(h))
    for side, X, Y, A in TRIPLES:
        assert oracles.is_zero_matrix(oracles.dense_identity_defect(side, X, Y, A, 12, h)), (side, X, Y, A)
        assert rep_identity_defect(rep, side, X, Y, A).is_zero()


# 4 -------------------------------------------------------------------------


def test_criterion_04_chart_overlap():
    table = chart_overlap_consistency()
    assert set(table) == {"e(-1)", "e(0)", "e(1)", "f(0)"}
    assert all(same for same, _ in table.values())


# 5 -------------------------------------------------------------------------


def test_criterion_05_adjoint_symmetry():
    for k in range(1, 6):
        assert op_adjoint(R.T1(k)) == R.T1(-k)
        assert op_adjoint(R.T2(k)) == R.T2(-k)


# 6 -------------------------------------------------------------------------


def _dense_deviation(i, j, h, size=12):
    pad = size + abs(i) + abs(j) + 2
    D = oracles.matcomb(
        (1, oracles.dense_commutator(oracles.dense("e", i, pad, h), oracles.dense("e", j, pad, h))),
        (-(i - j), oracles.dense("e", i + j, pad, h)),
    )
    return oracles.block(D, size)


@pytest.mark.parametrize("h", [Fraction(2), Fraction(5, 2)], ids=str)
def test_criterion_06_certified_scalar_plus_hs(h):
    rep = Representation(VermaContext(h))
    for i, j in itertools.product(range(-4, 5), repeat=2):
        d = witt_deviation(rep, i, j)
        if d.is_zero():
            continue
        cert = certify(d, modulo_scalars=True)
        assert cert.scalar_plus_hs, (i, j)
        if d.is_diagonal():
            assert cert.scalar_part is not None
        else:
            assert cert.verdict in ("HS", "trace-class"), (i, j)


def test_criterion_06_symbolic_exceptional_polynomial():
    for i, j in itertools.product(range(-4, 5), repeat=2):
        d = witt_deviation(R, i, j)
        if d.is_zero():
            continue
        cert = certify(d, modulo_scalars=True)
        if cert.exceptional_h_poly is not None:
            assert cert.exceptional_h_roots == rational_roots(cert.exceptional_h_poly)
    cert = certify(witt_deviation(R, 2, -2), modulo_scalars=True)
    assert cert.exceptional_h_poly == -8 * H**3 + 12 * H**2 - 4 * H
    assert cert.exceptional_h_roots == [0, Fraction(1, 2), 1]


def test_criterion_06_two_minus_two_at_h2():
    h = Fraction(2)
    d = witt_deviation(Representation(VermaContext(h)), 2, -2)
    assert not d.is_zero()
    assert op_value(d, 0, 2) == Fraction(-46, 35)
    dense = _dense_deviation(2, -2, h)
    assert dense[2][2] == Fraction(-46, 35)
    assert monomial_matrix(d, 12) == dense


def test_criterion_06_two_minus_two_vanishes_at_h1():
    h = Fraction(1)
    d = witt_deviation(Representation(VermaContext(h)), 2, -2)
    assert monomial_matrix(d, 12) == _dense_deviation(2, -2, h)
    assert d.is_zero(), f"deviation at h=1 is {d.render()}"


# 7 -------------------------------------------------------------------------


def test_criterion_07_rmatrix():
    rng = range(-6, 7)
    for i, j in itertools.product(rng, repeat=2):
        assert all(x.is_zero() for x in r_multiplicativity_defect(i, j, "paper", 6).values())
    for fam in ("e", "f"):
        for i, j, k in itertools.product(rng, repeat=3):
            assert r_identity_defect(None, i, j, k, "paper", fam) == Combo.gen(fam, i + j + k) * (i - j)
            assert r_identity_defect(None, i, j, k, "half", fam).is_zero()
    for i, j, k in itertools.product(rng, repeat=3):
        m = mybe_defect(i, j, k, "paper")
        assert m.defect.is_zero() == (k == 0 or i == j)
        assert m.compensated.is_zero()


# 8 -------------------------------------------------------------------------


def test_criterion_08_lb_probe():
    p = lb_probe(R)
    assert p.PQ == ShiftOperator.diagonal((N + 1) / (N + 2 * H))
    assert p.QP.stable(0) == N / (N - 1 + 2 * H)
    assert p.commutator.stable(0) == (2 * H - 1) / ((N + 2 * H) * (N - 1 + 2 * H))
    assert p.certificate.verdict == "trace-class"
    assert p.certificate.exceptional_h_roots == [Fraction(1, 2)]
    assert nonlinear_sl2_probe(R, 1).closure_text() == "2*lam"


# 9 -------------------------------------------------------------------------

I = 1j


def test_criterion_09_numeric_lab():
    import numpy as np

    spec = FlowSpec([(1, I), (-1, I)], N=64, h=1)
    assert monoassociativity_check(spec, 0.1, 0.2) <= 1e-10

    rng = np.random.default_rng(9)
    for n in (2, 4, 8):
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        assert np.max(np.abs(matexp(A) - taylor_exp(A))) <= 1e-12

    curve = unitarity_deviation(FlowSpec([(2, I), (-2, I)], 0.2, h=1), 16, (64, 128, 256))
    # compressing an anti-Hermitian generator keeps it anti-Hermitian, so the
    # curve sits at round-off; "decreasing" is checked up to that floor
    vals = curve.values
    assert all(b <= a + 1e-13 for a, b in zip(vals, vals[1:]))
    assert curve.last <= 1e-8

    mob = group_defect_mobius(MobiusWord(0.1, 0.05, -0.08), MobiusWord(-0.05, 0.1, 0.07), 16, (64, 128, 256), 1)
    assert mob.last <= 1e-6
    assert abs(mob.extra["phase_modulus"] - 1) <= 1e-8

    X, Y = FlowSpec([(1, I), (-1, I)], N=64, h=1), FlowSpec([(0, 2 * I)], N=64, h=1)
    assert commutator_flow_scaling(X, Y).exponent >= 2.7

    s = semigroup_probe(0.5, 0.5 * np.exp(0.3j))
    assert s.product_error <= 1e-12
    assert s.singular_ratio_error <= 1e-10


# 10 ------------------------------------------------------------------------


def test_criterion_10_golden_round_trip():
    text = bundled_path().read_text(encoding="utf-8")
    P = parse_pair_spec(text)
    assert emit_pair_spec(P) == text
    assert emit_pair_spec(parse_pair_spec(emit_pair_spec(P))) == text
    assert emit_pair_spec(witt_pair()) == text


def test_criterion_10_exit_codes(capsys):
    assert run_command(["verify-pair", "--spec", str(bundled_path()), "--K", "6"])[0] == 0
    assert run_command(["rmatrix", "--defect", "identity", "--normalization", "paper", "--K", "4"])[0] == 1
    code, report = run_command(["certify", "--op", "f(-1)", "--h", "1"])
    assert code == 0 and report.checks[0].result["verdict"] == "bounded-not-compact"
    assert run_command(["verify-pair", "--unknown"])[0] == 2
    assert run_command(["certify", "--op", "(e(1)", "--h", "1"])[0] == 2
    capsys.readouterr()


def test_criterion_10_byte_reproducible(capsys):
    outputs = []
    for _ in range(2):
        main(["verify-rep", "--K", "3", "--h", "symbolic"])
        main(["deviation", "--K", "3", "--h", "2"])
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert "platform" not in json.loads(outputs[0].splitlines()[0])
