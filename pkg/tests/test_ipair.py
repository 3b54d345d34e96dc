from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isopair.ipair import ParseError, bundled_path, emit_pair_spec, load_bundled, parse_pair_spec
from isopair.isotopic import AntisymmetryError, verify_jacobi, witt_pair

HEADER = "pair w {\n  family e indexed by Z;\n  family f indexed by Z;\n"


def test_bundled_spec_is_the_witt_pair():
    P = load_bundled()
    assert P.name == "witt"
    assert [c.name for c in P.charts] == ["one", "two"]
    W = witt_pair()
    assert emit_pair_spec(P) == emit_pair_spec(W)


def test_golden_round_trip_is_byte_identical():
    text = bundled_path().read_text(encoding="utf-8")
    assert emit_pair_spec(parse_pair_spec(text)) == text


def test_needs_two_families():
    with pytest.raises(ParseError, match="at least two families required"):
        parse_pair_spec("pair w { family e indexed by Z; iso [e(i), e(j) | e(k)] = (i-j)*e(i); }")
    with pytest.raises(ParseError, match="at least two families required"):
        parse_pair_spec("pair w { }")


def test_unbalanced_parenthesis_points_at_open_paren():
    text = HEADER + "  iso [e(i), e(j) | f(k)] = (i - j*e(i+j+k);\n}"
    with pytest.raises(ParseError) as info:
        parse_pair_spec(text)
    assert (info.value.line, info.value.col) == (4, 29)
    assert "parenthesis" in str(info.value)


def test_antisymmetry_enforced_with_position():
    text = HEADER + "  iso [e(i), e(j) | f(k)] = (i-2*j)*e(i+j+k);\n}"
    with pytest.raises(AntisymmetryError, match="line 4, column 3"):
        parse_pair_spec(text)


@pytest.mark.parametrize(
    "body,message",
    [
        ("  iso [e(i), e(j) | f(k)] = (i-j)*e(i*j);\n", "affine"),
        ("  iso [e(i), e(j) | f(k)] = (i-j)*e(i+j+k/2);\n", "affine"),
        ("  iso [e(i), e(j) | f(k)] = (i-j)/k*e(i+j+k);\n", "non-constant"),
        ("  iso [e(i), e(j) | g(k)] = (i-j)*e(i+j+k);\n", "unknown family"),
        ("  iso [e(i), e(i) | f(k)] = 0*e(i);\n", "distinct"),
        ("  iso [e(i), e(j) | f(k)] = (i-j)*e(i+m);\n", "unknown index variable"),
        ("  iso [e(i), e(j) | f(k)] = (i-j);\n", "coefficient \\* target"),
    ],
)
def test_malformed_rules(body, message):
    with pytest.raises(ParseError, match=message):
        parse_pair_spec(HEADER + body + "}")


def test_chart_errors():
    rules = "  iso [e(i), e(j) | f(k)] = (i-j)*e(i+j+k);\n"
    with pytest.raises(ParseError, match="line 5, column 18: unexpected character '>'"):
        parse_pair_spec(HEADER + rules + "  chart a { e: i > 2; }\n}")
    with pytest.raises(ParseError, match="duplicate chart"):
        parse_pair_spec(HEADER + rules + "  chart a { e: i >= 2; }\n  chart a { f: i <= 0; }\n}")


def test_rational_literals_survive():
    text = HEADER + "  iso [e(i), e(j) | f(k)] = (1/2*i-1/2*j)*e(i+j+k);\n  iso [f(i), f(j) | e(k)] = (i-j)*f(i+j+k);\n}"
    P = parse_pair_spec(text)
    again = parse_pair_spec(emit_pair_spec(P))
    assert emit_pair_spec(again) == emit_pair_spec(P)
    assert "1/2*i-1/2*j" in emit_pair_spec(P)


def test_user_spec_with_other_names_is_first_class():
    text = (
        "pair geo {\n  family v indexed by Z;\n  family u indexed by Z;\n"
        "  iso [v(a), v(b) | u(c)] = (a-b)*v(a+b+c);\n  iso [u(a), u(b) | v(c)] = (a-b)*u(a+b+c);\n}"
    )
    P = parse_pair_spec(text)
    assert verify_jacobi(P, 2).ok


coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@settings(max_examples=60, deadline=None)
@given(coeffs, coeffs, coeffs, st.integers(-2, 2), st.integers(-2, 2), st.integers(-3, 3),
       st.lists(st.tuples(st.sampled_from("ef"), st.sampled_from([">=", "<="]), st.integers(-4, 4)), max_size=4))
def test_randomized_round_trip(c0, c1, c2, p, r, s, bounds):
    # (x-y) times a factor symmetric in x, y, with a target symmetric in x, y
    def q(c: Fraction) -> str:
        return f"({c.numerator}/{c.denominator})"

    coeff = f"(i-j)*({q(c0)}+{q(c1)}*k+{q(c2)}*(i+j))"
    target = f"{p}*i+{p}*j+{r}*k+{s}"
    chart = ""
    if bounds:
        chart = "  chart c {\n" + "".join(f"    {fam}: i {op} {v};\n" for fam, op, v in bounds) + "  }\n"
    text = (HEADER + f"  iso [e(i), e(j) | f(k)] = {coeff}*e({target});\n"
            + "  iso [f(i), f(j) | e(k)] = (i-j)*f(i+j+k);\n" + chart + "}")
    P = parse_pair_spec(text)
    canon = emit_pair_spec(P)
    assert emit_pair_spec(parse_pair_spec(canon)) == canon
