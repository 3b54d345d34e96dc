"""Reader and canonical writer for ``.ipair`` pair descriptions.

::

    pair witt {
      family e indexed by Z;
      family f indexed by Z;
      iso [e(i), e(j) | f(k)] = (i-j)*e(i+j+k);
      iso [f(i), f(j) | e(k)] = (i-j)*f(i+j+k);
      chart one {
        e: i >= -1;
        f: i >= 0;
      }
    }

Coefficients are polynomials in the three slot variables with rational
literals; targets are affine with integer coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from sympy import QQ

from .expr import ExprParser, ParseError, evaluate, tokenize
from .isotopic import IDX, AntisymmetryError, CompositeChart, IsoRule, PairPresentation
from .kernel import to_fraction

__all__ = ["parse_pair_spec", "emit_pair_spec", "load_bundled", "bundled_path", "ParseError"]

_SLOTS = IDX.gens[:3]


class _SpecParser(ExprParser):
    def keyword(self, word: str):
        tok = self.tok
        if tok.kind != "ident" or tok.text != word:
            found = tok.text or "end of input"
            raise self.error(f"expected {word!r}, found {found!r}")
        self.advance()

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    # pair := "pair" IDENT "{" family+ iso+ chart* "}"
    def pair(self) -> PairPresentation:
        self.keyword("pair")
        name = self.expect_ident().text
        self.expect("{")
        families = []
        while self.at_word("family"):
            families.append(self.family(families))
        if len(families) < 2:
            raise self.error("at least two families required")
        rules = []
        while self.at_word("iso"):
            rules.append(self.iso(families))
        if not rules:
            raise self.error("at least one iso rule required")
        charts = []
        while self.at_word("chart"):
            charts.append(self.chart(families, charts))
        self.expect("}")
        if self.tok.kind != "end":
            raise self.error(f"unexpected trailing {self.tok.text!r}")
        return PairPresentation(name, families, rules, charts)

    def family(self, known) -> str:
        self.keyword("family")
        tok = self.expect_ident()
        if tok.text in known:
            raise self.error(f"duplicate family {tok.text!r}", tok)
        self.keyword("indexed")
        self.keyword("by")
        self.keyword("Z")
        self.expect(";")
        return tok.text

    def gen(self, families) -> tuple[str, str]:
        fam = self.expect_ident()
        if fam.text not in families:
            raise self.error(f"unknown family {fam.text!r}", fam)
        self.expect("(")
        var = self.expect_ident().text
        self.expect(")")
        return fam.text, var

    def iso(self, families) -> IsoRule:
        start = self.tok
        self.keyword("iso")
        self.expect("[")
        (f1, v1) = self.gen(families)
        self.expect(",")
        (f2, v2) = self.gen(families)
        self.expect("|")
        (f3, v3) = self.gen(families)
        self.expect("]")
        if f1 != f2:
            raise self.error("bracketed generators must share a family", start)
        if f3 == f1:
            raise self.error("isotope must come from the other family", start)
        names = (v1, v2, v3)
        if len(set(names)) != 3:
            raise self.error("index variables must be distinct", start)
        self.expect("=")
        rhs_tok = self.tok
        self.calls = set(families)
        node = self.sum()
        self.calls = set()
        self.expect(";")
        if node[0] == "call":
            coeff_node, call = ("num", Fraction(1)), node
        elif node[0] == "mul" and node[2][0] == "call":
            coeff_node, call = node[1], node[2]
        else:
            raise self.error("right side must be coefficient * target", rhs_tok)
        _, target, args = call
        if len(args) != 1:
            raise self.error("target takes one index", rhs_tok)
        coeff = _index_poly(coeff_node, names, rhs_tok)
        affine = _affine(_index_poly(args[0], names, rhs_tok), rhs_tok)
        rule = IsoRule(f1, f3, coeff, target, affine, names)
        if not rule.is_antisymmetric():
            raise AntisymmetryError(
                f"line {start.line}, column {start.col}: isocommutator [{f1},{f1}|{f3}] is not antisymmetric"
            )
        return rule

    def chart(self, families, charts) -> CompositeChart:
        self.keyword("chart")
        name_tok = self.expect_ident()
        if any(c.name == name_tok.text for c in charts):
            raise self.error(f"duplicate chart {name_tok.text!r}", name_tok)
        self.expect("{")
        bounds: dict = {}
        while not self.at("}"):
            fam = self.expect_ident()
            if fam.text not in families:
                raise self.error(f"unknown family {fam.text!r}", fam)
            self.expect(":")
            self.expect_ident()
            if self.at(">="):
                op = self.advance().text
            elif self.at("<="):
                op = self.advance().text
            else:
                raise self.error("expected '>=' or '<='")
            value = self.expect_int()
            self.expect(";")
            lo, hi = bounds.get(fam.text, (None, None))
            if op == ">=":
                lo = value if lo is None else max(lo, value)
            else:
                hi = value if hi is None else min(hi, value)
            bounds[fam.text] = (lo, hi)
        self.expect("}")
        if not bounds:
            raise self.error("chart needs at least one bound", name_tok)
        return CompositeChart.make(name_tok.text, bounds)


def _index_poly(node, names, tok):
    variables = dict(zip(names, _SLOTS))

    def number(q):
        return IDX(QQ(q.numerator, q.denominator))

    def check(n):
        if n[0] == "div" and not _constant(n[2]):
            raise ParseError("division by a non-constant", tok.line, tok.col)
        if n[0] == "call":
            raise ParseError(f"unexpected call of {n[1]!r}", tok.line, tok.col)
        for child in n[1:]:
            if isinstance(child, tuple):
                check(child)

    check(node)
    try:
        return evaluate(node, variables, number=number)
    except KeyError as exc:
        raise ParseError(f"unknown index variable {exc.args[0]!r}", tok.line, tok.col) from None


def _constant(node) -> bool:
    if node[0] == "num":
        return True
    if node[0] == "var" or node[0] == "call":
        return False
    return all(_constant(c) for c in node[1:] if isinstance(c, tuple))


def _affine(poly, tok) -> tuple[int, int, int, int]:
    out = [0, 0, 0, 0]
    for monom, c in poly.terms():
        c = to_fraction(c)
        if sum(monom) > 1 or c.denominator != 1:
            raise ParseError("target index must be affine with integer coefficients", tok.line, tok.col)
        if sum(monom) == 0:
            out[3] = int(c)
        else:
            out[monom.index(1)] = int(c)
    return tuple(out)


def parse_pair_spec(text: str) -> PairPresentation:
    return _SpecParser(tokenize(text)).pair()


# --- canonical emission ------------------------------------------------------


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _render_index_poly(poly, names) -> str:
    if not poly:
        return "0"
    out = ""
    for monom, c in poly.terms():
        c = to_fraction(c)
        factors = []
        for name, e in zip(names, monom[:3]):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if not factors:
            body = _frac(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _frac(mag) + "*" + "*".join(factors)
        if not out:
            out = ("-" if c < 0 else "") + body
        else:
            out += ("-" if c < 0 else "+") + body
    return out


def _render_affine(affine, names) -> str:
    out = ""
    for c, name in zip(affine[:3], names):
        if not c:
            continue
        body = name if abs(c) == 1 else f"{abs(c)}*{name}"
        out += ("-" if c < 0 else ("+" if out else "")) + body
    s = affine[3]
    if s or not out:
        out += f"{'-' if s < 0 else ('+' if out else '')}{abs(s)}"
    return out


def emit_pair_spec(P: PairPresentation) -> str:
    lines = [f"pair {P.name} {{"]
    for fam in P.families:
        lines.append(f"  family {fam} indexed by Z;")
    for (fam, iso), r in sorted(P.rules.items()):
        x, y, a = r.names
        coeff = _render_index_poly(r.coeff, r.names)
        target = _render_affine(r.affine, r.names)
        lines.append(f"  iso [{fam}({x}), {fam}({y}) | {iso}({a})] = ({coeff})*{r.target}({target});")
    for ch in P.charts:
        lines.append(f"  chart {ch.name} {{")
        for fam, lo, hi in ch.bounds:
            if lo is not None:
                lines.append(f"    {fam}: i >= {lo};")
            if hi is not None:
                lines.append(f"    {fam}: i <= {hi};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def bundled_path(name: str = "witt.ipair"):
    return resources.files("isopair") / "data" / name


def load_bundled(name: str = "witt.ipair") -> PairPresentation:
    return parse_pair_spec(bundled_path(name).read_text(encoding="utf-8"))
