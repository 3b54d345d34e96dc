"""Tokenizer and recursive-descent expression parser shared by the text formats.

The parser produces a small tuple-based AST which callers evaluate in whatever
algebra they need (rational functions, index polynomials, operators).

AST nodes::

    ("num", Fraction)          ("var", name)
    ("neg", x)                 ("add"|"sub"|"mul"|"div", x, y)
    ("pow", x, int)            ("call", name, [args])
    ("bracket", x, y)          # [x, y]
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

__all__ = ["ParseError", "Token", "tokenize", "ExprParser", "parse_expr", "evaluate"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op", "end"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>>=|<=|\*\*|[-+*/^()\[\],;:{}|=])"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("int", "ident", "op"):
            tok = m.group()
            if tok == "**":
                tok = "^"
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


class ExprParser:
    """Precedence-climbing parser over a token list.

    ``calls`` names identifiers that may be applied to arguments, e.g. the
    families ``e``/``f``; every other identifier is a variable.
    """

    def __init__(self, tokens: list[Token], calls: frozenset[str] | set[str] = frozenset(),
                 brackets: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.calls = set(calls)
        self.brackets = brackets

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.line, self.tok.col)
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise ParseError(f"expected identifier, found {found!r}", self.tok.line, self.tok.col)
        return self.advance()

    def expect_int(self, signed: bool = True) -> int:
        sign = 1
        if signed and (self.at("-") or self.at("+")):
            sign = -1 if self.advance().text == "-" else 1
        if self.tok.kind != "int":
            found = self.tok.text or "end of input"
            raise ParseError(f"expected integer, found {found!r}", self.tok.line, self.tok.col)
        return sign * int(self.advance().text)

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    # grammar
    def sum(self):
        node = self.product()
        while self.at("+") or self.at("-"):
            op = "add" if self.advance().text == "+" else "sub"
            node = (op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = "mul" if self.advance().text == "*" else "div"
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.at("-"):
            self.advance()
            return ("neg", self.unary())
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.at("^"):
            self.advance()
            node = ("pow", node, self.expect_int(signed=False))
        return node

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return ("num", Fraction(int(tok.text)))
        if tok.kind == "ident":
            self.advance()
            if tok.text in self.calls and self.at("("):
                self.advance()
                args = [self.sum()]
                while self.at(","):
                    self.advance()
                    args.append(self.sum())
                self.expect(")")
                return ("call", tok.text, args)
            return ("var", tok.text)
        if self.at("("):
            open_tok = self.advance()
            node = self.sum()
            if not self.at(")"):
                raise ParseError("unbalanced parenthesis", open_tok.line, open_tok.col)
            self.advance()
            return node
        if self.brackets and self.at("["):
            open_tok = self.advance()
            left = self.sum()
            self.expect(",")
            right = self.sum()
            if not self.at("]"):
                raise ParseError("unbalanced bracket", open_tok.line, open_tok.col)
            self.advance()
            return ("bracket", left, right)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.line, tok.col)


def parse_expr(text: str, calls=frozenset(), brackets: bool = False):
    """Parse a complete expression string into an AST."""
    parser = ExprParser(tokenize(text), calls, brackets)
    node = parser.sum()
    if parser.tok.kind != "end":
        raise parser.error(f"unexpected trailing {parser.tok.text!r}")
    return node


def evaluate(node, variables: dict, number=lambda q: q, call=None, bracket=None):
    """Evaluate an AST; ``variables`` maps names to algebra elements."""

    def ev(x):
        kind = x[0]
        if kind == "num":
            return number(x[1])
        if kind == "var":
            if x[1] not in variables:
                raise KeyError(x[1])
            return variables[x[1]]
        if kind == "neg":
            return -ev(x[1])
        if kind == "add":
            return ev(x[1]) + ev(x[2])
        if kind == "sub":
            return ev(x[1]) - ev(x[2])
        if kind == "mul":
            return ev(x[1]) * ev(x[2])
        if kind == "div":
            return ev(x[1]) / ev(x[2])
        if kind == "pow":
            base = ev(x[1])
            out = number(Fraction(1))
            for _ in range(x[2]):
                out = out * base
            return out
        if kind == "call":
            if call is None:
                raise KeyError(x[1])
            return call(x[1], [ev(a) for a in x[2]])
        if kind == "bracket":
            if bracket is None:
                raise KeyError("[,]")
            return bracket(ev(x[1]), ev(x[2]))
        raise AssertionError(kind)

    return ev(node)
