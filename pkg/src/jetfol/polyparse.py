"""Parser for the polynomial strings used in model and data files.

Grammar (whitespace ignored)::

    poly   := ["+"|"-"] term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := NUMBER ["/" NUMBER] | NAME ["^" NUMBER]

Juxtaposition is not multiplication: ``ab`` is the single name ``ab``.
The parser only builds a list of terms; evaluating them is up to the caller
(a graded algebra, or commutative polynomials for jets).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}: {text!r}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Term:
    coefficient: Fraction
    factors: tuple  # of (name, exponent) in written order


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^":
                raise PolynomialSyntaxError(f"unexpected character {ch!r}", text, start)
            tokens.append((ch, ch, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def parse_polynomial(text: str) -> list[Term]:
    if not isinstance(text, str):
        raise TypeError(f"polynomial must be a string, got {type(text).__name__}")
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos]

    def take(kind):
        nonlocal pos
        tok = tokens[pos]
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise PolynomialSyntaxError(f"expected {kind}, found {found}", text, tok[2])
        pos += 1
        return tok

    def factor():
        nonlocal pos
        tok = peek()
        if tok[0] == "num":
            pos += 1
            value = Fraction(tok[1])
            if peek()[0] == "/":
                pos += 1
                den = take("num")
                if den[1] == 0:
                    raise PolynomialSyntaxError("division by zero", text, den[2])
                value /= den[1]
            return value, None
        if tok[0] == "name":
            pos += 1
            exp = 1
            if peek()[0] == "^":
                pos += 1
                exp = take("num")[1]
            return None, (tok[1], exp)
        found = "end of input" if tok[0] == "end" else repr(tok[1])
        raise PolynomialSyntaxError(f"expected a number or a name, found {found}", text, tok[2])

    def term(sign):
        nonlocal pos
        coeff = Fraction(sign)
        names = []
        while True:
            c, f = factor()
            if c is not None:
                coeff *= c
            else:
                names.append(f)
            if peek()[0] != "*":
                break
            pos += 1
        return Term(coeff, tuple(names))

    terms = []
    sign = 1
    if peek()[0] in "+-":
        sign = -1 if take(peek()[0])[1] == "-" else 1
    terms.append(term(sign))
    while peek()[0] in ("+", "-"):
        sign = -1 if take(peek()[0])[1] == "-" else 1
        terms.append(term(sign))
    if peek()[0] != "end":
        tok = peek()
        raise PolynomialSyntaxError(f"unexpected {tok[1]!r}", text, tok[2])
    return terms
