"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := NUMBER | IDENT | KERNEL '(' expr ')' | '(' expr ')' | '-' base

A NUMBER is a decimal (``1.25``) or a ratio literal (``3/4``, one token).
Unary minus binds looser than '^', so ``-x^2`` is ``-(x^2)``.
"""

import re
from fractions import Fraction

from .expand import expand
from .nodes import KERNELS, MINUS_ONE, Num, Sym, add, fn, mul, neg, power


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__("%s at offset %d" % (message, offset))
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character %r" % text[pos], pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind == "end":
            raise ParseError("expected %r" % value, off)

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return terms[0] if len(terms) == 1 else add(*terms)

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            f = self.factor()
            factors.append(f if op == "*" else power(f, MINUS_ONE))
        return factors[0] if len(factors) == 1 else mul(*factors)

    def factor(self):
        base = self.base()
        if self.peek() == ("op", "^", self.peek()[2]):
            self.take()
            return power(base, self.factor())
        return base

    def base(self):
        kind, val, off = self.take()
        if kind == "num":
            if "/" in val:
                a, b = val.split("/")
                if int(b) == 0:
                    raise ParseError("zero denominator", off)
                return Num(Fraction(int(a), int(b)))
            return Num(Fraction(val))
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in KERNELS:
                    raise ParseError("unknown kernel %r" % val, off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return fn(val, arg)
            if val in KERNELS:
                raise ParseError("kernel %r needs an argument" % val, off)
            return Sym(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "op" and val == "-":
            # '-' applies to a whole factor so that -x^2 means -(x^2)
            return neg(self.factor())
        if kind == "end":
            raise ParseError("unexpected end of input", off)
        raise ParseError("unexpected token %r" % val, off)


def parse(text):
    p = _Parser(text)
    e = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ParseError("unexpected token %r" % val, off)
    return expand(e)
