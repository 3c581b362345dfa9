"""One lexer, three grammar entry points.

The surface syntax is shared: integers, + - * /, parentheses, ^ with an
integer literal exponent, and unary minus. The `hyper_term` kind knows `W`
(the canonical infinite element) and the sugar `eps` = 1/W; the `sequence`
kind knows `n`, `altsign`, `geom(r)` and `patch[(i,v),...]{...}`; the
`function` kind knows `x` and the transcendental calls. Everything else is
a positioned syntax error.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError
from .expressions import (
    Add,
    AltSign,
    Call,
    Const,
    Div,
    FUNCTIONS,
    Geom,
    Mul,
    Neg,
    Node,
    Patch,
    Pow,
    Sub,
    Var,
)

HYPER_TERM = "hyper_term"
SEQUENCE = "sequence"
FUNCTION = "function"
FILTER_FAMILY = "filter_family"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^()\[\]{},=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", span=(pos, pos + 1)
            )
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append(Token(m.lastgroup, m.group(), m.start(), m.end()))
    tokens.append(Token("eof", "", len(text), len(text)))
    return tokens


@dataclass
class ParsedInput:
    kind: str
    ast: Node
    source: str
    spans: dict = field(default_factory=dict)

    def span_of(self, node):
        return self.spans.get(id(node))


_VARIABLE_HINTS = {
    "n": "the sequence grammar",
    "x": "the function grammar",
    "W": "the hyperreal-term grammar",
    "eps": "the hyperreal-term grammar",
    "altsign": "the sequence grammar",
    "geom": "the sequence grammar",
    "patch": "the sequence grammar",
}


class _Parser:
    def __init__(self, text, kind, env_names=()):
        self.text = text
        self.kind = kind
        self.env_names = frozenset(env_names)
        self.tokens = tokenize(text)
        self.pos = 0
        self.spans = {}

    # -- token plumbing ----------------------------------------------------

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.peek()
        if tok.text != text:
            raise ParseError(
                f"expected {text!r}, found {tok.text or 'end of input'!r}",
                span=(tok.start, tok.end),
            )
        return self.advance()

    def _note(self, node, start, end):
        self.spans[id(node)] = (start, end)
        return node

    # -- grammar -----------------------------------------------------------

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(
                f"unexpected trailing input {tok.text!r}",
                span=(tok.start, tok.end),
            )
        return node

    def expr(self):
        start = self.peek().start
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.advance()
            right = self.term()
            cls = Add if op.text == "+" else Sub
            node = self._note(cls(node, right), start, self._end_of(right))
        return node

    def term(self):
        start = self.peek().start
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.advance()
            right = self.factor()
            if op.text == "/" and isinstance(node, Const) and isinstance(right, Const):
                if right.value != 0:
                    node = self._note(
                        Const(node.value / right.value), start, self._end_of(right)
                    )
                    continue
            cls = Mul if op.text == "*" else Div
            node = self._note(cls(node, right), start, self._end_of(right))
        return node

    def factor(self):
        tok = self.peek()
        if tok.text == "-":
            self.advance()
            inner = self.factor()
            if isinstance(inner, Const):
                return self._note(Const(-inner.value), tok.start, self._end_of(inner))
            return self._note(Neg(inner), tok.start, self._end_of(inner))
        if tok.text == "+":
            self.advance()
            return self.factor()
        return self.power()

    def power(self):
        start = self.peek().start
        node = self.atom()
        while self.peek().text in ("^", "**"):
            self.advance()
            sign = 1
            if self.peek().text == "-":
                self.advance()
                sign = -1
            tok = self.peek()
            if tok.kind != "int":
                raise ParseError(
                    "exponents must be integer literals",
                    span=(tok.start, tok.end),
                )
            self.advance()
            node = self._note(Pow(node, sign * int(tok.text)), start, tok.end)
        return node

    def atom(self):
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return self._note(Const(Fraction(int(tok.text))), tok.start, tok.end)
        if tok.text == "(":
            self.advance()
            node = self.expr()
            end = self.expect(")").end
            self.spans[id(node)] = (tok.start, end)
            return node
        if tok.kind == "ident":
            return self.name(self.advance())
        raise ParseError(
            f"expected a value, found {tok.text or 'end of input'!r}",
            span=(tok.start, tok.end),
        )

    def name(self, tok):
        text = tok.text
        if self.kind == HYPER_TERM:
            if text == "W":
                return self._note(Var("W"), tok.start, tok.end)
            if text == "eps":
                node = Div(Const(Fraction(1)), Var("W"))
                return self._note(node, tok.start, tok.end)
            if text in self.env_names:
                return self._note(Var(text), tok.start, tok.end)
        elif self.kind == SEQUENCE:
            if text == "n":
                return self._note(Var("n"), tok.start, tok.end)
            if text == "altsign":
                return self._note(AltSign(), tok.start, tok.end)
            if text == "geom":
                return self.geom(tok)
            if text == "patch":
                return self.patch(tok)
        elif self.kind == FUNCTION:
            if text == "x":
                return self._note(Var("x"), tok.start, tok.end)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                end = self.expect(")").end
                return self._note(Call(text, arg), tok.start, end)
        hint = _VARIABLE_HINTS.get(text)
        if hint is not None:
            raise ParseError(
                f"{text!r} belongs to {hint}, not to {self.kind} input",
                span=(tok.start, tok.end),
            )
        raise ParseError(f"unknown name {text!r}", span=(tok.start, tok.end))

    def geom(self, tok):
        self.expect("(")
        value, _span = self.const_expr()
        end = self.expect(")").end
        if value <= 0:
            raise ParseError(
                "geometric ratios must be positive rationals",
                span=(tok.start, end),
            )
        return self._note(Geom(value), tok.start, end)

    def patch(self, tok):
        self.expect("[")
        entries = []
        while True:
            self.expect("(")
            idx_tok = self.peek()
            if idx_tok.kind != "int":
                raise ParseError(
                    "patch indices must be natural number literals",
                    span=(idx_tok.start, idx_tok.end),
                )
            self.advance()
            self.expect(",")
            value, _span = self.const_expr()
            self.expect(")")
            entries.append((int(idx_tok.text), value))
            if self.peek().text == ",":
                self.advance()
                continue
            break
        self.expect("]")
        self.expect("{")
        base = self.expr()
        end = self.expect("}").end
        seen = set()
        for idx, _v in entries:
            if idx in seen:
                raise ParseError(
                    f"duplicate patch index {idx}", span=(tok.start, end)
                )
            seen.add(idx)
        node = Patch(tuple(sorted(entries)), base)
        return self._note(node, tok.start, end)

    def const_expr(self):
        start = self.peek().start
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.advance()
            right = self.factor()
            if not (isinstance(node, Const) and isinstance(right, Const)):
                break
            if op.text == "/":
                if right.value == 0:
                    raise ParseError("division by zero", span=(start, self._end_of(right)))
                node = Const(node.value / right.value)
            else:
                node = Const(node.value * right.value)
        end = self.peek().start
        if not isinstance(node, Const):
            raise ParseError(
                "expected a rational constant", span=(start, end)
            )
        return node.value, (start, end)

    def _end_of(self, node):
        span = self.spans.get(id(node))
        return span[1] if span else self.peek().start


def parse(kind, text, env_names=()) -> ParsedInput:
    """Parse text under one of the three grammars (or a filter family as
    JSON via kind "filter_family", handled by the CLI)."""
    if kind not in (HYPER_TERM, SEQUENCE, FUNCTION):
        raise ValueError(f"unknown grammar kind {kind!r}")
    if not text.strip():
        raise ParseError("empty input", span=(0, 0))
    p = _Parser(text, kind, env_names)
    ast = p.parse()
    return ParsedInput(kind, ast, text, p.spans)
