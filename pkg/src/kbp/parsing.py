"""Surface grammar for formulas.

    atoms       name=k   changes(name)<=k   sent(i,j)   received(i,j)   true   false
    unary       !f   K[i]f   G f   F f   X f
    binary      f & g   f | g   f U g   f -> g

Precedence, tightest first: unary, &, |, U, ->. Implication and until
associate to the right; & and | flatten into one n-ary node. Agent
indices are 1-based in the surface syntax and 0-based in the AST.
`K[self]` is accepted when the caller supplies the owning agent.
"""
from __future__ import annotations

import re

from .errors import FormulaError
from .logic import (And, Always, Bool, ChangesAtMost, Eventually, Formula,
                    Implies, Know, Next, Not, Or, Received, Sent, Until,
                    VarEq)

_TOKEN_RE = re.compile(r"\s*(->|<=|[!&|()\[\],=]|\d+|[A-Za-z_][A-Za-z0-9_]*)")

_KEYWORDS = {"true", "false", "changes", "sent", "received",
             "K", "G", "F", "X", "U", "self"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or not m.group(1):
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaError(f"parse error at column {pos + 1}: "
                               f"unexpected character {stripped[0]!r}")
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, agent_count: int | None, self_agent: int | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.agent_count = agent_count
        self.self_agent = self_agent

    def fail(self, message: str) -> FormulaError:
        col = self.tokens[self.i][1] + 1 if self.i < len(self.tokens) else len(self.text) + 1
        return FormulaError(f"parse error at column {col}: {message}")

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise self.fail(f"expected {expected!r}, found end of input"
                            if expected else "unexpected end of input")
        if expected is not None and tok != expected:
            raise self.fail(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek() is not None:
            raise self.fail(f"unexpected trailing token {self.peek()!r}")
        return f

    def implies(self) -> Formula:
        left = self.until()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def until(self) -> Formula:
        left = self.disj()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        if len(parts) == 1:
            return parts[0]
        flat: list[Formula] = []
        for p in parts:
            flat.extend(p.args if isinstance(p, Or) else (p,))
        return Or(tuple(flat))

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        if len(parts) == 1:
            return parts[0]
        flat: list[Formula] = []
        for p in parts:
            flat.extend(p.args if isinstance(p, And) else (p,))
        return And(tuple(flat))

    def agent_index(self) -> int:
        tok = self.take()
        if tok == "self":
            if self.self_agent is None:
                raise self.fail("'self' is only allowed inside a program guard")
            return self.self_agent
        if not tok.isdigit():
            raise self.fail(f"expected an agent index, found {tok!r}")
        idx = int(tok) - 1
        if idx < 0 or (self.agent_count is not None and idx >= self.agent_count):
            raise self.fail(f"agent index {tok} out of range")
        return idx

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "K":
            self.take()
            self.take("[")
            agent = self.agent_index()
            self.take("]")
            return Know(agent, self.unary())
        if tok == "G":
            self.take()
            return Always(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        return self.atom()

    def number(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise self.fail(f"expected a number, found {tok!r}")
        return int(tok)

    def atom(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise self.fail("unexpected end of input")
        if tok == "(":
            self.take()
            f = self.implies()
            self.take(")")
            return f
        if tok == "true":
            self.take()
            return Bool(True)
        if tok == "false":
            self.take()
            return Bool(False)
        if tok == "changes":
            self.take()
            self.take("(")
            name = self.take()
            self.take(")")
            self.take("<=")
            return ChangesAtMost(name, self.number())
        if tok in ("sent", "received"):
            self.take()
            self.take("(")
            a = self.agent_index()
            self.take(",")
            b = self.agent_index()
            self.take(")")
            return Sent(a, b) if tok == "sent" else Received(a, b)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in _KEYWORDS:
            self.take()
            self.take("=")
            return VarEq(tok, self.number())
        raise self.fail(f"unexpected token {tok!r}")


def parse_formula(text: str, agent_count: int | None = None,
                  self_agent: int | None = None) -> Formula:
    """Parse a formula string; see the module docstring for the grammar."""
    return _Parser(text, agent_count, self_agent).parse()


_PREC = {"implies": 1, "until": 2, "or": 3, "and": 4, "unary": 5, "atom": 6}


def _prec(f: Formula) -> int:
    if isinstance(f, Implies):
        return _PREC["implies"]
    if isinstance(f, Until):
        return _PREC["until"]
    if isinstance(f, Or):
        return _PREC["or"]
    if isinstance(f, And):
        return _PREC["and"]
    if isinstance(f, (Not, Know, Always, Eventually, Next)):
        return _PREC["unary"]
    return _PREC["atom"]


def _wrap(f: Formula, minimum: int) -> str:
    s = unparse_formula(f)
    return f"({s})" if _prec(f) < minimum else s


def unparse_formula(f: Formula) -> str:
    """Render a formula; parse_formula inverts this rendering."""
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    if isinstance(f, VarEq):
        return f"{f.name}={f.value}"
    if isinstance(f, ChangesAtMost):
        return f"changes({f.name})<={f.bound}"
    if isinstance(f, Sent):
        return f"sent({f.agent + 1},{f.dest + 1})"
    if isinstance(f, Received):
        return f"received({f.agent + 1},{f.source + 1})"
    if isinstance(f, Not):
        return "!" + _wrap(f.arg, _PREC["unary"])
    if isinstance(f, Know):
        return f"K[{f.agent + 1}]" + _wrap(f.body, _PREC["unary"])
    if isinstance(f, Always):
        return "G " + _wrap(f.body, _PREC["unary"])
    if isinstance(f, Eventually):
        return "F " + _wrap(f.body, _PREC["unary"])
    if isinstance(f, Next):
        return "X " + _wrap(f.body, _PREC["unary"])
    if isinstance(f, And):
        return " & ".join(_wrap(a, _PREC["unary"]) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_wrap(a, _PREC["and"]) for a in f.args)
    if isinstance(f, Until):
        # right operand keeps equal precedence: U associates right
        return _wrap(f.left, _PREC["or"]) + " U " + _wrap(f.right, _PREC["until"])
    if isinstance(f, Implies):
        return _wrap(f.left, _PREC["until"]) + " -> " + _wrap(f.right, _PREC["implies"])
    raise FormulaError(f"cannot render {f!r}")
