"""Expression language for metric components and scenario data.

Metric entries are supplied as text like ``"1 + 0.1*sin(t)*cos(2*x1)"`` and
evaluated over jet arithmetic, so scenario files stay data.  The grammar is
a conventional arithmetic one:

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?        exponent is a literal constant
    atom     := NUMBER | 'pi' | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

There is no implicit multiplication ("2x" is a syntax error).  Known
functions are exp, log, sin, cos, sqrt (one argument) and the smooth cutoff
plateau(u, a, b) which is identically 1 for u <= a and identically 0 for
u >= b, built from the standard exp(-1/u) bump.  Unknown function names are
rejected at parse time; unknown variables are rejected at evaluation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .jets import Jet

__all__ = [
    "ParseError",
    "EvalError",
    "Num",
    "Var",
    "Pi",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "to_text",
    "eval_jet",
    "eval_float",
    "plateau_jet",
    "plateau_float",
    "FUNCTIONS",
]


class ParseError(ValueError):
    """Syntax error with byte offset and the set of expected items."""

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        text = f"{message} at offset {offset}"
        if expected:
            text += " (expected " + " or ".join(expected) + ")"
        super().__init__(text)


class EvalError(ValueError):
    """Evaluation-time failure, e.g. a variable missing from the environment."""


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1, "plateau": 3}


# -- tokenizer ----------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = set("+-*/^(),")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append((c, c, i))
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(("num", float(m.group()), i))
            i = m.end()
            continue
        m = _NAME.match(text, i)
        if m:
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        raise ParseError(f"unrecognized character {c!r}", i)
    tokens.append(("eof", None, n))
    return tokens


# -- parser -------------------------------------------------------------------

_OPERAND_EXPECTED = ("number", "variable", "function call", "'('")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2], (what,))
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(
                f"unexpected token {tok[1]!r}", tok[2], ("operator", "end of input")
            )
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self):
        sign = 1.0
        if self.peek()[0] == "-":
            self.advance()
            sign = -1.0
        tok = self.peek()
        if tok[0] != "num":
            raise ParseError(
                "exponent must be a literal constant", tok[2], ("number",)
            )
        self.advance()
        return Num(sign * tok[1])

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.advance()
            return Num(tok[1])
        if tok[0] == "(":
            self.advance()
            node = self.expr()
            self.expect(")", "')'")
            return node
        if tok[0] == "name":
            self.advance()
            if self.peek()[0] == "(":
                if tok[1] not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok[1]!r}", tok[2])
                self.advance()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")", "')'")
                arity = FUNCTIONS[tok[1]]
                if len(args) != arity:
                    raise ParseError(
                        f"{tok[1]} takes {arity} argument(s), got {len(args)}", tok[2]
                    )
                return Call(tok[1], tuple(args))
            if tok[1] == "pi":
                return Pi()
            return Var(tok[1])
        raise ParseError("expected operand", tok[2], _OPERAND_EXPECTED)


def parse(text):
    """Parse expression text into an AST; raises :class:`ParseError`."""
    return _Parser(text).parse()


# -- printer ------------------------------------------------------------------

_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2}


def _print(node, parent_level):
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = _print(node.arg, 3)
        text = "-" + inner
        return f"({text})" if parent_level > 2 else text
    if isinstance(node, Call):
        return node.name + "(" + ", ".join(_print(a, 0) for a in node.args) + ")"
    if isinstance(node, BinOp):
        if node.op == "^":
            base = _print(node.left, 4)
            text = f"{base}^{node.right.value!r}"
            return f"({text})" if parent_level > 3 else text
        level = _LEVEL[node.op]
        left = _print(node.left, level)
        # right operand of - and / needs the strictly higher level
        right = _print(node.right, level + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if parent_level > level else text
    raise TypeError(f"not an expression node: {node!r}")


def to_text(ast):
    """Render an AST back to parseable text; parse(to_text(a)) == a."""
    return _print(ast, 0)


# -- evaluation ---------------------------------------------------------------


def _as_constant(x, what):
    if isinstance(x, Jet):
        if np.max(np.abs(x.coeffs[..., 1:])) != 0.0:
            raise EvalError(f"{what} must be a constant")
        v = np.asarray(x.value)
        if v.ndim > 0:
            v = v.reshape(-1)
            if v.size == 0 or np.any(v != v[0]):
                raise EvalError(f"{what} must be a single constant")
            return float(v[0])
        return float(v)
    return float(x)


def plateau_float(u, a, b):
    """Smooth cutoff: 1 for u <= a, 0 for u >= b, exp(-1/x) bump in between."""
    if not a < b:
        raise EvalError("plateau needs a < b")
    if u <= a:
        return 1.0
    if u >= b:
        return 0.0
    s = (b - u) / (b - a)
    beta = math.exp(-1.0 / s)
    beta_c = math.exp(-1.0 / (1.0 - s))
    return beta / (beta + beta_c)


def _plateau_interior(u, a, b):
    s = (b - u) * (1.0 / (b - a))
    beta = (-1.0 / s).exp()
    beta_c = (-1.0 / (1.0 - s)).exp()
    return beta / (beta + beta_c)


def plateau_jet(u, a, b):
    """Jet of the plateau cutoff at the base point of ``u``.

    The cutoff parameters must be constants.  On the flat stretches all
    derivatives vanish identically; the smooth-join points t = a, b belong to
    the flat side, where the one-sided jets agree.
    """
    a = _as_constant(a, "plateau cutoff")
    b = _as_constant(b, "plateau cutoff")
    if not a < b:
        raise EvalError("plateau needs a < b")
    if not isinstance(u, Jet):
        return plateau_float(float(u), a, b)
    u0 = np.asarray(u.value)
    if u0.ndim == 0:
        if u0 <= a:
            return Jet.constant(u.space, 1.0)
        if u0 >= b:
            return Jet.constant(u.space, 0.0)
        return _plateau_interior(u, a, b)
    out = np.zeros_like(u.coeffs)
    out[..., 0] = np.where(u0 <= a, 1.0, 0.0)
    interior = (u0 > a) & (u0 < b)
    if np.any(interior):
        sub = Jet(u.space, u.coeffs[interior])
        out[interior] = _plateau_interior(sub, a, b).coeffs
    return Jet(u.space, out)


def eval_jet(ast, env):
    """Evaluate an AST over the jet-valued environment ``env``.

    The environment maps variable names to jets (all sharing one space).
    Works equally over any scalar type implementing the jet arithmetic
    surface, e.g. :class:`weyltrans.jets.GradJet`.
    """
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Pi):
        return math.pi
    if isinstance(ast, Var):
        try:
            return env[ast.name]
        except KeyError:
            raise EvalError(f"unknown variable {ast.name!r}") from None
    if isinstance(ast, Neg):
        return -eval_jet(ast.arg, env)
    if isinstance(ast, BinOp):
        left = eval_jet(ast.left, env)
        if ast.op == "^":
            c = ast.right.value
            if isinstance(left, (int, float)):
                return left**c
            if float(c).is_integer():
                return left ** int(c)
            return left.powf(c)
        right = eval_jet(ast.right, env)
        if ast.op == "+":
            return left + right
        if ast.op == "-":
            return left - right
        if ast.op == "*":
            return left * right
        return left / right
    if isinstance(ast, Call):
        args = [eval_jet(a, env) for a in ast.args]
        if ast.name == "plateau":
            return plateau_jet(*args)
        if isinstance(args[0], (int, float)):
            return _FLOAT_FUNCS[ast.name](args[0])
        return getattr(args[0], ast.name)()
    raise TypeError(f"not an expression node: {ast!r}")


_FLOAT_FUNCS = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
}


def eval_float(ast, env):
    """Plain floating evaluation, used as the independent cross-check path."""
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Pi):
        return math.pi
    if isinstance(ast, Var):
        try:
            return float(env[ast.name])
        except KeyError:
            raise EvalError(f"unknown variable {ast.name!r}") from None
    if isinstance(ast, Neg):
        return -eval_float(ast.arg, env)
    if isinstance(ast, BinOp):
        left = eval_float(ast.left, env)
        if ast.op == "^":
            return left ** ast.right.value
        right = eval_float(ast.right, env)
        if ast.op == "+":
            return left + right
        if ast.op == "-":
            return left - right
        if ast.op == "*":
            return left * right
        return left / right
    if isinstance(ast, Call):
        args = [eval_float(a, env) for a in ast.args]
        if ast.name == "plateau":
            return plateau_float(*args)
        return _FLOAT_FUNCS[ast.name](args[0])
    raise TypeError(f"not an expression node: {ast!r}")


# -- AST utilities -------------------------------------------------------------


def substitute(ast, mapping):
    """Replace variables by AST fragments (used for chart shifts and t=0 slices)."""
    if isinstance(ast, Var) and ast.name in mapping:
        return mapping[ast.name]
    if isinstance(ast, Neg):
        return Neg(substitute(ast.arg, mapping))
    if isinstance(ast, BinOp):
        return BinOp(ast.op, substitute(ast.left, mapping), substitute(ast.right, mapping))
    if isinstance(ast, Call):
        return Call(ast.name, tuple(substitute(a, mapping) for a in ast.args))
    return ast
