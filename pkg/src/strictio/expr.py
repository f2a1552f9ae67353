"""Scalar expressions in the variable ``t``.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' ['-'] INTEGER)?
    atom    := NUMBER | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sin | cos | sqrt | exp

So ``-t^2`` is ``-(t^2)`` and ``2^-1`` is ``0.5``.  Only integer exponents are
accepted; chained powers need parentheses.

Evaluation is polymorphic: the same tree evaluates on floats, numpy arrays
and :class:`~strictio.jets.Jet` objects.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import jets
from .jets import Jet, JetError

__all__ = [
    "ParseError",
    "UnknownIdentifierError",
    "ExprEvalError",
    "Const",
    "Var",
    "NamedConst",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "parse",
    "to_source",
    "evaluate",
    "eval_jet",
    "Expr",
]

FUNCTIONS = ("sin", "cos", "sqrt", "exp")
NAMED_CONSTANTS = {"pi": math.pi}


class ParseError(ValueError):
    """Syntax error; ``offset`` is a byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at byte offset {offset}{detail}")


class UnknownIdentifierError(ParseError):
    pass


class ExprEvalError(JetError):
    """Evaluation failure tagged with the offending node's source offset."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class NamedConst:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"
    pos: int = field(default=0, compare=False)


Node = Union[Const, Var, NamedConst, Neg, BinOp, Pow, Call]


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int  # byte offset


def _tokenize(source: str) -> list[_Tok]:
    out = []
    i = 0
    byte_pos = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", byte_pos,
                             ("number", "identifier", "operator", "'('"))
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            out.append(_Tok(kind, text, byte_pos))
        byte_pos += len(text.encode("utf-8"))
        i = m.end()
    out.append(_Tok("end", "", byte_pos))
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_ATOM_START = ("number", "t", "pi", "sin", "cos", "sqrt", "exp", "'('", "'-'")


class _Parser:
    def __init__(self, source: str):
        self.toks = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> _Tok:
        if self.tok.kind == "op" and self.tok.text == op:
            return self.advance()
        raise ParseError(f"unexpected {self._describe()}", self.tok.pos, (f"'{op}'",))

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else f"token {self.tok.text!r}"

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self._describe()}", self.tok.pos,
                             ("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.pos)
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Neg(self.unary(), op.pos)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                raise ParseError("exponent must be an integer literal", self.tok.pos,
                                 ("integer", "'-'"))
            exp = sign * int(self.advance().text)
            base = Pow(base, exp, op.pos)
            if self.tok.kind == "op" and self.tok.text == "^":
                raise ParseError("chained powers need parentheses", self.tok.pos,
                                 ("'*'", "'/'", "'+'", "'-'", "')'", "end of input"))
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text), tok.pos)
        if tok.kind == "name":
            self.advance()
            if tok.text == "t":
                return Var(tok.pos)
            if tok.text in NAMED_CONSTANTS:
                return NamedConst(tok.text, tok.pos)
            if tok.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(tok.text, arg, tok.pos)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos,
                                         ("t", "pi") + FUNCTIONS)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected {self._describe()}", tok.pos, _ATOM_START)


def parse(source: str) -> Node:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return _Parser(source).parse()


def to_source(node: Node) -> str:
    """Render a tree so that ``parse(to_source(node)) == node``."""
    if isinstance(node, Const):
        if node.value < 0 or math.isnan(node.value) or math.isinf(node.value):
            raise ValueError(f"constant {node.value!r} has no source form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return "t"
    if isinstance(node, NamedConst):
        return node.name
    if isinstance(node, Neg):
        return f"-({to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)})^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_FN = {"sin": jets.sin, "cos": jets.cos, "sqrt": jets.sqrt, "exp": jets.exp}


def _is_scalar_zero(x) -> bool:
    return not isinstance(x, (Jet, np.ndarray)) and x == 0


def evaluate(node: Node, t):
    """Evaluate at ``t`` (float, numpy array or Jet)."""
    if isinstance(node, Const):
        return node.value if not isinstance(t, Jet) else jets.lift_constant(node.value, t.base_point, t.order)
    if isinstance(node, Var):
        return t
    if isinstance(node, NamedConst):
        v = NAMED_CONSTANTS[node.name]
        return v if not isinstance(t, Jet) else jets.lift_constant(v, t.base_point, t.order)
    try:
        if isinstance(node, Neg):
            return -evaluate(node.operand, t)
        if isinstance(node, BinOp):
            lhs = evaluate(node.left, t)
            rhs = evaluate(node.right, t)
            if node.op == "+":
                return lhs + rhs
            if node.op == "-":
                return lhs - rhs
            if node.op == "*":
                return lhs * rhs
            if _is_scalar_zero(rhs):
                raise ExprEvalError("pole at evaluation point", node.pos)
            return lhs / rhs
        if isinstance(node, Pow):
            base = evaluate(node.base, t)
            if isinstance(base, Jet):
                return jets.pow_int(base, node.exponent)
            if node.exponent < 0 and _is_scalar_zero(base):
                raise ExprEvalError("pole at evaluation point", node.pos)
            with np.errstate(divide="ignore"):
                return np.float_power(base, node.exponent) if isinstance(base, np.ndarray) else float(base) ** node.exponent
        if isinstance(node, Call):
            arg = evaluate(node.arg, t)
            if node.fn == "sqrt" and not isinstance(arg, (Jet, np.ndarray)) and arg < 0:
                raise ExprEvalError("sqrt of a negative value", node.pos)
            return _FN[node.fn](arg)
    except ExprEvalError:
        raise
    except JetError as exc:
        raise ExprEvalError(str(exc), node.pos) from exc
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet(node: Node, t0: float, order: int) -> Jet:
    if order == 0:
        return jets.lift_constant(float(evaluate(node, float(t0))), t0, 0)
    return _as_jet(evaluate(node, jets.lift_variable(t0, order)), t0, order)


def _as_jet(v, t0, order) -> Jet:
    return v if isinstance(v, Jet) else jets.lift_constant(v, t0, order)


def is_zero_constant(node: Node) -> bool:
    return isinstance(node, Const) and node.value == 0.0


class Expr:
    """A parsed expression together with its source text."""

    __slots__ = ("source", "ast")

    def __init__(self, source):
        if isinstance(source, Expr):
            self.source, self.ast = source.source, source.ast
            return
        if isinstance(source, (int, float)):
            source = repr(float(source))
        self.source = str(source)
        self.ast = parse(self.source)

    def __call__(self, t):
        v = evaluate(self.ast, t)
        if isinstance(t, np.ndarray) and not isinstance(v, np.ndarray):
            return np.full_like(t, v, dtype=float)
        return v

    def jet(self, t0: float, order: int) -> Jet:
        return eval_jet(self.ast, t0, order)

    @property
    def is_zero(self) -> bool:
        return is_zero_constant(self.ast)

    def __repr__(self) -> str:
        return f"Expr({self.source!r})"
