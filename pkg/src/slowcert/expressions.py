"""A deliberately tiny infix expression grammar for user-defined fields.

Supported: + - * / ^ (right-associative power), unary minus, parentheses,
numeric literals, the constants pi and e, the one-argument functions
sin cos tan exp log sqrt tanh abs, and the variables x1..xn, t, tau1..taud.
No conditionals: piecewise needs are served by the built-in examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ExpressionError, NumericalError

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "tanh": math.tanh,
    "abs": abs,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "lparen" | "rparen" | "comma" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_e = False
            while j < n and (
                text[j].isdigit()
                or text[j] == "."
                or (text[j] in "eE" and not seen_e and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-"))
                or (text[j] in "+-" and j > i and text[j - 1] in "eE" and seen_e)
            ):
                if text[j] in "eE":
                    seen_e = True
                j += 1
            frag = text[i:j]
            try:
                float(frag)
            except ValueError:
                raise ExpressionError(f"bad numeric literal {frag!r}", i) from None
            tokens.append(_Token("num", frag, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        if ch == ",":
            tokens.append(_Token("comma", ch, i))
            i += 1
            continue
        raise ExpressionError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    """Recursive descent over: expr -> term (+|- term)*, term -> unary (*|/ unary)*,
    unary -> - unary | power, power -> atom (^ unary)?."""

    def __init__(self, tokens: list[_Token], variables: tuple[str, ...]):
        self.tokens = tokens
        self.k = 0
        self.variables = variables

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def next(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ExpressionError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.term()
            node = (op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            rhs = self.unary()
            node = (op, node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            return ("neg", self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.next()
            return ("^", base, self.unary())
        return base

    def atom(self):
        tok = self.next()
        if tok.kind == "num":
            return ("const", float(tok.text))
        if tok.kind == "lparen":
            node = self.expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "name":
            name = tok.text
            if self.peek().kind == "lparen":
                if name not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {name!r}", tok.pos)
                self.next()
                args = [self.expr()]
                while self.peek().kind == "comma":
                    self.next()
                    args.append(self.expr())
                self.expect("rparen", "')'")
                if len(args) != 1:
                    raise ExpressionError(
                        f"function {name!r} takes 1 argument, got {len(args)}", tok.pos
                    )
                return ("call", name, args[0])
            if name in CONSTANTS:
                return ("const", CONSTANTS[name])
            if name in self.variables:
                return ("var", self.variables.index(name))
            raise ExpressionError(f"unknown identifier {name!r}", tok.pos)
        raise ExpressionError(
            f"expected a value, found {tok.text or 'end of input'!r}", tok.pos
        )


def _compile(node):
    kind = node[0]
    if kind == "const":
        c = node[1]
        return lambda env: c
    if kind == "var":
        i = node[1]
        return lambda env: env[i]
    if kind == "neg":
        f = _compile(node[1])
        return lambda env: -f(env)
    if kind == "call":
        fn = FUNCTIONS[node[1]]
        f = _compile(node[2])
        return lambda env: fn(f(env))
    a = _compile(node[1])
    b = _compile(node[2])
    if kind == "+":
        return lambda env: a(env) + b(env)
    if kind == "-":
        return lambda env: a(env) - b(env)
    if kind == "*":
        return lambda env: a(env) * b(env)
    if kind == "/":
        return lambda env: a(env) / b(env)
    if kind == "^":
        return lambda env: a(env) ** b(env)
    raise AssertionError(f"unreachable node kind {kind!r}")


@dataclass(frozen=True)
class Expression:
    """A parsed expression; call with the environment vector of its variables."""

    source: str
    variables: tuple[str, ...]
    _fn: object

    def __call__(self, *values: float) -> float:
        if len(values) != len(self.variables):
            raise ExpressionError(
                f"expression over {self.variables} got {len(values)} values", 0
            )
        try:
            out = float(self._fn(values))
        except (ValueError, ZeroDivisionError, OverflowError) as err:
            raise NumericalError(
                f"expression {self.source!r} failed at {values!r}: {err}"
            ) from err
        if not math.isfinite(out):
            raise NumericalError(
                f"expression {self.source!r} returned {out!r} at {values!r}"
            )
        return out


def state_variables(dim_state: int, dim_param: int) -> tuple[str, ...]:
    """The documented variable set: x1..xn, then t, then tau1..taud."""
    return tuple(
        [f"x{i + 1}" for i in range(dim_state)]
        + ["t"]
        + [f"tau{j + 1}" for j in range(dim_param)]
    )


def parse_expression(
    text: str,
    dim_state: int = 0,
    dim_param: int = 0,
    variables: tuple[str, ...] | None = None,
) -> Expression:
    """Parse an expression over x1..xn, t, tau1..taud (or an explicit variable set).

    The parse is total on the grammar; unknown identifiers, syntax errors,
    and wrong function arity are rejected with their character position.
    """
    if variables is None:
        variables = state_variables(dim_state, dim_param)
    node = _Parser(_tokenize(text), tuple(variables)).parse()
    return Expression(source=text, variables=tuple(variables), _fn=_compile(node))
