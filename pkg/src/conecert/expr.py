"""Expression language for nonlinearities f(u) and f_i(u, v).

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names ``u`` and ``v`` are the state variables, ``pi`` and ``e`` are constants,
``sin cos exp log sqrt abs`` are functions; any other name is a parameter
whose value is supplied at evaluation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

from . import interval as iv
from .interval import DomainError, Interval

VARIABLES = ("u", "v")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


class ArityError(ParseError):
    pass


class UnboundParameterError(KeyError):
    def __str__(self):
        return f"unbound parameter {self.args[0]!r}"


# --------------------------------------------------------------------------
# syntax tree


class Node:
    """Base class of expression nodes. Nodes are immutable and compare structurally."""

    def children(self) -> tuple[Node, ...]:
        return ()

    def walk(self) -> Iterator[Node]:
        yield self
        for child in self.children():
            yield from child.walk()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Param(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def children(self):
        return (self.arg,)


Expr = Node


def variables(expr: Expr) -> tuple[str, ...]:
    """State variables referenced by ``expr``, in canonical order."""
    used = {n.name for n in expr.walk() if isinstance(n, Var)}
    return tuple(v for v in VARIABLES if v in used)


def parameters(expr: Expr) -> tuple[str, ...]:
    return tuple(sorted({n.name for n in expr.walk() if isinstance(n, Param)}))


# --------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.tok
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            is_call = self.tok[0] == "op" and self.tok[1] == "("
            if val in FUNCTIONS:
                if not is_call:
                    raise ParseError(f"function {val!r} needs an argument list", pos)
                return Call(val, self.arguments(val, pos))
            if is_call:
                raise ParseError(f"unknown function {val!r}", pos)
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            return Param(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)

    def arguments(self, name: str, pos: int) -> Node:
        self.expect("(")
        args = []
        if not (self.tok[0] == "op" and self.tok[1] == ")"):
            args.append(self.expr())
            while self.tok[0] == "op" and self.tok[1] == ",":
                self.take()
                args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ArityError(f"{name} takes 1 argument, got {len(args)}", pos)
        return args[0]


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    >>> to_text(parse("lambda*u^2"))
    'lambda * u ^ 2'
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _num_text(x: float) -> str:
    if x.is_integer() and x < 1e16:
        return str(int(x))
    return repr(x)


def to_text(node: Node) -> str:
    """Render with the minimal parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        s = _num_text(abs(node.value))
        return f"(-{s})" if math.copysign(1.0, node.value) < 0 else s
    if isinstance(node, (Var, Param, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < 3 or inner.startswith("-"):
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) < 5:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


# --------------------------------------------------------------------------
# point evaluation


def _lookup(name: str, params: Mapping[str, float]) -> float:
    try:
        return float(params[name])
    except KeyError:
        raise UnboundParameterError(name) from None


def _real_pow(a: float, b: float) -> float:
    if a < 0.0 and not float(b).is_integer():
        raise DomainError(f"negative base {a!r} to non-integer power {b!r}")
    if a == 0.0 and b < 0.0:
        raise DomainError("zero to a negative power")
    try:
        return float(a**b)
    except OverflowError:
        return math.inf if a > 0 or float(b) % 2 == 0 else -math.inf


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log(x: float) -> float:
    if x <= 0.0:
        raise DomainError(f"log of non-positive value {x!r}")
    return math.log(x)


def _sqrt(x: float) -> float:
    if x < 0.0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


_POINT_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": abs,
}


def evaluate(expr: Expr, point: Mapping[str, float], params: Mapping[str, float] | None = None) -> float:
    """Evaluate in double precision; domain violations raise :class:`DomainError`."""
    params = params or {}

    def ev(node: Node) -> float:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            try:
                return float(point[node.name])
            except KeyError:
                raise UnboundParameterError(node.name) from None
        if isinstance(node, Param):
            return _lookup(node.name, params)
        if isinstance(node, Const):
            return CONSTANTS[node.name]
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Call):
            return _POINT_FUNCS[node.func](ev(node.arg))
        a, b = ev(node.left), ev(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return _div(a, b)
        return _real_pow(a, b)

    result = ev(expr)
    if math.isnan(result):
        raise DomainError(f"{to_text(expr)} evaluated to NaN")
    return result


# --------------------------------------------------------------------------
# boxes and interval evaluation


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in the nonnegative orthant, one interval per variable."""

    names: tuple[str, ...]
    bounds: tuple[Interval, ...]

    def __post_init__(self):
        if len(self.names) != len(self.bounds) or not self.names:
            raise ValueError("box needs one interval per variable")
        for name, b in zip(self.names, self.bounds):
            if b.lo < 0.0:
                raise ValueError(f"box side {name}={b} leaves the domain [0, inf)")

    @classmethod
    def of(cls, **sides: tuple[float, float]) -> Box:
        names = tuple(n for n in VARIABLES if n in sides)
        if len(names) != len(sides):
            raise ValueError(f"box variables must be among {VARIABLES}")
        return cls(names, tuple(Interval(float(sides[n][0]), float(sides[n][1])) for n in names))

    def __getitem__(self, name: str) -> Interval:
        return self.bounds[self.names.index(name)]

    def as_dict(self) -> dict[str, Interval]:
        return dict(zip(self.names, self.bounds))

    def midpoint(self) -> dict[str, float]:
        return {n: b.mid for n, b in zip(self.names, self.bounds)}

    def corners(self) -> list[dict[str, float]]:
        pts: list[dict[str, float]] = [{}]
        for n, b in zip(self.names, self.bounds):
            pts = [{**p, n: x} for p in pts for x in dict.fromkeys((b.lo, b.hi))]
        return pts

    def contains(self, point: Mapping[str, float]) -> bool:
        return all(b.contains(point[n]) for n, b in zip(self.names, self.bounds))

    def subset_of(self, other: Box) -> bool:
        return all(b.subset_of(other[n]) for n, b in zip(self.names, self.bounds))

    def widest(self) -> int:
        widths = [b.width for b in self.bounds]
        return widths.index(max(widths))

    def bisect(self, axis: int | None = None) -> tuple[Box, Box]:
        k = self.widest() if axis is None else axis
        b = self.bounds[k]
        m = b.mid
        left = self.bounds[:k] + (Interval(b.lo, m),) + self.bounds[k + 1 :]
        right = self.bounds[:k] + (Interval(m, b.hi),) + self.bounds[k + 1 :]
        return Box(self.names, left), Box(self.names, right)

    def to_list(self) -> list[list[float]]:
        return [[b.lo, b.hi] for b in self.bounds]

    def __repr__(self):
        sides = " x ".join(f"{n}∈[{b.lo:.6g}, {b.hi:.6g}]" for n, b in zip(self.names, self.bounds))
        return f"Box({sides})"


def _enclose(x: float) -> Interval:
    return Interval(iv._down(x), iv._up(x))


_INTERVAL_FUNCS = {
    "sin": iv.sin,
    "cos": iv.cos,
    "exp": iv.exp,
    "log": iv.log,
    "sqrt": iv.sqrt,
    "abs": iv.fabs,
}


def evaluate_interval(expr: Expr, box: Box, params: Mapping[str, float] | None = None) -> Interval:
    """Natural interval extension: an enclosure of ``expr`` over ``box``."""
    params = params or {}
    sides = box.as_dict()

    def ev(node: Node) -> Interval:
        if isinstance(node, Num):
            return Interval.point(node.value)
        if isinstance(node, Var):
            try:
                return sides[node.name]
            except KeyError:
                raise UnboundParameterError(node.name) from None
        if isinstance(node, Param):
            return Interval.point(_lookup(node.name, params))
        if isinstance(node, Const):
            return _enclose(CONSTANTS[node.name])
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Call):
            return _INTERVAL_FUNCS[node.func](ev(node.arg))
        a, b = ev(node.left), ev(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a**b

    return ev(expr)


# --------------------------------------------------------------------------
# compiled evaluation for hot loops (solver)


def _np_div(a, b):
    if np.any(np.asarray(b) == 0.0):
        raise DomainError("division by zero")
    return a / b


def _np_log(x):
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("log of non-positive value")
    return np.log(x)


def _np_sqrt(x):
    if np.any(np.asarray(x) < 0.0):
        raise DomainError("sqrt of negative value")
    return np.sqrt(x)


def _np_pow(a, b):
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    bad = (a_arr < 0.0) & (b_arr != np.round(b_arr))
    if np.any(bad):
        raise DomainError("negative base to non-integer power")
    if np.any((a_arr == 0.0) & (b_arr < 0.0)):
        raise DomainError("zero to a negative power")
    with np.errstate(over="ignore"):
        return np.power(a_arr, b_arr)


_MATH_NS = {
    "_div": _div, "_pow": _real_pow, "_sin": math.sin, "_cos": math.cos,
    "_exp": _exp, "_log": _log, "_sqrt": _sqrt, "_abs": abs,
}
_NUMPY_NS = {
    "_div": _np_div, "_pow": _np_pow, "_sin": np.sin, "_cos": np.cos,
    "_exp": np.exp, "_log": _np_log, "_sqrt": _np_sqrt, "_abs": np.abs,
}


def _source(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Param):
        return f"p_{node.name}"
    if isinstance(node, Const):
        return repr(CONSTANTS[node.name])
    if isinstance(node, Neg):
        return f"(-{_source(node.operand)})"
    if isinstance(node, Call):
        return f"_{node.func}({_source(node.arg)})"
    a, b = _source(node.left), _source(node.right)
    if node.op == "/":
        return f"_div({a}, {b})"
    if node.op == "^":
        if isinstance(node.right, Num) and node.right.value == 2.0:
            return f"({a} * {a})"
        return f"_pow({a}, {b})"
    return f"({a} {node.op} {b})"


def compile_expr(expr: Expr, params: Mapping[str, float] | None = None, vectorized: bool = False):
    """Return ``fn(u, v=0.0)`` evaluating ``expr``; with ``vectorized`` it accepts numpy arrays."""
    params = params or {}
    ns = dict(_NUMPY_NS if vectorized else _MATH_NS)
    for name in parameters(expr):
        if vectorized and name in params:
            ns[f"p_{name}"] = np.asarray(params[name], dtype=float)
        else:
            ns[f"p_{name}"] = _lookup(name, params)
    code = f"lambda u=0.0, v=0.0: {_source(expr)}"
    return eval(code, ns)  # noqa: S307 - source is generated from a parsed tree
