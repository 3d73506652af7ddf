"""Closed expression language over the chart coordinates (t, r, th, ph).

Every metric component is a ``FieldExpr``: an immutable AST that can be
evaluated at points (scalars or numpy arrays) and differentiated exactly.
Exact second derivatives are what the curvature formulas need, so there is
no finite differencing anywhere in this module.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
    IDENT  := t | r | th | ph | pi | sin | cos | tan | exp | log | sqrt

Exponents must reduce to numeric constants at parse time.  Chart files may
supply named parameters; these are substituted as literals while parsing.
Derivative ASTs are built with constant folding but no other rewriting, so
they may grow; shared subtrees are evaluated once per call via memoization.

Expressions are immutable and safe to evaluate from concurrent threads;
the per-node derivative cache is idempotent, so a rare duplicate
computation is the worst a race can produce.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

COORDS = ("t", "r", "th", "ph")
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")

__all__ = ["FieldExpr", "COORDS", "FUNCTIONS", "parse", "evaluate", "diff",
           "to_source", "lit", "var", "ZERO", "ONE"]


class FieldExpr:
    """Base class of all expression nodes. Immutable after construction."""

    __slots__ = ("_dcache",)
    prec = 5

    # -- construction sugar, used heavily when assembling metric formulas --
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, expo):
        return pow_(self, expo)

    def __call__(self, **coords):
        return evaluate(self, coords)

    def diff(self, v: str) -> "FieldExpr":
        return diff(self, v)

    def __repr__(self):
        return f"FieldExpr({to_source(self)!r})"

    def __str__(self):
        return to_source(self)


class Lit(FieldExpr):
    __slots__ = ("value",)
    prec = 5

    def __init__(self, value: float):
        self.value = float(value)


class Var(FieldExpr):
    __slots__ = ("name",)
    prec = 5

    def __init__(self, name: str):
        self.name = name


class Neg(FieldExpr):
    __slots__ = ("arg",)
    prec = 3

    def __init__(self, arg: FieldExpr):
        self.arg = arg


class Add(FieldExpr):
    __slots__ = ("left", "right")
    prec = 1

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Sub(FieldExpr):
    __slots__ = ("left", "right")
    prec = 1

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Mul(FieldExpr):
    __slots__ = ("left", "right")
    prec = 2

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Div(FieldExpr):
    __slots__ = ("left", "right")
    prec = 2

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Pow(FieldExpr):
    """base ^ expo with a constant float exponent."""

    __slots__ = ("base", "expo")
    prec = 4

    def __init__(self, base, expo: float):
        self.base = base
        self.expo = float(expo)


class Call(FieldExpr):
    __slots__ = ("fn", "arg")
    prec = 5

    def __init__(self, fn: str, arg: FieldExpr):
        self.fn = fn
        self.arg = arg


ZERO = Lit(0.0)
ONE = Lit(1.0)


def _coerce(x) -> FieldExpr:
    if isinstance(x, FieldExpr):
        return x
    if isinstance(x, (int, float)):
        return Lit(x)
    raise TypeError(f"cannot use {type(x).__name__} in a FieldExpr")


def lit(value: float) -> FieldExpr:
    return Lit(value)


def var(name: str) -> FieldExpr:
    if name not in COORDS:
        raise ValueError(f"unknown coordinate {name!r}")
    return Var(name)


# ---------------------------------------------------------------------------
# smart constructors: constant folding only, no algebraic rewriting
# ---------------------------------------------------------------------------

def _is(e, v):
    return isinstance(e, Lit) and e.value == v


def add(a, b):
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a, b):
    # a zero denominator is an evaluation error, never a parse-time one,
    # so literal division by zero must survive folding as a Div node
    if isinstance(b, Lit) and b.value != 0.0:
        if isinstance(a, Lit):
            return Lit(a.value / b.value)
        if b.value == 1.0:
            return a
        if _is(a, 0.0):
            return ZERO
    elif _is(a, 0.0) and not isinstance(b, Lit):
        return ZERO
    return Div(a, b)


def neg(a):
    if isinstance(a, Lit):
        return Lit(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def pow_(base, expo):
    if isinstance(expo, FieldExpr):
        if not isinstance(expo, Lit):
            raise ValueError("exponent must be a numeric constant")
        expo = expo.value
    expo = float(expo)
    if expo == 0.0:
        return ONE
    if expo == 1.0:
        return base
    if isinstance(base, Lit):
        v = base.value
        if v > 0 or (expo == round(expo) and (v != 0.0 or expo > 0)):
            return Lit(v ** expo)
    return Pow(base, expo)


def call(fn, arg):
    if fn not in FUNCTIONS:
        raise ValueError(f"unknown function {fn!r}")
    if isinstance(arg, Lit):
        return Lit(_SCALAR_FN[fn](arg.value))
    return Call(fn, arg)


_SCALAR_FN = {"sin": math.sin, "cos": math.cos, "tan": math.tan,
              "exp": math.exp, "log": math.log, "sqrt": math.sqrt}
_NUMPY_FN = {"sin": np.sin, "cos": np.cos, "tan": np.tan,
             "exp": np.exp, "log": np.log, "sqrt": np.sqrt}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos,
                                  expected={"number", "identifier", "operator"})
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens, params):
        self.tokens = tokens
        self.i = 0
        self.params = params or {}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.peek()
        if kind == "op" and value == op:
            return self.take()
        raise ExprSyntaxError(f"expected {op!r}, found {value or 'end of input'!r}",
                              pos, expected={op})

    def parse_expr(self):
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                rhs = self.parse_term()
                node = add(node, rhs) if value == "+" else sub(node, rhs)
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.take()
                rhs = self.parse_factor()
                node = mul(node, rhs) if value == "*" else div(node, rhs)
            else:
                return node

    def parse_factor(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return neg(self.parse_factor())
        node = self.parse_base()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.take()
            expo = self.parse_factor()
            if not isinstance(expo, Lit):
                raise ExprSyntaxError("exponent must be a numeric constant", pos,
                                      expected={"constant exponent"})
            return pow_(node, expo.value)
        return node

    def parse_base(self):
        kind, value, pos = self.take()
        if kind == "num":
            return Lit(float(value))
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return call(value, arg)
            if value in COORDS:
                return Var(value)
            if value == "pi":
                return Lit(math.pi)
            if value in self.params:
                return Lit(float(self.params[value]))
            raise UnknownIdentifierError(
                f"unknown identifier {value!r}", pos,
                expected=set(COORDS) | set(FUNCTIONS) | {"pi"} | set(self.params))
        raise ExprSyntaxError(f"expected a value, found {value or 'end of input'!r}",
                              pos, expected={"number", "identifier", "'('", "'-'"})


def parse(source: str, params=None) -> FieldExpr:
    """Parse expression text into a FieldExpr.

    ``params`` maps parameter names to numbers substituted at parse time.
    Raises ExprSyntaxError (with byte offset and the expected-token set) on
    malformed input, UnknownIdentifierError on unresolved names.
    """
    parser = _Parser(_tokenize(source), params)
    node = parser.parse_expr()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {value!r}", pos, expected={"end of input"})
    return node


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(expr: FieldExpr, env):
    """Evaluate at a point.  ``env`` maps coordinate names to scalars or
    numpy arrays (broadcast together).  Returns float for scalar input.

    Domain violations (division by zero, log of non-positive, sqrt of
    negative, zero to a negative power) raise EvalDomainError.
    """
    memo = {}
    out = _ev(expr, env, memo)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _ev(e, env, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    t = type(e)
    if t is Lit:
        out = e.value
    elif t is Var:
        try:
            out = env[e.name]
        except KeyError:
            raise EvalDomainError(f"no value supplied for coordinate {e.name!r}")
    elif t is Add:
        out = _ev(e.left, env, memo) + _ev(e.right, env, memo)
    elif t is Sub:
        out = _ev(e.left, env, memo) - _ev(e.right, env, memo)
    elif t is Mul:
        out = _ev(e.left, env, memo) * _ev(e.right, env, memo)
    elif t is Div:
        den = _ev(e.right, env, memo)
        if np.any(den == 0.0):
            raise EvalDomainError("division by zero")
        out = _ev(e.left, env, memo) / den
    elif t is Neg:
        out = -_ev(e.arg, env, memo)
    elif t is Pow:
        base = _ev(e.base, env, memo)
        k = e.expo
        if k != round(k) and np.any(base < 0.0):
            raise EvalDomainError(f"negative base for exponent {k}")
        if k < 0 and np.any(base == 0.0):
            raise EvalDomainError(f"zero base for negative exponent {k}")
        out = np.power(base, k) if np.ndim(base) else base ** k
    elif t is Call:
        arg = _ev(e.arg, env, memo)
        if e.fn == "log" and np.any(arg <= 0.0):
            raise EvalDomainError("log of a non-positive value")
        if e.fn == "sqrt" and np.any(arg < 0.0):
            raise EvalDomainError("sqrt of a negative value")
        out = _NUMPY_FN[e.fn](arg) if np.ndim(arg) else _SCALAR_FN[e.fn](arg)
    else:  # pragma: no cover
        raise TypeError(f"not a FieldExpr node: {e!r}")
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def diff(expr: FieldExpr, v: str) -> FieldExpr:
    """Exact partial derivative d(expr)/dv.  Total on every valid AST;
    mixed partials commute.  Results are cached on the nodes."""
    if v not in COORDS:
        raise ValueError(f"cannot differentiate with respect to {v!r}")
    return _d(expr, v)


def _d(e, v):
    cache = getattr(e, "_dcache", None)
    if cache is None:
        cache = {}
        e._dcache = cache
    hit = cache.get(v)
    if hit is not None:
        return hit
    t = type(e)
    if t is Lit:
        out = ZERO
    elif t is Var:
        out = ONE if e.name == v else ZERO
    elif t is Add:
        out = add(_d(e.left, v), _d(e.right, v))
    elif t is Sub:
        out = sub(_d(e.left, v), _d(e.right, v))
    elif t is Mul:
        out = add(mul(_d(e.left, v), e.right), mul(e.left, _d(e.right, v)))
    elif t is Div:
        # (a/b)' = a'/b - a b'/b^2
        out = sub(div(_d(e.left, v), e.right),
                  div(mul(e.left, _d(e.right, v)), pow_(e.right, 2.0)))
    elif t is Neg:
        out = neg(_d(e.arg, v))
    elif t is Pow:
        out = mul(mul(Lit(e.expo), pow_(e.base, e.expo - 1.0)), _d(e.base, v))
    elif t is Call:
        inner = _d(e.arg, v)
        if e.fn == "sin":
            outer = call("cos", e.arg)
        elif e.fn == "cos":
            outer = neg(call("sin", e.arg))
        elif e.fn == "tan":
            outer = div(ONE, pow_(call("cos", e.arg), 2.0))
        elif e.fn == "exp":
            outer = e
        elif e.fn == "log":
            outer = div(ONE, e.arg)
        else:  # sqrt
            outer = div(Lit(0.5), e)
        out = mul(outer, inner)
    else:  # pragma: no cover
        raise TypeError(f"not a FieldExpr node: {e!r}")
    cache[v] = out
    return out


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _fmt_float(value: float) -> str:
    return repr(value)


def to_source(expr: FieldExpr) -> str:
    """Render to text that reparses to an equivalent expression."""
    return _src(expr)


def _paren(child, need):
    s = _src(child)
    return f"({s})" if child.prec < need else s


def _src(e):
    t = type(e)
    if t is Lit:
        if e.value < 0:
            return f"(-{_fmt_float(-e.value)})"
        return _fmt_float(e.value)
    if t is Var:
        return e.name
    if t is Add:
        return f"{_paren(e.left, 1)} + {_paren(e.right, 1)}"
    if t is Sub:
        return f"{_paren(e.left, 1)} - {_paren(e.right, 2)}"
    if t is Mul:
        return f"{_paren(e.left, 2)}*{_paren(e.right, 3)}"
    if t is Div:
        return f"{_paren(e.left, 2)}/{_paren(e.right, 3)}"
    if t is Neg:
        return f"-{_paren(e.arg, 3)}"
    if t is Pow:
        base = _src(e.base)
        if e.base.prec < 5:
            base = f"({base})"
        k = e.expo
        ks = _fmt_float(k) if k >= 0 else f"(-{_fmt_float(-k)})"
        return f"{base}^{ks}"
    if t is Call:
        return f"{e.fn}({_src(e.arg)})"
    raise TypeError(f"not a FieldExpr node: {e!r}")  # pragma: no cover
