"""Closed-form expressions for entire and meromorphic functions of one complex variable.

The only transcendental primitive is ``exp`` with an entire argument; every
expressible function is an exponential polynomial divided by another one.
Expressions are immutable trees, equality is structural, and evaluation-based
identity testing uses a fixed set of 32 probe points.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "VarZ",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "PowInt",
    "Exp",
    "MeromorphicFn",
    "ExtendedComplex",
    "ExprError",
    "ParseError",
    "EssentialSingularityError",
    "DegenerateDenominatorError",
    "OrderOverflowError",
    "PROBE_POINTS",
    "parse",
    "format_expr",
    "normalize",
    "differentiate",
    "to_meromorphic",
    "evaluate",
    "evaluate_expr",
    "compile_expr",
    "is_entire",
    "is_constant",
]

# Fixed probe points: 32 points on a circle of radius 0.7, shifted off the axes.
PROBE_POINTS = tuple(
    0.7 * cmath.exp(2j * cmath.pi * k / 32) + 0.1j for k in range(32)
)

ORDER_CAP = 16


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EssentialSingularityError(ExprError):
    pass


class DegenerateDenominatorError(ExprError):
    pass


class OrderOverflowError(ExprError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: complex


@dataclass(frozen=True)
class VarZ(Expr):
    pass


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class PowInt(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent == 0:
            raise ExprError("PowInt exponent must be a nonzero integer")


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def __post_init__(self):
        if not is_entire(self.arg):
            raise EssentialSingularityError(
                "exp of a non-entire argument is not representable"
            )


ZERO = Const(0j)
ONE = Const(1 + 0j)


def is_constant(e: Expr) -> bool:
    """True when the expression contains no occurrence of z."""
    if isinstance(e, (Const,)):
        return True
    if isinstance(e, VarZ):
        return False
    if isinstance(e, (Add, Sub, Mul, Div)):
        return is_constant(e.left) and is_constant(e.right)
    if isinstance(e, PowInt):
        return is_constant(e.base)
    if isinstance(e, Exp):
        return is_constant(e.arg)
    raise TypeError(f"not an Expr: {e!r}")


def is_entire(e: Expr) -> bool:
    """True when the expression defines an entire function of z.

    Division is only allowed by constants, negative powers only of constants,
    and exp arguments must themselves be entire.
    """
    if isinstance(e, (Const, VarZ)):
        return True
    if isinstance(e, (Add, Sub, Mul)):
        return is_entire(e.left) and is_entire(e.right)
    if isinstance(e, Div):
        return is_entire(e.left) and is_constant(e.right)
    if isinstance(e, PowInt):
        if e.exponent > 0:
            return is_entire(e.base)
        return is_constant(e.base)
    if isinstance(e, Exp):
        return is_entire(e.arg)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Parser
#
# expr   := term (("+"|"-") term)* ;
# term   := factor (("*"|"/") factor)* ;
# factor := atom ("^" int)? | "-" factor ;
# atom   := "z" | number | number "i" | "i" | "exp" "(" expr ")" | "(" expr ")" ;


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.accept(ch):
            self.error(f"expected {ch!r}")

    def parse(self) -> Expr:
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = Add(e, self.term())
            elif self.accept("-"):
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.accept("*"):
                e = Mul(e, self.factor())
            elif self.accept("/"):
                e = self._div(e, self.factor())
            else:
                return e

    def _div(self, num: Expr, den: Expr) -> Expr:
        return Div(num, den)

    def factor(self) -> Expr:
        if self.accept("-"):
            # ^ binds tighter than unary minus, handled by recursing to factor
            return Sub(ZERO, self.factor())
        e = self.atom()
        if self.peek() == "^":
            self.accept("^")
            n = self.signed_int()
            e = PowInt(e, n)
        return e

    def signed_int(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected integer exponent")
        n = int(self.text[start : self.pos])
        if n == 0:
            self.error("exponent must be nonzero")
        return n

    def atom(self) -> Expr:
        ch = self.peek()
        if ch == "z":
            self.pos += 1
            return VarZ()
        if ch == "i":
            self.pos += 1
            return Const(1j)
        if ch == "e" and self.text.startswith("exp", self.pos):
            self.pos += 3
            self.expect("(")
            start = self.pos
            arg = self.expr()
            if not is_entire(arg):
                raise ParseError("essential singularity: exp of non-entire argument", start)
            self.expect(")")
            return Exp(arg)
        if ch == "(":
            self.accept("(")
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit() or ch == ".":
            return self.number()
        self.error("expected atom")

    def number(self) -> Expr:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isdigit() or self.text[self.pos] == "."
        ):
            self.pos += 1
        # exponent part of a decimal literal, e.g. 1.5e-3
        if self.pos < len(self.text) and self.text[self.pos] in "eE":
            save = self.pos
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = save
        try:
            value = float(self.text[start : self.pos])
        except ValueError:
            self.pos = start
            self.error("malformed number")
        if self.pos < len(self.text) and self.text[self.pos] == "i":
            self.pos += 1
            return Const(value * 1j)
        return Const(complex(value))


def parse(text: str) -> Expr:
    """Parse an expression; raises ParseError with a byte offset on bad input.

    The result is normalized (constant subtrees folded), so parsing the
    printed form of any expression reproduces its normalized tree.
    """
    return normalize(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Printing


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_const(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0.0:
        return _fmt_real(re) if re >= 0 else f"-{_fmt_real(-re)}"
    if re == 0.0:
        body = f"{_fmt_real(abs(im))}*i"
        return body if im > 0 else f"-{body}"
    sign = "+" if im > 0 else "-"
    return f"({_fmt_real(re) if re >= 0 else '-' + _fmt_real(-re)}{sign}{_fmt_real(abs(im))}*i)"


def _fmt(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, VarZ):
        return "z"
    if isinstance(e, Add):
        return f"({_fmt(e.left)}+{_fmt(e.right)})"
    if isinstance(e, Sub):
        return f"({_fmt(e.left)}-{_fmt(e.right)})"
    if isinstance(e, Mul):
        return f"({_fmt(e.left)}*{_fmt(e.right)})"
    if isinstance(e, Div):
        return f"({_fmt(e.left)}/{_fmt(e.right)})"
    if isinstance(e, PowInt):
        return f"({_fmt(e.base)})^{e.exponent}"
    if isinstance(e, Exp):
        return f"exp({_fmt(e.arg)})"
    raise TypeError(f"not an Expr: {e!r}")


def format_expr(e: Expr) -> str:
    """Render the normalized expression; parse(format_expr(e)) == normalize(e)."""
    return _fmt(normalize(e))


# ---------------------------------------------------------------------------
# Normalization (constant folding only)


def normalize(e: Expr) -> Expr:
    if isinstance(e, (Const, VarZ)):
        return e
    if isinstance(e, (Add, Sub, Mul, Div)):
        a, b = normalize(e.left), normalize(e.right)
        if isinstance(a, Const) and isinstance(b, Const):
            if isinstance(e, Add):
                return Const(a.value + b.value)
            if isinstance(e, Sub):
                return Const(a.value - b.value)
            if isinstance(e, Mul):
                return Const(a.value * b.value)
            if b.value != 0:
                return Const(a.value / b.value)
        return type(e)(a, b)
    if isinstance(e, PowInt):
        base = normalize(e.base)
        if isinstance(base, Const) and (base.value != 0 or e.exponent > 0):
            try:
                return Const(base.value**e.exponent)
            except OverflowError:
                return PowInt(base, e.exponent)
        return PowInt(base, e.exponent)
    if isinstance(e, Exp):
        arg = normalize(e.arg)
        if isinstance(arg, Const):
            try:
                return Const(cmath.exp(arg.value))
            except OverflowError:
                return Exp(arg)
        return Exp(arg)
    raise TypeError(f"not an Expr: {e!r}")


def _simplify(e: Expr) -> Expr:
    """Constant folding plus neutral-element elimination.

    Internal helper keeping derivative trees small; never changes the function.
    """
    e = normalize(e)
    if isinstance(e, Add):
        a, b = _simplify(e.left), _simplify(e.right)
        if a == ZERO or a == Const(0):
            return b
        if b == ZERO or b == Const(0):
            return a
        return Add(a, b)
    if isinstance(e, Sub):
        a, b = _simplify(e.left), _simplify(e.right)
        if b == ZERO or b == Const(0):
            return a
        return Sub(a, b)
    if isinstance(e, Mul):
        a, b = _simplify(e.left), _simplify(e.right)
        if a == ZERO or b == ZERO or a == Const(0) or b == Const(0):
            return ZERO
        if isinstance(a, Const) and a.value == 1:
            return b
        if isinstance(b, Const) and b.value == 1:
            return a
        return Mul(a, b)
    if isinstance(e, Div):
        a, b = _simplify(e.left), _simplify(e.right)
        if a == ZERO or a == Const(0):
            return ZERO
        if isinstance(b, Const) and b.value == 1:
            return a
        return Div(a, b)
    if isinstance(e, PowInt):
        base = _simplify(e.base)
        if e.exponent == 1:
            return base
        if isinstance(base, Const):
            return normalize(PowInt(base, e.exponent))
        return PowInt(base, e.exponent)
    if isinstance(e, Exp):
        return Exp(_simplify(e.arg))
    return e


# ---------------------------------------------------------------------------
# Differentiation


@functools.lru_cache(maxsize=None)
def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative with respect to z."""
    d = _differentiate(e)
    return _simplify(d)


def _differentiate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, VarZ):
        return ONE
    if isinstance(e, Add):
        return Add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return Sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        return Add(
            Mul(differentiate(e.left), e.right), Mul(e.left, differentiate(e.right))
        )
    if isinstance(e, Div):
        num = Sub(
            Mul(differentiate(e.left), e.right), Mul(e.left, differentiate(e.right))
        )
        return Div(num, PowInt(e.right, 2))
    if isinstance(e, PowInt):
        db = differentiate(e.base)
        if e.exponent == 1:
            return db
        inner = PowInt(e.base, e.exponent - 1) if e.exponent != 1 else ONE
        return Mul(Const(complex(e.exponent)), Mul(inner, db))
    if isinstance(e, Exp):
        return Mul(differentiate(e.arg), e)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation


def evaluate_expr(e: Expr, z: complex) -> complex:
    """Plain arithmetic evaluation of an AST (no pole bookkeeping)."""
    return complex(compile_expr(e)(z))


@functools.lru_cache(maxsize=None)
def compile_expr(e: Expr):
    """Compile to a numpy-vectorized callable z -> value."""
    if isinstance(e, Const):
        v = e.value
        return lambda z: np.broadcast_to(v, np.shape(z)).copy() if np.ndim(z) else v
    if isinstance(e, VarZ):
        return lambda z: np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    if isinstance(e, Add):
        fa, fb = compile_expr(e.left), compile_expr(e.right)
        return lambda z: fa(z) + fb(z)
    if isinstance(e, Sub):
        fa, fb = compile_expr(e.left), compile_expr(e.right)
        return lambda z: fa(z) - fb(z)
    if isinstance(e, Mul):
        fa, fb = compile_expr(e.left), compile_expr(e.right)
        return lambda z: fa(z) * fb(z)
    if isinstance(e, Div):
        fa, fb = compile_expr(e.left), compile_expr(e.right)

        def _div(z, fa=fa, fb=fb):
            with np.errstate(divide="ignore", invalid="ignore"):
                return fa(z) / fb(z)

        return _div
    if isinstance(e, PowInt):
        fb = compile_expr(e.base)
        n = e.exponent

        def _pow(z, fb=fb, n=n):
            with np.errstate(divide="ignore", invalid="ignore"):
                return fb(z) ** n

        return _pow
    if isinstance(e, Exp):
        fa = compile_expr(e.arg)
        return lambda z: np.exp(fa(z))
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Meromorphic normalization


@dataclass(frozen=True)
class MeromorphicFn:
    """A meromorphic function as a ratio of two entire expressions."""

    num: Expr
    den: Expr

    def __post_init__(self):
        if not is_entire(self.num) or not is_entire(self.den):
            raise ExprError("numerator and denominator must be entire")
        if not any(
            abs(evaluate_expr(self.den, p)) > 1e-300 for p in PROBE_POINTS
        ):
            raise DegenerateDenominatorError(
                "denominator vanishes at all probe points"
            )

    def reciprocal(self) -> "MeromorphicFn":
        return MeromorphicFn(self.den, self.num)


def to_meromorphic(e: Expr) -> MeromorphicFn:
    """Normalize an expression to an entire numerator/denominator pair."""
    num, den = _as_ratio(e)
    return MeromorphicFn(_simplify(num), _simplify(den))


def _as_ratio(e: Expr) -> tuple[Expr, Expr]:
    if isinstance(e, (Const, VarZ)):
        return e, ONE
    if isinstance(e, Add):
        na, da = _as_ratio(e.left)
        nb, db = _as_ratio(e.right)
        return Add(Mul(na, db), Mul(nb, da)), Mul(da, db)
    if isinstance(e, Sub):
        na, da = _as_ratio(e.left)
        nb, db = _as_ratio(e.right)
        return Sub(Mul(na, db), Mul(nb, da)), Mul(da, db)
    if isinstance(e, Mul):
        na, da = _as_ratio(e.left)
        nb, db = _as_ratio(e.right)
        return Mul(na, nb), Mul(da, db)
    if isinstance(e, Div):
        na, da = _as_ratio(e.left)
        nb, db = _as_ratio(e.right)
        return Mul(na, db), Mul(da, nb)
    if isinstance(e, PowInt):
        nb, db = _as_ratio(e.base)
        k = abs(e.exponent)
        npow = nb if k == 1 else PowInt(nb, k)
        dpow = db if k == 1 else PowInt(db, k)
        if e.exponent > 0:
            return npow, dpow
        return dpow, npow
    if isinstance(e, Exp):
        na, da = _as_ratio(e.arg)
        da = _simplify(da)
        if not is_constant(da):
            raise EssentialSingularityError(
                "exp of a meromorphic argument has an essential singularity"
            )
        arg = _simplify(Div(na, da)) if da != ONE else _simplify(na)
        return Exp(arg), ONE
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Extended evaluation with pole/indeterminacy resolution


@dataclass(frozen=True)
class ExtendedComplex:
    """A finite value or a pole of known order."""

    kind: str  # "finite" | "pole"
    value: complex | None = None
    order: int = 0

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"


def _local_scale(e: Expr, z: complex) -> float:
    fn = compile_expr(e)
    ring = z + 0.5 * np.exp(2j * np.pi * np.arange(16) / 16)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.abs(fn(ring))
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0


def _vanishing_order(e: Expr, z: complex) -> int:
    """Order of vanishing at z, detected through successive derivatives."""
    cur = e
    for k in range(ORDER_CAP + 1):
        v = evaluate_expr(cur, z)
        scale = _local_scale(cur, z)
        if abs(v) > 1e-8 * (scale + 1e-300) or scale == 0.0:
            return k
        cur = differentiate(cur)
    raise OrderOverflowError(
        f"vanishing order exceeds cap {ORDER_CAP} at z={z}"
    )


def _nth_derivative_value(e: Expr, z: complex, n: int) -> complex:
    cur = e
    for _ in range(n):
        cur = differentiate(cur)
    return evaluate_expr(cur, z)


def evaluate(fn: MeromorphicFn, z: complex) -> ExtendedComplex:
    """Evaluate num/den at z, resolving zeros of the denominator.

    Returns a finite value, a Pole(order), or the limit value when numerator
    and denominator vanish to equal order.
    """
    nv = evaluate_expr(fn.num, z)
    dv = evaluate_expr(fn.den, z)
    den_scale = _local_scale(fn.den, z)
    if abs(dv) > 1e-8 * (den_scale + 1e-300):
        return ExtendedComplex("finite", nv / dv)
    dord = _vanishing_order(fn.den, z)
    nord = _vanishing_order(fn.num, z)
    if dord > nord:
        return ExtendedComplex("pole", order=dord - nord)
    num_top = _nth_derivative_value(fn.num, z, dord)
    den_top = _nth_derivative_value(fn.den, z, dord)
    # equal orders: value via ratio of first nonvanishing derivatives
    if nord == dord:
        return ExtendedComplex("finite", num_top / den_top)
    # numerator vanishes deeper: the quotient has a zero at z
    return ExtendedComplex("finite", 0j)


def mero_value(fn: MeromorphicFn, z: complex) -> complex:
    """Finite value of fn at z; cmath.inf-like complex infinity at poles."""
    v = evaluate(fn, z)
    if v.is_finite:
        return v.value
    return complex(math.inf, 0.0)
