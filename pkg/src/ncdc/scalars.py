"""Exact arithmetic in the field Q(q) of univariate rational functions.

A scalar is either a plain rational number (``gmpy2.mpq``) or a
:class:`RatFun`, a reduced fraction of polynomials in the deformation
parameter ``q``.  Every constructor canonicalizes:

* numerator and denominator are coprime,
* the denominator is monic,
* a fraction whose value is constant is demoted to ``mpq``.

Keeping constants as raw ``mpq`` matters: large randomized computations
with rational entries never leave C-speed arithmetic.  ``RatFun``
implements the reflected operators, so mixed expressions like
``mpq(2) * q_parameter`` work transparently.

Polynomials are coefficient tuples, index = degree, trailing coefficient
nonzero, ``()`` for the zero polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from gmpy2 import mpq

Poly = "tuple[mpq, ...]"

_P_ZERO: tuple = ()
_P_ONE = (mpq(1),)
_MAX_EXPONENT = 10_000


class ScalarSyntaxError(ValueError):
    """Malformed scalar text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class PoleError(ZeroDivisionError):
    """Evaluation at a point where the denominator vanishes."""


# ---------------------------------------------------------------------------
# polynomial helpers (coefficients are mpq)
# ---------------------------------------------------------------------------

def _p_trim(coeffs: list) -> tuple:
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


def _p_add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _p_trim(out)


def _p_neg(a):
    return tuple(-c for c in a)


def _p_sub(a, b):
    return _p_add(a, _p_neg(b))


def _p_mul(a, b):
    if not a or not b:
        return _P_ZERO
    if len(a) == 1:
        c = a[0]
        return tuple(c * x for x in b)
    if len(b) == 1:
        c = b[0]
        return tuple(x * c for x in a)
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _p_trim(out)


def _p_scale(a, c):
    if not c:
        return _P_ZERO
    return tuple(x * c for x in a)


def _p_divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return _P_ZERO, a
    rem = list(a)
    lead = b[-1]
    db = len(b) - 1
    quo = [mpq(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = rem[i]
        if not c:
            continue
        f = c / lead
        quo[i - db] = f
        rem[i] = mpq(0)
        for j in range(db):
            rem[i - db + j] -= f * b[j]
    return _p_trim(quo), _p_trim(rem)


def _p_gcd(a, b):
    while b:
        a, b = b, _p_divmod(a, b)[1]
    if not a:
        return _P_ZERO
    lead = a[-1]
    if lead != 1:
        a = tuple(c / lead for c in a)
    return a


def _p_pow(a, n: int):
    out = _P_ONE
    base = a
    while n:
        if n & 1:
            out = _p_mul(out, base)
        base = _p_mul(base, base)
        n >>= 1
    return out


def _p_eval(a, x):
    acc = mpq(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

class RatFun:
    """A non-constant reduced fraction of polynomials in ``q``.

    Instances are immutable and canonical: coprime numerator and
    denominator, monic denominator.  Values that reduce to a constant are
    never represented as ``RatFun`` (use :func:`normalized`), so equality
    against plain rationals is always ``False``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        # trusted constructor: canonical inputs only
        self.num = num
        self.den = den

    def _pair(self, other):
        if isinstance(other, RatFun):
            return other.num, other.den
        if isinstance(other, (mpq, int, Fraction)):
            other = mpq(other)
            if not other:
                return _P_ZERO, _P_ONE
            return (other,), _P_ONE
        return None

    def __add__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_add(_p_mul(self.num, od), _p_mul(on, self.den)),
                          _p_mul(self.den, od))

    __radd__ = __add__

    def __sub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_sub(_p_mul(self.num, od), _p_mul(on, self.den)),
                          _p_mul(self.den, od))

    def __rsub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_sub(_p_mul(on, self.den), _p_mul(self.num, od)),
                          _p_mul(self.den, od))

    def __mul__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_mul(self.num, on), _p_mul(self.den, od))

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_mul(self.num, od), _p_mul(self.den, on))

    def __rtruediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        on, od = p
        return normalized(_p_mul(on, self.den), _p_mul(od, self.num))

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return mpq(1)
        if n < 0:
            return normalized(_p_pow(self.den, -n), _p_pow(self.num, -n))
        # coprime powers stay coprime, monic powers stay monic
        return RatFun(_p_pow(self.num, n), _p_pow(self.den, n))

    def __neg__(self):
        return RatFun(_p_neg(self.num), self.den)

    def __pos__(self):
        return self

    def __bool__(self):
        return True  # the zero scalar is always mpq(0)

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (mpq, int, Fraction)):
            return False  # canonical RatFun is never constant
        return NotImplemented

    def __hash__(self):
        return hash((RatFun, self.num, self.den))

    def __str__(self):
        return _format_ratfun(self.num, self.den)

    def __repr__(self):
        return f"RatFun({self})"


#: A scalar value: a rational constant or a rational function of q.
Scalar = Union[mpq, RatFun]

ZERO = mpq(0)
ONE = mpq(1)
Q = RatFun((mpq(0), mpq(1)), _P_ONE)


def normalized(num, den) -> Scalar:
    """Canonical scalar equal to ``num/den`` (polynomial coefficient tuples).

    Raises ``ZeroDivisionError`` when ``den`` is the zero polynomial.
    Idempotent on canonical inputs.
    """
    if num and not num[-1]:
        num = _p_trim(list(num))
    if den and not den[-1]:
        den = _p_trim(list(den))
    if not den:
        raise ZeroDivisionError("denominator is the zero polynomial")
    if not num:
        return ZERO
    g = _p_gcd(num, den)
    if len(g) > 1:
        num = _p_divmod(num, g)[0]
        den = _p_divmod(den, g)[0]
    lead = den[-1]
    if lead != 1:
        num = tuple(c / lead for c in num)
        den = tuple(c / lead for c in den)
    if len(den) == 1 and len(num) == 1:
        return num[0]
    return RatFun(num, den)


def is_scalar(x) -> bool:
    return isinstance(x, (mpq, RatFun))


def as_scalar(x) -> Scalar:
    """Coerce an int, Fraction, mpq, RatFun, or scalar text to a Scalar."""
    if isinstance(x, (mpq, RatFun)):
        return x
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a scalar")


def numden(s: Scalar):
    """The canonical (numerator, denominator) polynomial pair of ``s``."""
    if isinstance(s, RatFun):
        return s.num, s.den
    s = mpq(s)
    if not s:
        return _P_ZERO, _P_ONE
    return (s,), _P_ONE


def eval_scalar(s: Scalar, point) -> mpq:
    """Exact value of ``s`` at ``q = point``.

    Raises :class:`PoleError` when the denominator vanishes there.
    """
    if not isinstance(s, RatFun):
        return mpq(s)
    x = mpq(point)
    dv = _p_eval(s.den, x)
    if not dv:
        raise PoleError(f"pole at q = {x}")
    return _p_eval(s.num, x) / dv


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def _monomial_str(c, d: int) -> str:
    if d == 0:
        return str(c)
    m = "q" if d == 1 else f"q^{d}"
    if c == 1:
        return m
    if c == -1:
        return "-" + m
    return f"{c}*{m}"


def _poly_str(p) -> str:
    if not p:
        return "0"
    parts = []
    for d in range(len(p) - 1, -1, -1):
        c = p[d]
        if not c:
            continue
        t = _monomial_str(c, d)
        if not parts:
            parts.append(t)
        elif t.startswith("-"):
            parts.append("-" + t[1:])
        else:
            parts.append("+" + t)
    return "".join(parts)


def _is_unit_monomial(p) -> bool:
    return len(p) > 1 and p[-1] == 1 and not any(p[:-1])


def _format_ratfun(num, den) -> str:
    ns = _poly_str(num)
    if den == _P_ONE:
        return ns
    if sum(1 for c in num if c) > 1:
        ns = f"({ns})"
    ds = _poly_str(den)
    if not _is_unit_monomial(den):
        ds = f"({ds})"
    return f"{ns}/{ds}"


def scalar_str(s: Scalar) -> str:
    """Deterministic canonical spelling; inverse of :func:`parse_scalar`."""
    if isinstance(s, RatFun):
        return str(s)
    return str(mpq(s))


# ---------------------------------------------------------------------------
# tokenizing and parsing
# ---------------------------------------------------------------------------

_OPS = set("+-*/^()")


def tokenize(text: str):
    """Split scalar/element text into (kind, value, position) triples.

    Kinds: ``int`` (value int), ``name`` (value str), ``op`` (value one of
    ``+ - * / ^ ( )``), and a final ``end`` token.
    """
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j]), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        if ch in _OPS:
            toks.append(("op", ch, i))
            i += 1
            continue
        raise ScalarSyntaxError(f"unexpected character {ch!r}", i)
    toks.append(("end", None, n))
    return toks


class ScalarParser:
    """Recursive-descent parser over a token list.

    ``^`` binds tighter than ``*``/``/``, which bind tighter than
    ``+``/``-``; unary minus is allowed.  Exposed as a class so the element
    grammar can reuse individual levels on a shared token stream.
    """

    def __init__(self, tokens):
        self.tokens = tokens

    def parse_expr(self, i: int):
        val, i = self.parse_term(i)
        while True:
            kind, op, _ = self.tokens[i]
            if kind != "op" or op not in "+-":
                return val, i
            rhs, i = self.parse_term(i + 1)
            val = val + rhs if op == "+" else val - rhs

    def parse_term(self, i: int):
        val, i = self.parse_unary(i)
        while True:
            kind, op, pos = self.tokens[i]
            if kind != "op" or op not in "*/":
                return val, i
            rhs, i = self.parse_unary(i + 1)
            if op == "*":
                val = val * rhs
            else:
                if not rhs:
                    raise ZeroDivisionError(
                        f"division by a zero polynomial (at position {pos})")
                val = val / rhs

    def parse_unary(self, i: int):
        sign = 1
        while self.tokens[i][:2] == ("op", "-"):
            sign = -sign
            i += 1
        val, i = self.parse_power(i)
        return (val if sign > 0 else -val), i

    def parse_power(self, i: int):
        val, i = self.parse_atom(i)
        kind, op, pos = self.tokens[i]
        if kind == "op" and op == "^":
            ekind, expo, epos = self.tokens[i + 1]
            if ekind != "int":
                raise ScalarSyntaxError("exponent must be an integer", epos)
            if expo > _MAX_EXPONENT:
                raise ScalarSyntaxError(f"exponent exceeds {_MAX_EXPONENT}", epos)
            val = val ** expo
            i += 2
        return val, i

    def parse_atom(self, i: int):
        kind, value, pos = self.tokens[i]
        if kind == "int":
            return mpq(value), i + 1
        if kind == "name":
            if value == "q":
                return Q, i + 1
            raise ScalarSyntaxError(f"unknown symbol {value!r}", pos)
        if kind == "op" and value == "(":
            val, i = self.parse_expr(i + 1)
            kind, value, pos = self.tokens[i]
            if (kind, value) != ("op", ")"):
                raise ScalarSyntaxError("expected ')'", pos)
            return val, i + 1
        raise ScalarSyntaxError("expected a number, 'q', or '('", pos)


def parse_scalar(text: str) -> Scalar:
    """Parse scalar text to its canonical value.

    Raises :class:`ScalarSyntaxError` on malformed input and
    ``ZeroDivisionError`` on division by an identically zero polynomial.
    """
    toks = tokenize(text)
    parser = ScalarParser(toks)
    val, i = parser.parse_expr(0)
    kind, _, pos = toks[i]
    if kind != "end":
        raise ScalarSyntaxError("trailing input", pos)
    return val
