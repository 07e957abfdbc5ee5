"""Scalar types: exact elements of Q(sqrt q) and error-tracked complex values.

Closed-form local identities are evaluated in :class:`ExactScalar`; truncated
group integrals and anything involving unit-modulus Satake parameters use
:class:`ApproxScalar`, which carries a rigorous absolute error bound along
with its value.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import mpmath

__all__ = [
    "DEFAULT_PRECISION",
    "ExactScalar",
    "ApproxScalar",
    "FieldMismatch",
    "NotRepresentable",
    "to_approx",
    "sum_with_error",
    "exact",
    "is_exact",
    "conj",
    "decimal_string",
]

DEFAULT_PRECISION = 128
# internal guard bits so that the published rounding term 2^(1-P)|z| dominates
# the true rounding error of every mpmath operation
_GUARD = 16


class FieldMismatch(ValueError):
    """Raised when two exact scalars over different fields Q(sqrt q) meet."""


class NotRepresentable(ValueError):
    """Raised when a result does not lie in the ring an exact scalar can hold."""


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n = _isqrt_exact(x.numerator)
    d = _isqrt_exact(x.denominator)
    if n is None or d is None:
        return None
    return Fraction(n, d)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True, eq=False)
class ExactScalar:
    """The element ``a + b*sqrt(q)`` with ``a, b`` rational.

    ``q`` is fixed per context; arithmetic between scalars with different
    ``q`` raises :class:`FieldMismatch`. When ``q`` is a perfect square the
    irrational part is folded into ``a`` so that ``b`` is always zero.
    """

    a: Fraction
    b: Fraction
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q <= 0:
            raise ValueError(f"q must be a positive integer, got {self.q!r}")
        a = _as_fraction(self.a)
        b = _as_fraction(self.b)
        root = _isqrt_exact(self.q)
        if root is not None and b:
            a, b = a + b * root, Fraction(0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # construction helpers
    @classmethod
    def rational(cls, x, q: int) -> "ExactScalar":
        return cls(_as_fraction(x), Fraction(0), q)

    @classmethod
    def sqrt_q(cls, q: int) -> "ExactScalar":
        return cls(Fraction(0), Fraction(1), q)

    @classmethod
    def inv_sqrt_q(cls, q: int) -> "ExactScalar":
        # 1/sqrt(q) is stored as sqrt(q)/q
        return cls(Fraction(0), Fraction(1, q), q)

    def _coerce(self, other) -> "ExactScalar | None":
        if isinstance(other, ExactScalar):
            if other.q != self.q:
                raise FieldMismatch(f"cannot combine Q(sqrt {self.q}) with Q(sqrt {other.q})")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return ExactScalar(Fraction(other), Fraction(0), self.q)
        return None

    # arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.a, -self.b, self.q)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar(self.a - o.a, self.b - o.b, self.q)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar(
            self.a * o.a + self.q * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.q,
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a^2 - q b^2``."""
        return self.a * self.a - self.q * self.b * self.b

    def inverse(self) -> "ExactScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt q)")
        return ExactScalar(self.a / n, -self.b / n, self.q)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ExactScalar(Fraction(1), Fraction(0), self.q)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> "ExactScalar":
        # Q(sqrt q) sits inside the reals
        return self

    def galois(self) -> "ExactScalar":
        return ExactScalar(self.a, -self.b, self.q)

    # comparisons
    def __eq__(self, other):
        if isinstance(other, ExactScalar):
            return self.q == other.q and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.q))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def sign(self) -> int:
        """Exact sign of the real number ``a + b sqrt q``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with q b^2
        diff = self.a * self.a - self.q * self.b * self.b
        if diff == 0:
            return 0
        return sa if diff > 0 else sb

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def is_rational(self) -> bool:
        return self.b == 0

    def sqrt(self) -> "ExactScalar":
        """Square root inside Q(sqrt q); raises :class:`NotRepresentable` otherwise."""
        if self.sign() < 0:
            raise NotRepresentable("square root of a negative number")
        if not self:
            return self
        q = self.q
        if self.b == 0:
            r = _rational_sqrt(self.a)
            if r is not None:
                return ExactScalar(r, Fraction(0), q)
            r = _rational_sqrt(self.a / q)
            if r is not None:
                return ExactScalar(Fraction(0), r, q)
            raise NotRepresentable(f"sqrt({self.a}) is not in Q(sqrt {q})")
        # (x + y sqrt q)^2 = a + b sqrt q  =>  x^2 roots of t^2 - a t + q b^2/4
        disc = _rational_sqrt(self.a * self.a - q * self.b * self.b)
        if disc is not None:
            for t in ((self.a + disc) / 2, (self.a - disc) / 2):
                x = _rational_sqrt(t)
                if x:
                    cand = ExactScalar(x, self.b / (2 * x), q)
                    if cand.sign() < 0:
                        cand = -cand
                    if cand * cand == self:
                        return cand
        raise NotRepresentable(f"sqrt({self}) is not in Q(sqrt {q})")

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.q)

    def __repr__(self):
        if self.b == 0:
            return f"ExactScalar({self.a}, q={self.q})"
        return f"ExactScalar({self.a} + {self.b}*sqrt({self.q}))"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.q})"
        return f"{self.a} + {self.b}*sqrt({self.q})"


def exact(x, q: int) -> ExactScalar:
    """Coerce an int, Fraction or ExactScalar to an ExactScalar over ``q``."""
    if isinstance(x, ExactScalar):
        if x.q != q:
            raise FieldMismatch(f"expected q={q}, got q={x.q}")
        return x
    return ExactScalar.rational(x, q)


def is_exact(x) -> bool:
    return isinstance(x, (ExactScalar, int, Fraction))


def conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conj()


# --------------------------------------------------------------------------
# approximate backend

_ctx_lock = threading.Lock()
_contexts: dict[int, mpmath.ctx_mp.MPContext] = {}


def _context(prec: int):
    ctx = _contexts.get(prec)
    if ctx is None:
        with _ctx_lock:
            ctx = _contexts.get(prec)
            if ctx is None:
                ctx = mpmath.MPContext()
                ctx.prec = prec + _GUARD
                _contexts[prec] = ctx
    return ctx


class ApproxScalar:
    """Complex value at ``prec`` bits with an absolute error bound ``err``.

    Every operation propagates the operands' bounds by first-order interval
    rules and adds a rounding term of ``2^(1-prec)`` times the result
    magnitude. Instances are immutable.
    """

    __slots__ = ("value", "err", "prec")

    def __init__(self, value, err=0, prec: int = DEFAULT_PRECISION):
        if prec < 53:
            raise ValueError("precision must be at least 53 bits")
        ctx = _context(prec)
        v = ctx.mpc(value)
        e = ctx.mpf(err)
        if not ctx.isfinite(e) or e < 0:
            raise ValueError(f"error bound must be finite and non-negative, got {err!r}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "err", e)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("ApproxScalar is immutable")

    @property
    def ctx(self):
        return _context(self.prec)

    @property
    def re(self):
        return self.value.real

    @property
    def im(self):
        return self.value.imag

    def _round(self, mag):
        return self.ctx.ldexp(mag, 1 - self.prec)

    def _coerce(self, other) -> "ApproxScalar | None":
        if isinstance(other, ApproxScalar):
            return other
        if isinstance(other, ExactScalar):
            return to_approx(other, self.prec)
        if isinstance(other, bool):
            return None
        if isinstance(other, (int, Fraction)):
            return to_approx(other, self.prec)
        if isinstance(other, (float, complex)):
            return ApproxScalar(other, 0, self.prec)
        return None

    def _new(self, value, err, prec):
        out = object.__new__(ApproxScalar)
        object.__setattr__(out, "value", value)
        object.__setattr__(out, "err", err)
        object.__setattr__(out, "prec", prec)
        return out

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        ctx = _context(prec)
        v = ctx.mpc(self.value) + ctx.mpc(o.value)
        return self._new(v, self.err + o.err + ctx.ldexp(abs(v), 1 - prec), prec)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.value, self.err, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        ctx = _context(prec)
        v = ctx.mpc(self.value) * ctx.mpc(o.value)
        ax, ay = abs(self.value), abs(o.value)
        err = ax * o.err + ay * self.err + self.err * o.err
        if v != 0 or err:
            err += ctx.ldexp(abs(v), 1 - prec)
        return self._new(v, err, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        ctx = _context(prec)
        ay = abs(o.value)
        if ay <= o.err:
            raise ZeroDivisionError("divisor interval contains zero")
        v = ctx.mpc(self.value) / ctx.mpc(o.value)
        err = (self.err + abs(v) * o.err) / (ay - o.err)
        if v != 0 or err:
            err += ctx.ldexp(abs(v), 1 - prec)
        return self._new(v, err, prec)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ApproxScalar(1, 0, self.prec) / (self ** (-n))
        result = ApproxScalar(1, 0, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> "ApproxScalar":
        return self._new(self.ctx.conj(self.value), self.err, self.prec)

    def sqrt(self) -> "ApproxScalar":
        """Principal square root; error bound valid away from the branch cut."""
        ctx = self.ctx
        v = ctx.sqrt(self.value)
        mag = abs(self.value)
        if mag > self.err:
            err = self.err / ctx.sqrt(mag - self.err)
        else:
            err = ctx.sqrt(2 * self.err)
        err += ctx.ldexp(abs(v), 1 - self.prec)
        return self._new(v, err, self.prec)

    def abs_upper(self):
        """Upper bound for the modulus of the true value."""
        return abs(self.value) + self.err

    def __abs__(self):
        return self.abs_upper()

    def contains(self, x, slack=0) -> bool:
        """Whether ``x`` lies within ``err + slack`` of the value."""
        if isinstance(x, ExactScalar):
            x = to_approx(x, self.prec + 64).value
        elif isinstance(x, Fraction):
            x = self.ctx.mpf(x.numerator) / x.denominator
        return abs(self.value - x) <= self.err + slack

    def real_part(self) -> "ApproxScalar":
        return self._new(self.ctx.mpc(self.value.real), self.err, self.prec)

    def __eq__(self, other):
        # bitwise identity of value, bound and precision
        if not isinstance(other, ApproxScalar):
            return NotImplemented
        return self.prec == other.prec and self.value == other.value and self.err == other.err

    def __hash__(self):
        return hash((self.prec, complex(self.value), float(self.err)))

    def __complex__(self):
        return complex(self.value)

    def __repr__(self):
        return f"ApproxScalar({mpmath.nstr(self.value, 20)} +/- {mpmath.nstr(self.err, 3)})"


def to_approx(x, prec: int = DEFAULT_PRECISION) -> ApproxScalar:
    """Embed an exact value into the approximate backend.

    The returned bound satisfies ``err <= 2^(2-prec) |x|``; it is zero when the
    value is exactly representable.
    """
    if prec < 53:
        raise ValueError("precision must be at least 53 bits")
    if isinstance(x, ApproxScalar):
        return x
    ctx = _context(prec)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = Fraction(x)
        v = ctx.mpf(x.numerator) / x.denominator
        if v * x.denominator == x.numerator and _dyadic_fits(x, prec):
            return ApproxScalar(v, 0, prec)
        return ApproxScalar(v, ctx.ldexp(abs(v), 1 - prec), prec)
    if isinstance(x, ExactScalar):
        if x.b == 0:
            return to_approx(x.a, prec)
        a = ctx.mpf(x.a.numerator) / x.a.denominator
        b = ctx.mpf(x.b.numerator) / x.b.denominator
        v = a + b * ctx.sqrt(x.q)
        return ApproxScalar(v, ctx.ldexp(abs(v), 1 - prec), prec)
    if isinstance(x, (float, complex)):
        return ApproxScalar(x, 0, prec)
    raise TypeError(f"cannot convert {x!r} to ApproxScalar")


def _dyadic_fits(x: Fraction, prec: int) -> bool:
    d = x.denominator
    return d & (d - 1) == 0 and abs(x.numerator).bit_length() <= prec


def sum_with_error(terms: Iterable, prec: int | None = None) -> ApproxScalar:
    """Sum in index order, accumulating the error bounds of the terms.

    The order is fixed, so repeated calls on the same sequence agree bitwise.
    """
    terms = list(terms)
    if prec is None:
        prec = min((t.prec for t in terms if isinstance(t, ApproxScalar)), default=DEFAULT_PRECISION)
    total = ApproxScalar(0, 0, prec)
    for t in terms:
        total = total + t
    return total


def exact_sum(terms: Sequence, zero):
    total = zero
    for t in terms:
        total = total + t
    return total


def decimal_string(x, digits: int = 30) -> str:
    """Deterministic decimal rendering used in reports.

    Complex values with a non-negligible imaginary part render as ``re+imj``.
    """
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = ExactScalar.rational(x, 1)
    prec = int(digits * 3.33) + 20
    if isinstance(x, ExactScalar):
        v = to_approx(x, prec).value
    elif isinstance(x, ApproxScalar):
        v = x.value
    else:
        v = mpmath.mpmathify(x)
    re, im = mpmath.re(v), mpmath.im(v)
    out = mpmath.nstr(re, digits, strip_zeros=True, min_fixed=-5, max_fixed=20)
    if im != 0 and abs(im) > abs(v) * mpmath.mpf(2) ** (-digits * 3):
        sign = "+" if im >= 0 else "-"
        out += sign + mpmath.nstr(abs(im), digits, strip_zeros=True) + "j"
    return out
