"""Local representations of trivial central character and their L-factors.

Two families are in scope: unramified principal series, described by a
Satake parameter ``alpha`` (the second parameter is ``1/alpha``) or directly
by the Hecke eigenvalue ``lam = alpha + 1/alpha``, and the Steinberg
representation twisted by an unramified quadratic character.

All L-factors are symmetric under ``alpha -> 1/alpha`` and are computed as
polynomials in ``lam``; this keeps every exact computation inside Q(sqrt q)
even when ``alpha`` itself is irrational (e.g. ``lam = 1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import mpmath

from .numerics import (
    DEFAULT_PRECISION,
    ApproxScalar,
    ExactScalar,
    to_approx,
)
from .padic import LocalField

__all__ = [
    "Unramified",
    "Steinberg",
    "LocalRepr",
    "PoleAtEvaluationPoint",
    "SteinbergHasNoSphericalEigenvalue",
    "NonUnitaryParameter",
    "hecke_eigenvalue",
    "standard_L",
    "adjoint_L_at_1",
    "triple_L_half",
    "atkin_lehner_sign",
    "q_power",
    "zeta",
]


class PoleAtEvaluationPoint(ZeroDivisionError):
    """An L-factor was evaluated at one of its poles."""


class SteinbergHasNoSphericalEigenvalue(ValueError):
    """The Steinberg representation has no K-fixed vector."""


class NonUnitaryParameter(ValueError):
    """Satake parameter outside the unitary range without an explicit override."""


def _prime_field(q: int) -> LocalField | None:
    try:
        return LocalField(q)
    except ValueError:
        return None


def zeta(q: int, s: int) -> Fraction:
    return 1 / (1 - Fraction(1, q) ** s)


def q_power(q: int, s) -> ExactScalar:
    """``q^(-s)`` for half-integral ``s`` as an exact scalar."""
    s = Fraction(s)
    if (2 * s).denominator != 1:
        raise ValueError(f"evaluation point must be half-integral, got {s}")
    return ExactScalar.inv_sqrt_q(q) ** int(2 * s)


def _is_zero(x) -> bool:
    if isinstance(x, ApproxScalar):
        return abs(x.value) <= x.err
    return not x


@dataclass(frozen=True)
class Unramified:
    """Unramified principal series ``mu |.|^0 + mu^-1`` with ``mu(p) = alpha``.

    Construct with :meth:`from_satake` or :meth:`from_hecke`. ``hecke`` is an
    :class:`ExactScalar` in the exact backend and an :class:`ApproxScalar`
    otherwise; ``alpha`` is kept when it is known (rational or approximate).
    """

    q: int
    hecke: Union[ExactScalar, ApproxScalar]
    alpha: Union[Fraction, ApproxScalar, None] = None
    non_unitary: bool = False
    field: LocalField | None = field(default=None, compare=False)

    kind = "unramified"
    conductor_exponent = 0

    @classmethod
    def from_satake(cls, alpha, q: int, *, allow_nonunitary: bool = False,
                    prec: int = DEFAULT_PRECISION) -> "Unramified":
        if isinstance(alpha, (int, Fraction)) and not isinstance(alpha, bool):
            alpha = Fraction(alpha)
            if alpha == 0:
                raise ValueError("Satake parameter must be non-zero")
            lam = ExactScalar.rational(alpha + 1 / alpha, q)
        else:
            alpha = alpha if isinstance(alpha, ApproxScalar) else ApproxScalar(complex(alpha), 0, prec)
            lam = alpha + 1 / alpha
        unitary = _satake_unitary(alpha, q)
        if not unitary and not allow_nonunitary:
            raise NonUnitaryParameter(f"alpha={alpha!r} is not unitary for q={q}")
        return cls(q, lam, alpha, not unitary, _prime_field(q))

    @classmethod
    def from_hecke(cls, lam, q: int, *, allow_nonunitary: bool = False) -> "Unramified":
        """Exact representation from a rational (or Q(sqrt q)) Hecke eigenvalue."""
        if isinstance(lam, ApproxScalar):
            raise TypeError("use from_satake for approximate parameters")
        lam = lam if isinstance(lam, ExactScalar) else ExactScalar.rational(lam, q)
        unitary = lam * lam * q < (q + 1) ** 2
        if not unitary and not allow_nonunitary:
            raise NonUnitaryParameter(f"lambda={lam} is outside the unitary range for q={q}")
        alpha = None
        disc = lam * lam - 4
        if lam.is_rational() and disc.sign() >= 0:
            try:
                root = disc.sqrt()
            except ValueError:
                root = None
            if root is not None and root.is_rational():
                alpha = (lam.a + root.a) / 2
        return cls(q, lam, alpha, not unitary, _prime_field(q))

    @property
    def backend(self) -> str:
        return "exact" if isinstance(self.hecke, ExactScalar) else "approx"

    @property
    def prec(self) -> int:
        return self.hecke.prec if isinstance(self.hecke, ApproxScalar) else DEFAULT_PRECISION

    @property
    def is_tempered(self) -> bool:
        if isinstance(self.hecke, ExactScalar):
            return self.hecke * self.hecke <= 4
        a = self.alpha
        return abs(abs(a.value) - 1) <= a.err * 4 + mpmath.mpf(2) ** (-a.prec // 2)

    def one(self):
        if self.backend == "exact":
            return ExactScalar.rational(1, self.q)
        return ApproxScalar(1, 0, self.prec)

    def scalar(self, x):
        """Lift an exact constant into this representation's backend."""
        if self.backend == "exact":
            return x if isinstance(x, ExactScalar) else ExactScalar.rational(x, self.q)
        return to_approx(x, self.prec)

    def satake_roots(self, prec: int | None = None):
        """Numerical ``(alpha, 1/alpha)``; used for Macdonald's formula and bounds."""
        prec = prec or self.prec
        if isinstance(self.alpha, ApproxScalar):
            a = self.alpha
            return a, 1 / a
        if self.alpha is not None:
            a = to_approx(self.alpha, prec)
            return a, 1 / a
        lam = to_approx(self.hecke, prec)
        ctx = lam.ctx
        disc = lam.value * lam.value - 4
        root = ctx.sqrt(ctx.mpc(disc))
        a = ApproxScalar((lam.value + root) / 2, 0, prec)
        return a, 1 / a


@dataclass(frozen=True)
class Steinberg:
    """Steinberg representation twisted by the unramified character with ``chi(p) = twist``."""

    q: int
    twist: int = 1
    prec: int = DEFAULT_PRECISION
    field: LocalField | None = field(default=None, compare=False)

    kind = "steinberg"
    conductor_exponent = 1
    non_unitary = False
    backend = "exact"

    def __post_init__(self):
        if self.twist not in (1, -1):
            raise ValueError("Steinberg twist must be +1 or -1 (unramified quadratic)")
        if self.field is None:
            object.__setattr__(self, "field", _prime_field(self.q))

    def one(self):
        return ExactScalar.rational(1, self.q)

    def scalar(self, x):
        return x if isinstance(x, ExactScalar) else ExactScalar.rational(x, self.q)


LocalRepr = Union[Unramified, Steinberg]


def hecke_eigenvalue(r: LocalRepr):
    """Eigenvalue of the normalized T_p on the spherical vector: ``alpha + 1/alpha``."""
    if isinstance(r, Steinberg):
        raise SteinbergHasNoSphericalEigenvalue("Steinberg has no spherical vector")
    return r.hecke


def _invert(x, what: str):
    if _is_zero(x):
        raise PoleAtEvaluationPoint(f"{what} has a pole at the evaluation point")
    return 1 / x


def standard_L(r: LocalRepr, s) -> ExactScalar | ApproxScalar:
    """Standard L-factor at a half-integral point."""
    x = q_power(r.q, s)
    if isinstance(r, Steinberg):
        denom = 1 - r.twist * x * ExactScalar.inv_sqrt_q(r.q)
        return _invert(denom, "L(St, s)")
    x = r.scalar(x)
    denom = 1 - r.hecke * x + x * x
    return _invert(denom, "L(pi, s)")


def adjoint_L_at_1(r: LocalRepr):
    """``L(pi, Ad, 1)``."""
    q = r.q
    if isinstance(r, Steinberg):
        return ExactScalar.rational(1 / (1 - Fraction(1, q * q)), q)
    lam = r.hecke
    inner = 1 - (lam * lam - 2) * r.scalar(Fraction(1, q)) + r.scalar(Fraction(1, q * q))
    denom = inner * r.scalar(1 - Fraction(1, q))
    return _invert(denom, "L(pi, Ad, s)")


def _chebyshev_sums(lam, one, n: int):
    """``[alpha^m + alpha^-m for m in range(n)]`` as polynomials in ``lam``."""
    out = [2 * one, lam]
    while len(out) < n:
        out.append(lam * out[-1] - out[-2])
    return out[:n]


def _pair_symmetric(coeffs, lam, one):
    """Coefficients of ``f(B alpha) f(B / alpha)`` in B, given those of f."""
    n = len(coeffs)
    P = _chebyshev_sums(lam, one, n)
    out = [0 * one for _ in range(2 * n - 1)]
    for j in range(n):
        out[2 * j] = out[2 * j] + coeffs[j] * coeffs[j]
        for k in range(j + 1, n):
            out[j + k] = out[j + k] + coeffs[j] * coeffs[k] * P[k - j]
    return out


def triple_L_half(r1: LocalRepr, r2: LocalRepr, r3: LocalRepr):
    """``L(pi1 x pi2 x pi3, 1/2)`` for three unramified or one Steinberg and two unramified."""
    reps = [r1, r2, r3]
    qs = {r.q for r in reps}
    if len(qs) != 1:
        raise ValueError("all three representations must share q")
    q = qs.pop()
    st = [r for r in reps if isinstance(r, Steinberg)]
    ur = [r for r in reps if not isinstance(r, Steinberg)]
    if len(st) > 1:
        raise ValueError("at most one Steinberg factor is supported")
    backend = "approx" if any(r.backend == "approx" for r in ur) else "exact"
    if backend == "approx":
        prec = min(r.prec for r in ur)
        one = ApproxScalar(1, 0, prec)
        lift = lambda x: to_approx(x, prec) if not isinstance(x, ApproxScalar) else x
    else:
        one = ExactScalar.rational(1, q)
        lift = lambda x: x if isinstance(x, ExactScalar) else ExactScalar.rational(x, q)
    lams = [lift(r.hecke) for r in ur]
    if st:
        # St_chi contributes the single parameter chi q^(-1/2); at s=1/2 it gives chi/q
        c = lift(ExactScalar.rational(Fraction(st[0].twist, q), q))
        poly = [one, -c * lams[1], c * c]
        poly = _pair_symmetric(poly, lams[0], one)
    else:
        x = lift(ExactScalar.inv_sqrt_q(q))
        poly = [one, -x * lams[2], x * x]
        poly = _pair_symmetric(poly, lams[1], one)
        poly = _pair_symmetric(poly, lams[0], one)
    total = 0 * one
    for c in poly:
        total = total + c
    return _invert(total, "L(pi1 x pi2 x pi3, s)")


def atkin_lehner_sign(r: Steinberg) -> int:
    """Eigenvalue of ``[[0,-1],[p,0]]`` on the new vector, read off the induced model."""
    if not isinstance(r, Steinberg):
        raise ValueError("Atkin-Lehner sign is defined here for Steinberg representations")
    from .induced import atkin_lehner_apply, newform_vector

    v = newform_vector(r)
    eta = atkin_lehner_apply(v).ratio_to(v)
    if not (isinstance(eta, ExactScalar) and eta.is_rational() and eta.a in (1, -1)):
        raise ArithmeticError(f"Atkin-Lehner scalar {eta} is not a sign")
    return int(eta.a)


def _satake_unitary(alpha, q: int) -> bool:
    if isinstance(alpha, Fraction):
        if abs(alpha) == 1:
            return True
        # complementary series: q^(-1/2) < |alpha| < q^(1/2)
        return alpha * alpha * q > 1 and alpha * alpha < q
    a = alpha
    mod = abs(a.value)
    tol = a.err * 4 + mpmath.mpf(2) ** (-(a.prec // 2))
    if abs(mod - 1) <= tol:
        return True
    if abs(a.value.imag) <= tol:
        return mod * mod * q > 1 and mod * mod < q
    return False
