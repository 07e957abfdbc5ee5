"""Exact model of GL2(Q_p) with rational matrices.

p-adic numbers never appear as digit expansions: every group element and
coset representative needed downstream has rational entries, and valuations
are read off numerators and denominators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "LocalField",
    "GL2Elem",
    "valuation",
    "iwasawa",
    "hecke_cosets",
    "coset_reps",
    "cartan_volume",
    "cartan_index",
    "is_integral_unit",
    "in_iwahori",
    "in_congruence",
    "n_",
    "a_",
    "z_",
    "diag",
    "W",
    "IDENTITY",
    "atkin_lehner_elem",
]

INF = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class LocalField:
    """Q_p with uniformizer ``p`` and an additive character of conductor 0."""

    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")

    @property
    def q(self) -> int:
        return self.p

    @property
    def uniformizer(self) -> Fraction:
        return Fraction(self.p)

    def zeta(self, s: int) -> Fraction:
        """Local zeta factor ``(1 - q^-s)^-1`` at an integer point."""
        return 1 / (1 - Fraction(1, self.q) ** s)


def valuation(x, p: int) -> int | float:
    """p-adic valuation of a rational; ``+inf`` at zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _unit_part(x: Fraction, p: int) -> Fraction:
    return x / Fraction(p) ** valuation(x, p)


@dataclass(frozen=True)
class GL2Elem:
    """An invertible 2x2 matrix ``[[a, b], [c, d]]`` with rational entries."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.det == 0:
            raise ValueError("matrix is singular")

    @classmethod
    def of(cls, a, b, c, d) -> "GL2Elem":
        return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d))

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "GL2Elem") -> "GL2Elem":
        return GL2Elem(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GL2Elem":
        det = self.det
        return GL2Elem(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def min_valuation(self, p: int):
        return min(valuation(e, p) for e in self.entries())

    def __repr__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


IDENTITY = GL2Elem.of(1, 0, 0, 1)
W = GL2Elem.of(0, 1, 1, 0)


def n_(x) -> GL2Elem:
    return GL2Elem.of(1, x, 0, 1)


def a_(y) -> GL2Elem:
    return GL2Elem.of(y, 0, 0, 1)


def z_(c) -> GL2Elem:
    return GL2Elem.of(c, 0, 0, c)


def diag(x, y) -> GL2Elem:
    return GL2Elem.of(x, 0, 0, y)


def atkin_lehner_elem(p: int) -> GL2Elem:
    return GL2Elem.of(0, -1, p, 0)


def is_integral_unit(g: GL2Elem, p: int) -> bool:
    """Membership in K = GL2(Z_p)."""
    return g.min_valuation(p) >= 0 and valuation(g.det, p) == 0


def in_iwahori(g: GL2Elem, p: int) -> bool:
    """Membership in K0(p): integral, unit determinant, lower-left in pZ_p."""
    return is_integral_unit(g, p) and valuation(g.c, p) >= 1


def in_congruence(g: GL2Elem, p: int, m: int) -> bool:
    """Membership in K(p^m) = ker(GL2(Z_p) -> GL2(Z/p^m))."""
    if not is_integral_unit(g, p):
        return False
    if m <= 0:
        return True
    return all(
        valuation(e - t, p) >= m for e, t in zip(g.entries(), (1, 0, 0, 1))
    )


def iwasawa(g: GL2Elem, field: LocalField | int):
    """Return ``(z, x, y, k)`` with ``g = z(z) n(x) a(y) k`` and ``k`` in GL2(Z_p).

    The bottom row decides the branch: when ``v(c) < v(d)`` the compact part
    is ``[[0, -1], [1, d/c]]``, otherwise ``[[1, 0], [c/d, 1]]`` (ties take the
    second branch).
    """
    p = field.p if isinstance(field, LocalField) else field
    c, d = g.c, g.d
    if valuation(c, p) < valuation(d, p):
        k = GL2Elem(Fraction(0), Fraction(-1), Fraction(1), d / c)
        # g k^-1 = [[A, B], [0, D]] with k^-1 = [[d/c, 1], [-1, 0]]
        A = g.a * (d / c) - g.b
        B = g.a
        D = c
    else:
        k = GL2Elem(Fraction(1), Fraction(0), c / d, Fraction(1))
        # k^-1 = [[1, 0], [-c/d, 1]]
        A = g.a - g.b * c / d
        B = g.b
        D = d
    return D, B / D, A / D, k


def cartan_index(g: GL2Elem, p: int) -> int:
    """The r with g in Z K a(p^r) K (elementary-divisor gap)."""
    return valuation(g.det, p) - 2 * g.min_valuation(p)


def hecke_cosets(field: LocalField | int) -> list[GL2Elem]:
    """The p+1 representatives h_i with K diag(p,1) K = disjoint union of h_i K."""
    p = field.p if isinstance(field, LocalField) else field
    reps = [GL2Elem.of(p, x, 0, 1) for x in range(p)]
    reps.append(GL2Elem.of(1, 0, 0, p))
    return reps


@lru_cache(maxsize=None)
def _full_reps(p: int, m: int) -> tuple[GL2Elem, ...]:
    mod = p**m
    out = []
    for a, b, c, d in itertools.product(range(mod), repeat=4):
        if (a * d - b * c) % p:
            out.append(GL2Elem.of(a, b, c, d))
    return tuple(out)


def coset_reps(level: int, kind: str, field: LocalField | int) -> list[GL2Elem]:
    """Coset representatives for subgroups of K.

    ``kind="iwahori"`` gives the q+1 elements ``[[1,0],[x,1]]`` (x mod p) and
    ``w``; they represent both K/K0(p) and K0(p)\\K. ``kind="full"`` gives
    all of GL2(Z/p^level), representing K/K(p^level).
    """
    p = field.p if isinstance(field, LocalField) else field
    if level < 0:
        raise ValueError("level must be non-negative")
    if level == 0:
        return [IDENTITY]
    if kind == "iwahori":
        return [GL2Elem.of(1, 0, x, 1) for x in range(p)] + [W]
    if kind == "full":
        return list(_full_reps(p, level))
    raise ValueError(f"unknown coset kind {kind!r}")


def cartan_volume(r: int, field: LocalField | int) -> int:
    """Volume of K a(p^r) K when vol(K) = 1."""
    q = field.q if isinstance(field, LocalField) else field
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return 1
    return q ** (r - 1) * (q + 1)


def conjugation_level(g: GL2Elem, p: int, m: int) -> int:
    """Smallest M >= 0 (up to the valuation estimate) with K(p^M) inside g K(p^m) g^-1."""
    shift = g.min_valuation(p) + g.inverse().min_valuation(p)
    return max(0, m - shift)
