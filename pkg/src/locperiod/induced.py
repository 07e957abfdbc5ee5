"""Induced-model realization of unramified principal series and Steinberg.

A vector is a function ``f`` on GL2(Q_p) with ``f(z n(x) a(y) g) = rho^v(y) f(g)``
for units in ``y`` ignored, where ``rho = chi1(p) |p|^(1/2)``. Such an ``f`` is
fixed by its restriction to K, which factors through (B n K)\\K = P^1(Z_p).
At level m it is stored on P^1(Z/p^m), keyed by the bottom row of ``k``:

* ``('A', c)`` for the row ``(c, 1)``, representative ``[[1, 0], [c, 1]]``;
* ``('B', e)`` for the row ``(1, e)`` with ``p | e``, representative ``[[0, -1], [1, e]]``.

These are exactly the compact parts produced by :func:`padic.iwasawa`.
"""

from __future__ import annotations

from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

from .numerics import ApproxScalar, ExactScalar, NotRepresentable, to_approx
from .padic import (
    GL2Elem,
    atkin_lehner_elem,
    conjugation_level,
    diag,
    hecke_cosets,
    iwasawa,
    valuation,
)
from .repn import LocalRepr, Steinberg, Unramified

__all__ = [
    "InducedVector",
    "NotUnramified",
    "NotIwahoriInvariant",
    "NotProportional",
    "DegenerateBasis",
    "UnsupportedInnerProduct",
    "spherical_vector",
    "newform_vector",
    "translate",
    "hecke_apply",
    "atkin_lehner_apply",
    "inner_product",
    "k0_basis",
    "inducing_ratio",
    "keys_at_level",
    "constant_function",
    "key_of",
    "key_rep",
]

Key = tuple


class NotUnramified(ValueError):
    pass


class NotIwahoriInvariant(ValueError):
    pass


class NotProportional(ValueError):
    pass


class DegenerateBasis(ZeroDivisionError):
    pass


class UnsupportedInnerProduct(NotImplementedError):
    pass


def _mod(x: Fraction, p: int, m: int) -> int:
    mod = p**m
    return x.numerator * pow(x.denominator, -1, mod) % mod


def keys_at_level(p: int, m: int) -> list[Key]:
    if m == 0:
        return [("A", 0)]
    mod = p**m
    return [("A", c) for c in range(mod)] + [("B", e) for e in range(0, mod, p)]


def key_of(k: GL2Elem, p: int, m: int) -> Key:
    """Class in P^1(Z/p^m) of the bottom row of an element of K."""
    if m == 0:
        return ("A", 0)
    c, d = k.c, k.d
    if valuation(c, p) < valuation(d, p):
        return ("B", _mod(d / c, p, m))
    return ("A", _mod(c / d, p, m))


def key_rep(key: Key) -> GL2Elem:
    tag, x = key
    if tag == "A":
        return GL2Elem.of(1, 0, x, 1)
    return GL2Elem.of(0, -1, 1, x)


def _project(key: Key, p: int, m: int) -> Key:
    if m == 0:
        return ("A", 0)
    return (key[0], key[1] % p**m)


def inducing_ratio(r: LocalRepr):
    """``rho`` with ``f(a(p) g) = rho f(g)``."""
    if isinstance(r, Steinberg):
        return ExactScalar.rational(Fraction(r.twist, r.q), r.q)
    if r.field is None:
        raise ValueError("the induced model needs q prime")
    alpha = r.alpha
    if alpha is None:
        alpha, _ = r.satake_roots()
    if isinstance(alpha, Fraction):
        return alpha * ExactScalar.inv_sqrt_q(r.q)
    return alpha * to_approx(ExactScalar.inv_sqrt_q(r.q), alpha.prec)


def _same(x, y) -> bool:
    if isinstance(x, ApproxScalar) or isinstance(y, ApproxScalar):
        x, y = to_approx(x), to_approx(y)
        return x.value == y.value and x.err == y.err
    return x == y


def _is_zero(x) -> bool:
    if isinstance(x, ApproxScalar):
        return abs(x.value) <= x.err
    return not x


class InducedVector:
    """A vector of an induced representation, stored on P^1(Z/p^level)."""

    __slots__ = ("repr", "p", "rho", "level", "_values")

    def __init__(self, repr: LocalRepr | None, p: int, rho, level: int, values: Mapping):
        expected = keys_at_level(p, level)
        if set(values) != set(expected):
            raise ValueError(f"values must be given on all {len(expected)} keys of level {level}")
        object.__setattr__(self, "repr", repr)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "_values", MappingProxyType({k: values[k] for k in expected}))

    def __setattr__(self, name, value):
        raise AttributeError("InducedVector is immutable")

    @property
    def values(self) -> Mapping:
        return self._values

    def __getitem__(self, key: Key):
        return self._values[_project(key, self.p, self.level)]

    def __call__(self, g: GL2Elem):
        _, _, y, k = iwasawa(g, self.p)
        return self.rho ** valuation(y, self.p) * self._values[key_of(k, self.p, self.level)]

    def at_level(self, m: int) -> "InducedVector":
        if m < self.level:
            raise ValueError("cannot lower the level by lifting")
        vals = {key: self[key] for key in keys_at_level(self.p, m)}
        return InducedVector(self.repr, self.p, self.rho, m, vals)

    def reduced(self) -> "InducedVector":
        """Same function at the smallest level where it is still well defined."""
        v = self
        while v.level > 0:
            m = v.level - 1
            fibre: dict = {}
            ok = True
            for key, val in v._values.items():
                base = _project(key, v.p, m)
                if base in fibre:
                    if not _same(fibre[base], val):
                        ok = False
                        break
                else:
                    fibre[base] = val
            if not ok:
                break
            v = InducedVector(v.repr, v.p, v.rho, m, fibre)
        return v

    def _combine(self, other: "InducedVector", op) -> "InducedVector":
        if other.p != self.p or not _same(other.rho, self.rho):
            raise ValueError("vectors live in different representations")
        m = max(self.level, other.level)
        a, b = self.at_level(m), other.at_level(m)
        vals = {key: op(a._values[key], b._values[key]) for key in a._values}
        return InducedVector(self.repr, self.p, self.rho, m, vals).reduced()

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def scale(self, c) -> "InducedVector":
        vals = {key: c * val for key, val in self._values.items()}
        return InducedVector(self.repr, self.p, self.rho, self.level, vals)

    __rmul__ = scale

    def is_iwahori_invariant(self) -> bool:
        if self.level > 1:
            return False
        if self.level == 0:
            return True
        rest = [val for key, val in self._values.items() if key != ("A", 0)]
        return all(_same(rest[0], val) for val in rest[1:])

    def ratio_to(self, other: "InducedVector"):
        """The scalar c with ``self == c * other``; raises :class:`NotProportional`."""
        m = max(self.level, other.level)
        a, b = self.at_level(m), other.at_level(m)
        c = None
        for key, bv in b._values.items():
            if not _is_zero(bv):
                c = a._values[key] / bv
                break
        if c is None:
            raise NotProportional("reference vector is zero")
        for key, bv in b._values.items():
            diff = a._values[key] - c * bv
            if not _is_zero(diff):
                raise NotProportional(f"vectors differ off the line at {key}")
        return c

    def __repr__(self):
        kind = getattr(self.repr, "kind", "custom")
        return f"InducedVector({kind}, p={self.p}, level={self.level})"


def spherical_vector(r: LocalRepr) -> InducedVector:
    if not isinstance(r, Unramified):
        raise NotUnramified("only unramified representations have a spherical vector")
    one = r.one()
    return InducedVector(r, r.q, inducing_ratio(r), 0, {("A", 0): one})


def newform_vector(r: LocalRepr) -> InducedVector:
    """Spherical vector, or the Steinberg new vector: 1 on K0(p) and -1/q off it."""
    if isinstance(r, Unramified):
        return spherical_vector(r)
    p = r.q
    vals = {key: ExactScalar.rational(Fraction(-1, p), p) for key in keys_at_level(p, 1)}
    vals[("A", 0)] = r.one()
    return InducedVector(r, p, inducing_ratio(r), 1, vals)


def constant_function(p: int) -> InducedVector:
    """The constant function 1 on G (rho = 1); used for degree checks only."""
    return InducedVector(None, p, ExactScalar.rational(1, p), 0, {("A", 0): ExactScalar.rational(1, p)})


def translate(v: InducedVector, g: GL2Elem) -> InducedVector:
    """Right translate ``x -> v(x g)``."""
    m = conjugation_level(g, v.p, v.level)
    vals = {key: v(key_rep(key) @ g) for key in keys_at_level(v.p, m)}
    return InducedVector(v.repr, v.p, v.rho, m, vals).reduced()


def hecke_apply(v: InducedVector) -> InducedVector:
    """``(1/sqrt p) sum_i translate(v, h_i)`` over the p+1 Hecke cosets."""
    reps = hecke_cosets(v.p)
    total = translate(v, reps[0])
    for h in reps[1:]:
        total = total + translate(v, h)
    return total.scale(ExactScalar.inv_sqrt_q(v.p))


def atkin_lehner_apply(v: InducedVector) -> InducedVector:
    if not v.is_iwahori_invariant():
        raise NotIwahoriInvariant("Atkin-Lehner operator is applied to K0(p)-invariant vectors")
    return translate(v, atkin_lehner_elem(v.p))


# inner products

def _k0_coords(v: InducedVector):
    """Coordinates of a K0(p)-invariant vector in {phi, phi^m} or {new}."""
    if not v.is_iwahori_invariant():
        return None
    x = v[("A", 0)]
    y = v[("B", 0)]
    r = v.repr
    if isinstance(r, Steinberg):
        if not _is_zero(x + v.p * y):
            raise ValueError("vector is not in the Steinberg subrepresentation")
        return (x,)
    rho = v.rho
    det = 1 / rho - rho
    if _is_zero(det):
        raise DegenerateBasis("phi and phi^m are proportional")
    b = (x - y) / det
    a = x - b / rho
    return (a, b)


def _conj(x):
    return x.conj() if isinstance(x, ApproxScalar) else x


def _kappa(r: Unramified):
    from .whittaker import WhittakerVector, theta_inner

    w = WhittakerVector(r)
    return theta_inner(w, w.translated(j=1))


def inner_product(v: InducedVector, w: InducedVector):
    """Invariant inner product transported from the Whittaker model.

    K0(p)-invariant vectors use the Whittaker Gram matrix of {phi, phi^m}
    (resp. the new vector). Other vectors are supported for unitary
    unramified data through the K-integral, which has the same normalization.
    """
    if v.repr != w.repr:
        raise ValueError("inner product of vectors from different representations")
    r = v.repr
    cv, cw = _k0_coords(v), _k0_coords(w)
    if cv is not None and cw is not None:
        if isinstance(r, Steinberg):
            return cv[0] * _conj(cw[0])
        kappa = _kappa(r)
        a, b = cv
        c, d = cw
        return a * _conj(c) + b * _conj(d) + a * _conj(d) * kappa + b * _conj(c) * _conj(kappa)
    if isinstance(r, Unramified) and not r.non_unitary and _unit_modulus(r):
        return _k_integral(v, w)
    raise UnsupportedInnerProduct("general-level inner products need unitary unramified data")


def _unit_modulus(r: Unramified) -> bool:
    if isinstance(r.alpha, Fraction):
        return abs(r.alpha) == 1
    return r.is_tempered


def _k_integral(v: InducedVector, w: InducedVector):
    m = max(v.level, w.level)
    a, b = v.at_level(m), w.at_level(m)
    keys = keys_at_level(v.p, m)
    total = 0
    for key in keys:
        total = a._values[key] * _conj(b._values[key]) + total
    return total * ExactScalar.rational(Fraction(1, len(keys)), v.p)


def k0_basis(r: LocalRepr) -> list[InducedVector]:
    """Orthonormal basis of the K0(p)-fixed space."""
    if isinstance(r, Steinberg):
        return [newform_vector(r)]
    phi = spherical_vector(r)
    phim = translate(phi, diag(1, r.q))
    kappa = inner_product(phi, phim)
    varsigma = 1 - kappa * _conj(kappa)
    if _is_zero(varsigma):
        raise DegenerateBasis("kappa^2 = 1: the K0(p)-fixed space is degenerate")
    try:
        s = varsigma.sqrt()
    except NotRepresentable:
        s = to_approx(varsigma, r.prec).sqrt()
    second = (phim - phi.scale(kappa)).scale(1 / s)
    return [phi, second]

