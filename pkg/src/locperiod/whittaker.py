"""Whittaker model: torus values, Jacquet-integral evaluation, and the
normalized inner product.

The additive character has conductor 0: ``psi(x) = exp(2 pi i {x}_p)``.
Inner products use the unit-integral reduction, so a translate
``rho(h) W`` only enters through the data ``(X, v(t), j)`` read off the
Iwasawa decomposition of ``h``; the resulting valuation series are linear
recurrences and their tails are summed in closed form.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache

from .numerics import ApproxScalar, ExactScalar, NotRepresentable, to_approx
from .padic import GL2Elem, IDENTITY, W as WEYL, a_, iwasawa, valuation
from .repn import LocalRepr, Steinberg, Unramified, adjoint_L_at_1, zeta

__all__ = [
    "WhittakerVector",
    "DivergentSeries",
    "NonconvergentIntegral",
    "torus_value",
    "torus_abs_sq",
    "evaluate",
    "evaluate_raw",
    "theta_inner",
    "psi",
    "jacquet_integral",
    "pair_series",
    "coefficient_key",
    "torus_sequences",
]


class DivergentSeries(ArithmeticError):
    pass


class NonconvergentIntegral(ArithmeticError):
    pass


def _conj(x):
    return x.conj() if isinstance(x, ApproxScalar) else x


def _is_zero(x) -> bool:
    if isinstance(x, ApproxScalar):
        return abs(x.value) <= x.err
    return not x


def _frac_part(x: Fraction, p: int) -> tuple[int, int]:
    """``(j, e)`` with ``{x}_p = j / p^e`` and ``0 <= j < p^e``."""
    x = Fraction(x)
    v = valuation(x, p)
    if v >= 0:
        return 0, 0
    e = -v
    mod = p**e
    unit_den = x.denominator // mod
    return x.numerator * pow(unit_den, -1, mod) % mod, e


def psi(x, p: int, prec: int = 128):
    """The additive character of conductor 0; exact when its value is rational."""
    j, e = _frac_part(Fraction(x), p)
    if j == 0:
        return ExactScalar.rational(1, p)
    if 2 * j == p**e:
        return ExactScalar.rational(-1, p)
    return _root_of_unity(j, p**e, prec)


def _root_of_unity(j: int, n: int, prec: int) -> ApproxScalar:
    z = ApproxScalar(0, 0, prec)
    ctx = z.ctx
    val = ctx.expjpi(ctx.mpf(2 * j) / n)
    return ApproxScalar(val, ctx.ldexp(1, 2 - prec), prec)


def _cyclotomic_reduce(coeffs: dict[int, object], p: int, E: int) -> dict[int, object]:
    """Rewrite ``sum c_j zeta^j`` (zeta of order p^E) in the standard basis.

    Exponents whose top base-p digit is ``p-1`` are eliminated using
    ``sum_i zeta^(j0 + i p^(E-1)) = 0``.
    """
    if E == 0:
        return dict(coeffs)
    step = p ** (E - 1)
    out = {}
    for j, c in coeffs.items():
        if j // step == p - 1:
            j0 = j % step
            for i in range(p - 1):
                k = j0 + i * step
                out[k] = out.get(k, 0) - c
        else:
            out[j] = out.get(j, 0) + c
    return {j: c for j, c in out.items() if not (not isinstance(c, ApproxScalar) and c == 0)}


def _character_sum(coeffs: dict[tuple[int, int], object], p: int, prec: int, zero):
    """Evaluate ``sum c * psi-values`` given as ``{(j, e): c}``."""
    if not coeffs:
        return zero
    E = max(e for _, e in coeffs)
    flat: dict[int, object] = {}
    for (j, e), c in coeffs.items():
        k = j * p ** (E - e)
        flat[k] = flat.get(k, 0) + c
    reduced = _cyclotomic_reduce(flat, p, E)
    exact = all(not isinstance(c, ApproxScalar) for c in reduced.values())
    if exact and set(reduced) <= {0}:
        return reduced.get(0, zero) + zero
    total = zero
    for k, c in sorted(reduced.items()):
        total = total + c * _root_of_unity(k, p**E, prec) if k else total + c
    return total


# Jacquet integral

def jacquet_integral(f, t: Fraction):
    """``J(f, t) = int_F f(w n(u)) psi(-t u) du`` for an induced vector ``f``.

    ``|u| <= p^(T-1)`` is summed over residues modulo ``p^L``, where the
    integrand is locally constant; on ``v(u) = -k`` with ``k >= T`` the
    integrand is ``rho^(2k) f(1)`` and the shell integral of ``psi`` is
    ``q^k (1 - 1/q)``, ``-q^(k-1)`` or 0, so the tail is a finite sum.
    """
    p = f.p
    prec = getattr(f.repr, "prec", 128) if f.repr is not None else 128
    M = f.level
    n = valuation(t, p)
    T = max(M, 1)
    L = max(M, -n, 0)
    zero = 0 * f[("A", 0)]
    coeffs: dict[tuple[int, int], object] = {}
    weight = ExactScalar.rational(Fraction(1, p**L), p)
    for a in range(p ** (T - 1 + L)):
        u = Fraction(a, p ** (T - 1))
        val = f(WEYL @ GL2Elem.of(1, u, 0, 1))
        key = _frac_part(-t * u, p)
        coeffs[key] = coeffs.get(key, 0) + val * weight
    middle = _character_sum(coeffs, p, prec, zero)
    tail = zero
    f1 = f[("A", 0)]
    rho2 = f.rho * f.rho
    for k in range(T, n + 2):
        if n - k >= 0:
            shell = Fraction(p**k) * (1 - Fraction(1, p))
        else:
            shell = -Fraction(p ** (k - 1))
        tail = tail + rho2**k * f1 * ExactScalar.rational(shell, p)
    return middle + tail


class WhittakerVector:
    """``rho(h) W`` for the new vector ``W`` of ``repr``; ``h`` defaults to 1.

    Values are normalized so that ``theta_inner(W, W) = 1`` for the new
    vector. For Steinberg the normalizing constant is only known through its
    square ``scale_sq``; :meth:`scale` returns the root, exactly when it lies
    in Q(sqrt q).
    """

    def __init__(self, repr: LocalRepr, h: GL2Elem = IDENTITY):
        self.repr = repr
        self.h = h
        self._cache: dict = {}
        self._lock = threading.Lock()

    def translated(self, g: GL2Elem | None = None, *, j: int = 0) -> "WhittakerVector":
        """``rho(g) self``; ``j`` is shorthand for ``g = diag(1, p^j)``."""
        if g is None:
            g = GL2Elem.of(1, 0, 0, Fraction(self.repr.q) ** j)
        return WhittakerVector(self.repr, g @ self.h)

    @property
    def scale_sq(self):
        if isinstance(self.repr, Steinberg):
            q = self.repr.q
            return ExactScalar.rational(zeta(q, 1) / zeta(q, 2), q)
        return self.repr.one()

    def scale(self):
        s2 = self.scale_sq
        if isinstance(s2, ApproxScalar):
            return s2.sqrt()
        try:
            return s2.sqrt()
        except NotRepresentable:
            return to_approx(s2, self.repr.prec).sqrt()

    def cached(self, key, compute):
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            # idempotent: concurrent writers store equal values
            self._cache.setdefault(key, value)
        return self._cache[key]

    def __repr__(self):
        return f"WhittakerVector({self.repr.kind}, h={self.h!r})"


def _induced_new(r: LocalRepr):
    from .induced import newform_vector

    return newform_vector(r)


def _raw_at(r: LocalRepr, g: GL2Elem):
    """New vector at g, normalized by its value at 1 (Jacquet route)."""
    from .induced import translate

    f = _induced_new(r)
    p = r.q
    _, x0, t, k = iwasawa(g, p)
    fk = translate(f, k)
    sigma = 1 / (p * f.rho)
    j1 = jacquet_integral(f, Fraction(1))
    if _is_zero(j1):
        raise NonconvergentIntegral("Jacquet integral vanishes at the identity")
    val = sigma ** valuation(t, p) * jacquet_integral(fk, t) / j1
    return psi(x0, p, r.prec) * val


def evaluate_raw(W: WhittakerVector, g: GL2Elem):
    """``W(g)`` with the new vector normalized by ``W(1) = 1``."""
    return W.cached(("raw", g), lambda: _raw_at(W.repr, g @ W.h))


def evaluate(W: WhittakerVector, g: GL2Elem):
    """``W(g)`` in the normalization where the new vector has norm 1."""
    return W.scale() * evaluate_raw(W, g)


# torus values and the pair formula

class _RecSeq:
    """Sequence ``D(n)``, zero for ``n < lo``, a linear recurrence from ``lo`` on.

    ``order == 1``: ``D(lo + i) = init * root^i``.
    ``order == 2``: ``D(n+1) = s D(n) - pr D(n-1)`` with ``D(lo-1) = 0``.
    """

    def __init__(self, lo, order, init, s=None, pr=None, root=None):
        self.lo, self.order, self.init = lo, order, init
        self.s, self.pr, self.root = s, pr, root
        self._vals = [init]
        self._lock = threading.Lock()
        if order == 2:
            self._vals.append(s * init)

    def __call__(self, n: int):
        i = n - self.lo
        if i < 0:
            return 0 * self.init
        if self.order == 1:
            return self.init * self.root**i
        with self._lock:
            while len(self._vals) <= i:
                self._vals.append(self.s * self._vals[-1] - self.pr * self._vals[-2])
            return self._vals[i]

    def conj(self) -> "_RecSeq":
        if self.order == 1:
            return _RecSeq(self.lo, 1, _conj(self.init), root=_conj(self.root))
        return _RecSeq(self.lo, 2, _conj(self.init), s=_conj(self.s), pr=_conj(self.pr))


def _product_recurrence(A: _RecSeq, B: _RecSeq):
    """Coefficients ``c_1..c_d`` of a recurrence satisfied by ``A(n) B(n)``."""
    if A.order == 1 and B.order == 1:
        return [A.root * B.root]
    if A.order == 2 and B.order == 1:
        A, B = B, A
    if A.order == 1:
        r = A.root
        # x^2 - r s x + r^2 p
        return [r * B.s, -(r * r * B.pr)]
    s1, p1, s2, p2 = A.s, A.pr, B.s, B.pr
    return [
        s1 * s2,
        -(s1 * s1 * p2 + s2 * s2 * p1 - 2 * p1 * p2),
        s1 * s2 * p1 * p2,
        -(p1 * p1 * p2 * p2),
    ]


def _recurrent_tail(terms, coeffs, zero):
    """Sum of a recurrent sequence from its first ``d`` terms via ``P(1)/Q(1)``."""
    d = len(coeffs)
    num = zero
    for k in range(d):
        acc = terms[k]
        for i in range(1, k + 1):
            acc = acc - coeffs[i - 1] * terms[k - i]
        num = num + acc
    den = 1 + zero
    for c in coeffs:
        den = den - c
    if _is_zero(den):
        raise DivergentSeries("the valuation series has a root at 1")
    # unitary data have all roots inside the unit disc; for non-unitary data
    # the same rational function is the analytic continuation
    return num / den


@lru_cache(maxsize=None)
def torus_sequences(r: LocalRepr):
    """``(D0, D1)`` with ``D0(n) = W(a(p^n))`` and ``D1(n) = W(a(p^n) w)``, raw normalization."""
    q = r.q
    if isinstance(r, Unramified):
        isq = r.scalar(ExactScalar.inv_sqrt_q(q))
        s = r.hecke * isq
        pr = r.scalar(Fraction(1, q))
        d0 = _RecSeq(0, 2, r.one(), s=s, pr=pr)
        return d0, d0
    root = ExactScalar.rational(Fraction(r.twist, q), q)
    d0 = _RecSeq(0, 1, r.one(), root=root)
    eta = steinberg_whittaker_sign(r)
    d1 = _RecSeq(-1, 1, r.one() * eta, root=root)
    return d0, d1


_SIGN_CACHE: dict = {}


def steinberg_whittaker_sign(r: Steinberg) -> int:
    """``W(a(p^-1) w) / W(1)`` for the Steinberg new vector, by the Jacquet integral."""
    key = (r.q, r.twist)
    if key not in _SIGN_CACHE:
        val = _raw_at(r, a_(Fraction(1, r.q)) @ WEYL)
        if not isinstance(val, ExactScalar) or val not in (1, -1):
            raise ArithmeticError(f"unexpected Steinberg value at a(1/p)w: {val}")
        _SIGN_CACHE[key] = int(val.a)
    return _SIGN_CACHE[key]


def torus_value(W: WhittakerVector, r: int):
    """``W(a(p^r))`` for a new vector, in the norm-1 normalization."""
    rep = W.repr
    if isinstance(rep, Unramified):
        return torus_sequences(rep)[0](r)
    d0 = rep.one() * ExactScalar.rational(Fraction(rep.twist, rep.q), rep.q) ** r if r >= 0 else 0 * rep.one()
    return W.scale() * d0


def torus_abs_sq(W: WhittakerVector, r: int):
    """``|W(a(p^r))|^2``; exact for Steinberg even when ``W(1)`` is irrational."""
    rep = W.repr
    d0 = torus_sequences(rep)[0](r)
    return W.scale_sq * d0 * _conj(d0)


def _pair_data(h: GL2Elem, p: int):
    """``(X, v(t), j)``: ``(rho(h)W)(a(y)) = psi(y X) D_j(v(y) + v(t))``."""
    _, x, t, k = iwasawa(h, p)
    if valuation(k.c, p) >= 1:
        return x, valuation(t, p), 0
    return x + t * k.a / k.c, valuation(t, p), 1


def _unit_integral(m: int, q: int) -> Fraction:
    if m >= 0:
        return Fraction(1)
    if m == -1:
        return Fraction(-1, q - 1)
    return Fraction(0)


def theta_inner(W1: WhittakerVector, W2: WhittakerVector):
    """Normalized inner product ``zeta(2)/(zeta(1) L(Ad,1)) int W1 conj(W2) d^x y``."""
    r = W1.repr
    if W2.repr != r:
        raise ValueError("inner product of vectors from different representations")
    key = ("theta", W2.h)
    return W1.cached(key, lambda: _theta(W1, W2))


def _theta(W1: WhittakerVector, W2: WhittakerVector):
    r = W1.repr
    X1, v1, j1 = _pair_data(W1.h, r.q)
    X2, v2, j2 = _pair_data(W2.h, r.q)
    return pair_series(r, v1, j1, v2, j2, valuation(X1 - X2, r.q))


def coefficient_key(g: GL2Elem, p: int) -> tuple:
    """Key of ``theta(rho(g) W, W)`` for the new vector: ``(v(t), j, v(X))``."""
    X, vt, j = _pair_data(g, p)
    return vt, j, valuation(X, p)


@lru_cache(maxsize=None)
def pair_series(r: LocalRepr, v1: int, j1: int, v2: int, j2: int, e):
    """``N sum_n phi(n+e) D_j1(n+v1) conj D_j2(n+v2)``, tails in closed form."""
    q = r.q
    seqs = torus_sequences(r)
    A = seqs[j1]
    B = seqs[j2].conj()
    zero = 0 * r.one()
    lo = max(A.lo - v1, B.lo - v2)
    start = lo if e == float("inf") else max(lo, -e)
    total = zero
    if e != float("inf"):
        for n in range(max(lo, -e - 1), start):
            total = total + A(n + v1) * B(n + v2) * r.scalar(_unit_integral(n + e, q))
    coeffs = _product_recurrence(A, B)
    terms = [A(start + i + v1) * B(start + i + v2) for i in range(len(coeffs))]
    total = total + _recurrent_tail(terms, coeffs, zero)
    norm = r.scalar(zeta(q, 2) / zeta(q, 1)) / adjoint_L_at_1(r)
    return norm * WhittakerVector(r).scale_sq * total
