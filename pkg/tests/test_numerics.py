from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from locperiod.numerics import (
    ApproxScalar,
    ExactScalar,
    FieldMismatch,
    decimal_string,
    sum_with_error,
    to_approx,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=200)
primes = st.sampled_from([2, 3, 5, 7])


def ex(a, b, q):
    return ExactScalar(Fraction(a), Fraction(b), q)


def test_lowest_terms_and_sign():
    x = ex(Fraction(4, -6), 0, 2)
    assert x.a.numerator == -2 and x.a.denominator == 3


def test_mixed_q_is_an_error():
    with pytest.raises(FieldMismatch):
        ex(1, 1, 2) + ex(1, 1, 3)


def test_square_q_folds():
    assert ex(1, 1, 4) == ExactScalar.rational(3, 4)


@given(fractions, fractions, fractions, fractions, primes)
def test_ring_identities(a, b, c, d, q):
    x, y = ex(a, b, q), ex(c, d, q)
    assert (x + y) - y == x
    assert x * y == y * x
    if x:
        assert x * x.inverse() == ExactScalar.rational(1, q)


@given(fractions, fractions, primes)
def test_to_approx_encloses(a, b, q):
    x = ex(a, b, q)
    approx = to_approx(x, 128)
    with mpmath.workprec(400):
        true = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(q)
        assert abs(approx.value - true) <= approx.err


def test_to_approx_examples():
    zero = to_approx(ex(0, 0, 2), 128)
    assert zero.value == 0 and zero.err == 0
    one = to_approx(ex(1, 0, 2), 128)
    assert one.value == 1 and one.err <= mpmath.mpf(2) ** -126
    root = to_approx(ex(0, 1, 2), 128)
    assert root.err <= mpmath.mpf(2) ** -124
    # bisection oracle for sqrt(2)
    lo, hi = Fraction(1), Fraction(2)
    for _ in range(140):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if mid * mid < 2 else (lo, mid)
    with mpmath.workprec(300):
        assert abs(root.value - mpmath.mpf(lo.numerator) / lo.denominator) <= root.err + mpmath.mpf(2) ** -139


def test_sum_with_error_examples():
    empty = sum_with_error([])
    assert empty.value == 0 and empty.err == 0
    cancel = sum_with_error([ApproxScalar(1, 0), ApproxScalar(-1, 0)])
    assert cancel.value == 0
    tiny = mpmath.mpf(10) ** -4
    s = sum_with_error([ApproxScalar(tiny, mpmath.mpf(10) ** -20) for _ in range(10**4)])
    assert abs(s.value - 1) <= s.err
    assert s.err <= mpmath.mpf(10) ** -16 * 1.01 + mpmath.mpf(2) ** -100


def test_canonical_sum_is_bit_reproducible(rng):
    terms = [ApproxScalar(mpmath.mpf(rng.random()), mpmath.mpf(10) ** -30) for _ in range(500)]
    assert sum_with_error(terms) == sum_with_error(list(terms))


def test_exact_embedded_sum_is_order_free(rng):
    terms = [ApproxScalar(mpmath.mpf(rng.randint(-99, 99)) / 64, 0) for _ in range(200)]
    shuffled = list(terms)
    rng.shuffle(shuffled)
    assert sum_with_error(terms).value == sum_with_error(shuffled).value


def test_decimal_string():
    assert decimal_string(Fraction(1, 3)) == "0.333333333333333333333333333333"
    assert decimal_string(ExactScalar.sqrt_q(2), digits=10) == "1.414213562"
