import random
from fractions import Fraction

import pytest

from locperiod import induced as I
from locperiod.numerics import ExactScalar, to_approx
from locperiod.padic import IDENTITY, GL2Elem, coset_reps, diag, hecke_cosets, z_
from locperiod.repn import Steinberg, Unramified


def unram(alpha, q):
    return Unramified.from_satake(alpha, q)


def same(v, w):
    return v.ratio_to(w) == 1


def test_translate_trivial_cases():
    phi = I.spherical_vector(unram(Fraction(5, 4), 3))
    assert same(I.translate(phi, IDENTITY), phi)
    assert same(I.translate(phi, z_(7)), phi)
    assert same(I.translate(phi, z_(3)), phi)


def test_spherical_is_one_on_K():
    phi = I.spherical_vector(unram(Fraction(5, 4), 3))
    for k in coset_reps(1, "full", 3):
        assert phi(k) == 1


@pytest.mark.parametrize("q", [2, 3])
def test_steinberg_new_vector_kernel(q):
    f = I.newform_vector(Steinberg(q, 1))
    values = [f(k) for k in coset_reps(1, "iwahori", q)]
    assert values.count(1) == 1
    assert values.count(Fraction(-1, q)) == q
    assert sum(values) == 0


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("alpha", [1, -1, Fraction(5, 4)])
def test_pairing_closed_form(q, alpha):
    r = unram(alpha, q)
    phi = I.spherical_vector(r)
    phim = I.translate(phi, diag(1, q))
    assert I.inner_product(phi, phi) == 1
    assert I.inner_product(phim, phim) == 1
    assert I.inner_product(phim, phi) == ExactScalar.sqrt_q(q) * r.hecke / (q + 1)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("alpha", [1, -1, Fraction(5, 4)])
def test_hecke_eigenvector(p, alpha):
    r = unram(alpha, p)
    phi = I.spherical_vector(r)
    assert I.hecke_apply(phi).ratio_to(phi) == r.hecke
    assert len(hecke_cosets(p)) == p + 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_hecke_degree(p):
    c = I.constant_function(p)
    assert I.hecke_apply(c).ratio_to(c) == (p + 1) * ExactScalar.inv_sqrt_q(p)


def test_hecke_commutes_with_K_and_centre():
    r = unram(Fraction(5, 4), 3)
    phi = I.spherical_vector(r)
    v = I.translate(phi, diag(1, 3))
    for z in (z_(3), z_(Fraction(1, 3)), z_(2)):
        assert same(I.hecke_apply(I.translate(v, z)), I.translate(I.hecke_apply(v), z))
    # the fixed-representative coset sum is K-equivariant on K-fixed vectors
    for w in (phi, I.constant_function(3)):
        for k in (GL2Elem.of(0, 1, 1, 0), GL2Elem.of(1, 0, 1, 1), GL2Elem.of(2, 1, 1, 1)):
            assert same(I.hecke_apply(I.translate(w, k)), I.translate(I.hecke_apply(w), k))


def test_atkin_lehner():
    r = unram(Fraction(5, 4), 3)
    phi = I.spherical_vector(r)
    v = I.translate(phi, diag(1, 3))
    assert same(I.atkin_lehner_apply(I.atkin_lehner_apply(v)), v)
    with pytest.raises(I.NotProportional):
        I.atkin_lehner_apply(phi).ratio_to(phi)
    for q in (2, 3):
        for twist in (1, -1):
            f = I.newform_vector(Steinberg(q, twist))
            eta = I.atkin_lehner_apply(f).ratio_to(f)
            assert eta == -twist


@pytest.mark.parametrize("q", [2, 3])
def test_k0_basis(q):
    basis = I.k0_basis(unram(1, q))
    gram = [[I.inner_product(x, y) for y in basis] for x in basis]
    assert gram == [[1, 0], [0, 1]]
    for v in basis:
        assert v.is_iwahori_invariant()
    st = I.k0_basis(Steinberg(q, -1))
    assert len(st) == 1 and I.inner_product(st[0], st[0]) == 1


def test_k0_basis_lambda_zero():
    r = Unramified.from_hecke(0, 2)
    phi, second = I.k0_basis(r)
    assert same(phi, I.spherical_vector(r))
    ratio = to_approx(second.ratio_to(I.translate(phi, diag(1, 2))))
    assert ratio.contains(Fraction(1))


def test_inner_product_equivariance():
    rng = random.Random(11)
    for q, alpha in ((2, -1), (3, 1)):
        r = unram(alpha, q)
        phi = I.spherical_vector(r)
        phim = I.translate(phi, diag(1, q))
        base = I.inner_product(phi, phim)
        for _ in range(100):
            entries = [Fraction(rng.choice([1, 2, 4, 5, 7])) * Fraction(q) ** rng.randint(-1, 1) for _ in range(4)]
            try:
                g = GL2Elem(*entries)
            except ValueError:
                continue
            assert I.inner_product(I.translate(phi, g), I.translate(phim, g)) == base
