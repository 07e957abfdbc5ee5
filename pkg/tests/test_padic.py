import itertools
import math
import random
from fractions import Fraction

import pytest

from locperiod.padic import (
    IDENTITY,
    GL2Elem,
    LocalField,
    a_,
    cartan_index,
    cartan_volume,
    coset_reps,
    hecke_cosets,
    is_integral_unit,
    iwasawa,
    n_,
    valuation,
    z_,
)


def test_valuation_examples():
    assert valuation(0, 2) == math.inf
    assert valuation(Fraction(1, 2), 2) == -1
    assert valuation(Fraction(12, 5), 2) == 2


def rebuild(z, x, y, k):
    return z_(z) @ n_(x) @ a_(y) @ k


def test_iwasawa_examples():
    assert iwasawa(IDENTITY, 2) == (1, 0, 1, IDENTITY)
    assert iwasawa(a_(2), 2) == (1, 0, 2, IDENTITY)
    g = GL2Elem.of(1, 0, Fraction(1, 2), 1)
    z, x, y, k = iwasawa(g, 2)
    assert rebuild(z, x, y, k) == g
    assert is_integral_unit(k, 2)
    assert valuation(k.a, 2) >= 0 and valuation(k.c, 2) == 0


def random_elem(rng, p):
    while True:
        entries = []
        for _ in range(4):
            if rng.random() < 0.15:
                entries.append(Fraction(0))
                continue
            e = rng.randint(-3, 3)
            u = rng.choice([x for x in range(1, 4 * p) if x % p])
            entries.append(Fraction(u) * Fraction(p) ** e)
        try:
            return GL2Elem(*entries)
        except ValueError:
            continue


@pytest.mark.parametrize("p", [2, 3, 5])
def test_iwasawa_round_trip(p):
    rng = random.Random(p)
    for _ in range(1000):
        g = random_elem(rng, p)
        z, x, y, k = iwasawa(g, p)
        assert is_integral_unit(k, p)
        assert rebuild(z, x, y, k) == g


@pytest.mark.parametrize("p,count", [(2, 3), (3, 4), (5, 6)])
def test_hecke_cosets_distinct(p, count):
    reps = hecke_cosets(LocalField(p))
    assert len(reps) == count
    for g, h in itertools.combinations(reps, 2):
        assert not is_integral_unit(g.inverse() @ h, p)
    for g in reps:
        assert cartan_index(g, p) == 1
    assert len(reps) == cartan_volume(1, p)


def test_coset_reps():
    assert coset_reps(0, "full", 2) == [IDENTITY]
    assert len(coset_reps(1, "iwahori", 2)) == 3
    assert len(coset_reps(1, "full", 2)) == 6


def brute_force_shell(p, r):
    """Count right K-cosets in K a(p^r) K via Hermite normal forms of determinant p^r."""
    count = 0
    for i in range(r + 1):
        for b in range(p**i):
            g = GL2Elem.of(p ** (r - i), b, 0, p**i)
            if cartan_index(g, p) == r:
                count += 1
    return count


@pytest.mark.parametrize("p,r", [(2, 1), (3, 2), (2, 3), (5, 2)])
def test_cartan_volume(p, r):
    assert cartan_volume(r, p) == brute_force_shell(p, r)
    assert cartan_volume(0, p) == 1


def test_cartan_volume_example():
    assert cartan_volume(2, 3) == 12


@pytest.mark.parametrize("p", [2, 3, 5])
def test_unit_volume(p):
    assert LocalField(p).zeta(1) * (1 - Fraction(1, p)) == 1


def test_rejects_nonprime():
    with pytest.raises(ValueError):
        LocalField(4)
