"""Tests for truncated p-typical Witt vectors and the difference expansion."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padicrh.errors import ConfigMismatch, SizeLimit
from padicrh.witt import (FiniteField, MonomialAlgebra, WittVector,
                          lifted_witt_sum, teich_difference_expansion,
                          teichmueller, witt_one, witt_structure, witt_zero)
from oracles import mono_add, mono_ghost, mono_mul, mono_reduce, witt_encode

PRIMES = [2, 3, 5]


def frac_key(*pairs):
    return tuple(Fraction(a, b) for a, b in pairs)


# ---------------------------------------------------------------------------
# frozen values, derived with the ghost oracle first (see oracles.py)
# ---------------------------------------------------------------------------

def test_frozen_structure_polynomial_p2():
    # second sum component for p = 2: X_1 + Y_1 - X_0 Y_0 over the integers
    s1 = witt_structure(2, 2)["sum"][1]
    assert s1 == {(0, 1, 0, 0): 1, (0, 0, 0, 1): 1, (1, 0, 1, 0): -1}


def test_frozen_teichmueller_sum_p2():
    # [x] + [y] = (x + y, xy) in length 2 over F_2
    base = MonomialAlgebra(2, 2, 0)
    x, y = base.variable(0), base.variable(1)
    s = teichmueller(base, x, 2) + teichmueller(base, y, 2)
    assert s.comps[0] == {frac_key((1, 1), (0, 1)): 1,
                          frac_key((0, 1), (1, 1)): 1}
    assert s.comps[1] == {frac_key((1, 1), (1, 1)): 1}


def test_frozen_teichmueller_negation_p2():
    # -[y] = (y, y^2) in length 2 over F_2
    base = MonomialAlgebra(2, 2, 0)
    y = base.variable(1)
    n = -teichmueller(base, y, 2)
    assert n.comps[0] == {frac_key((0, 1), (1, 1)): 1}
    assert n.comps[1] == {frac_key((0, 1), (2, 1)): 1}


def test_frozen_difference_expansion_p2():
    terms, quots = teich_difference_expansion(2, 2)
    assert terms[0] == {frac_key((1, 1), (0, 1)): 1,
                        frac_key((0, 1), (1, 1)): 1}
    assert terms[1] == {frac_key((0, 1), (1, 1)): 1,
                        frac_key((1, 2), (1, 2)): 1}
    assert quots[1] == {frac_key((0, 1), (1, 2)): 1}


def test_frozen_difference_expansion_p3():
    terms, quots = teich_difference_expansion(3, 3)
    assert terms[1] == {frac_key((2, 3), (1, 3)): 1,
                        frac_key((1, 3), (2, 3)): 2}
    assert quots[1] == {frac_key((1, 3), (1, 3)): 1}
    assert terms[2] == {frac_key((8, 9), (1, 9)): 1,
                        frac_key((7, 9), (2, 9)): 2,
                        frac_key((5, 9), (4, 9)): 2,
                        frac_key((4, 9), (5, 9)): 1,
                        frac_key((2, 9), (7, 9)): 1,
                        frac_key((1, 9), (8, 9)): 2}


# ---------------------------------------------------------------------------
# stated examples
# ---------------------------------------------------------------------------

def test_verschiebung_of_one_has_ghosts_zero_p_p():
    for p in PRIMES:
        base = FiniteField(p)
        v1 = witt_one(base, 3).verschiebung()
        assert v1.comps == (0, 1, 0)
        assert v1.ghost() == [0, p, p]


def test_difference_expansion_reassembles():
    # sum_n p^n [P_n] recovers [X] - [Y] componentwise
    for p, m in [(2, 3), (3, 2)]:
        base = MonomialAlgebra(p, 2, m - 1)
        x, y = base.variable(0), base.variable(1)
        diff = teichmueller(base, x, m) - teichmueller(base, y, m)
        terms, _ = teich_difference_expansion(p, m)
        acc = witt_zero(base, m)
        for n, pn in enumerate(terms):
            acc = acc + teichmueller(base, pn, m).scalar_int(p ** n)
        assert acc == diff


def test_structure_guard():
    with pytest.raises(ConfigMismatch):
        witt_structure(3, 5)
    with pytest.raises(SizeLimit):
        witt_structure(7, 4)


def test_finite_field_extension_basics():
    F4 = FiniteField(2, 2)
    a = F4.element((0, 1))
    sq = F4.mul(a, a)
    assert sq != a and sq != F4.zero()
    # Frobenius has order 2 and proot inverts it
    assert F4.frobenius(F4.frobenius(a)) == a
    assert F4.proot(F4.frobenius(a)) == a
    # x^3 = 1 for the nonzero elements
    for x in F4.elements():
        if x != F4.zero():
            assert F4.pow(x, 3) == F4.one()


def test_proot_depth_guard():
    base = MonomialAlgebra(3, 1, 1)
    x = base.variable(0)
    once = base.proot(x)
    with pytest.raises(ConfigMismatch):
        base.proot(once)


# ---------------------------------------------------------------------------
# exhaustive agreement with the integer model of W_m(F_p)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (3, 2), (3, 3), (5, 2)])
def test_prime_field_matches_integer_model(p, m):
    base = FiniteField(p)
    mod = p ** m
    images = set()
    vectors = list(itertools.product(range(p), repeat=m))
    for comps in vectors:
        images.add(witt_encode(p, comps))
    assert len(images) == mod
    for ac in vectors[:: max(1, len(vectors) // 12)]:
        for bc in vectors[:: max(1, len(vectors) // 12)]:
            a, b = WittVector(base, ac), WittVector(base, bc)
            ea, eb = witt_encode(p, ac), witt_encode(p, bc)
            assert witt_encode(p, (a + b).comps) == (ea + eb) % mod
            assert witt_encode(p, (a * b).comps) == (ea * eb) % mod
            assert witt_encode(p, (-a).comps) == (-ea) % mod


@pytest.mark.parametrize("p", PRIMES)
def test_frobenius_verschiebung_multiplication_by_p(p):
    base = FiniteField(p)
    m = 3
    for comps in itertools.islice(itertools.product(range(p), repeat=m), 0,
                                  None, max(1, p ** m // 10)):
        x = WittVector(base, comps)
        px = x.scalar_int(p)
        assert px == x.frobenius().verschiebung()
        assert px == x.verschiebung().frobenius()


# ---------------------------------------------------------------------------
# ghost map checks over the monomial base
# ---------------------------------------------------------------------------

def small_monomials(p, nvars):
    exps = st.tuples(*([st.integers(0, 2)] * nvars)).map(
        lambda t: tuple(Fraction(x) for x in t))
    entry = st.tuples(exps, st.integers(1, p - 1)) if p > 2 else st.tuples(
        exps, st.just(1))
    return st.lists(entry, max_size=3).map(dict)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_ghost_congruences_certify_sum_and_product(data):
    p = data.draw(st.sampled_from(PRIMES))
    m = data.draw(st.integers(1, 3))
    base = MonomialAlgebra(p, 2, 0)
    av = tuple(data.draw(small_monomials(p, 2)) for _ in range(m))
    bv = tuple(data.draw(small_monomials(p, 2)) for _ in range(m))
    a, b = WittVector(base, av), WittVector(base, bv)
    for op, mono_op in ((a + b, mono_add), (a * b, mono_mul)):
        gs = mono_ghost(p, [dict(c) for c in op.comps])
        ga = mono_ghost(p, [dict(c) for c in av])
        gb = mono_ghost(p, [dict(c) for c in bv])
        for j in range(m):
            want = mono_op(ga[j], gb[j])
            delta = mono_add(gs[j], {e: -c for e, c in want.items()})
            # ghost_j only sees the components mod p^(j+1)
            assert mono_reduce(delta, p ** (j + 1)) == {}


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_lifted_sum_makes_ghost_exact(data):
    # over the characteristic-zero lift the ghost map is an exact ring hom
    p = data.draw(st.sampled_from(PRIMES))
    m = data.draw(st.integers(1, 3))
    lift = MonomialAlgebra(p, 2, 0, characteristic=0)
    av = [data.draw(small_monomials(p, 2)) for _ in range(m)]
    bv = [data.draw(small_monomials(p, 2)) for _ in range(m)]
    sv = lifted_witt_sum(p, m, lift, av, bv)
    gs = mono_ghost(p, sv)
    ga = mono_ghost(p, av)
    gb = mono_ghost(p, bv)
    for j in range(m):
        assert gs[j] == mono_add(ga[j], gb[j])


# ---------------------------------------------------------------------------
# ring axioms
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    p = data.draw(st.sampled_from(PRIMES))
    m = data.draw(st.integers(1, 3))
    base = FiniteField(p)
    draw_vec = lambda: WittVector(
        base, [data.draw(st.integers(0, p - 1)) for _ in range(m)])
    a, b, c = draw_vec(), draw_vec(), draw_vec()
    zero, one = witt_zero(base, m), witt_one(base, m)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a + zero == a
    assert a * one == a
    assert a + (-a) == zero


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_teichmueller_is_multiplicative(data):
    p = data.draw(st.sampled_from(PRIMES))
    m = data.draw(st.integers(1, 3))
    base = MonomialAlgebra(p, 2, 0)
    x = data.draw(small_monomials(p, 2))
    y = data.draw(small_monomials(p, 2))
    lhs = teichmueller(base, x, m) * teichmueller(base, y, m)
    rhs = teichmueller(base, base.mul(x, y), m)
    assert lhs == rhs


def test_length_and_base_mismatch():
    base2, base3 = FiniteField(2), FiniteField(3)
    with pytest.raises(ConfigMismatch):
        witt_one(base2, 2) + witt_one(base2, 3)
    with pytest.raises(ConfigMismatch):
        witt_one(base2, 2) + witt_one(base3, 2)
