"""Tests for monoid presentations, log predicates, and exactification."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from padicrh.errors import ConfigMismatch, SizeLimit
from padicrh.monoids import (
    ChartDescriptor, Exactification, FGMonoid, LogBasis, MonoidMap,
    exactify, free_monoid, is_integral, is_saturated, omega_log_basis,
    surjectivity_witnesses, _shift_into_nonneg,
)
from oracles import (
    cancellation_violation, graded_congruence_classes,
    sympy_group_structure, sympy_kernel_quotient_rank,
)


def doubled():
    """x, y subject to 2x = 2y: cancellative, with 2-torsion completion."""
    return FGMonoid(2, [((2, 0), (0, 2))])


def absorbing():
    """x, y subject to x + y = 2y: cancelling y would force x = y."""
    return FGMonoid(2, [((1, 1), (0, 2))])


def numerical():
    """x, y subject to 3x = 2y: the submonoid {0, 2, 3, 4, ...} of N."""
    return FGMonoid(2, [((3, 0), (0, 2))])


def mod_two():
    """One generator of order two: the group Z/2 as a monoid."""
    return FGMonoid(1, [((2,), (0,))])


def sum_map(k):
    return MonoidMap(free_monoid(k), free_monoid(1), [(1,)] * k)


# -- word problem ----------------------------------------------------------

def test_free_monoid_words():
    m = free_monoid(3)
    assert m.normal_form((1, 2, 3)) == (1, 2, 3)
    assert m.equal((1, 0, 2), (1, 0, 2))
    assert not m.equal((1, 0, 2), (0, 1, 2))


def test_relation_identifies_sides():
    m = doubled()
    assert m.equal((2, 0), (0, 2))
    assert m.equal((3, 1), (1, 3))
    assert not m.equal((1, 0), (0, 1))
    assert m.normal_form(m.normal_form((5, 2))) == m.normal_form((5, 2))


@pytest.mark.parametrize("monoid", [doubled(), absorbing()])
def test_equality_matches_congruence_closure(monoid):
    classes = graded_congruence_classes(
        monoid.generators, monoid.relations, 6)
    vecs = sorted(classes)
    for a, b in itertools.combinations(vecs, 2):
        assert monoid.equal(a, b) == (classes[a] == classes[b]), (a, b)


def test_numerical_words_match_weight_oracle():
    # 3x = 2y identifies exactly the pairs of equal weight 2a + 3b: any
    # two nonnegative solutions of equal weight differ by steps of
    # (3, -2) that stay nonnegative along the way
    m = numerical()
    vecs = [v for v in itertools.product(range(7), repeat=2)
            if sum(v) <= 6]
    for a, b in itertools.combinations(vecs, 2):
        weights_agree = 2 * a[0] + 3 * a[1] == 2 * b[0] + 3 * b[1]
        assert m.equal(a, b) == weights_agree, (a, b)


def test_equality_is_congruence():
    m = numerical()
    rng = random.Random(7)
    for _ in range(50):
        a = (rng.randrange(4), rng.randrange(4))
        b = (rng.randrange(4), rng.randrange(4))
        c = (rng.randrange(4), rng.randrange(4))
        if m.equal(a, b):
            assert m.equal(tuple(x + y for x, y in zip(a, c)),
                           tuple(x + y for x, y in zip(b, c)))


def test_element_validation():
    m = doubled()
    with pytest.raises(ConfigMismatch):
        m.normal_form((1, 2, 3))
    with pytest.raises(ConfigMismatch):
        m.normal_form((-1, 0))
    with pytest.raises(ConfigMismatch):
        FGMonoid(-1, [])


# -- group completion ------------------------------------------------------

@pytest.mark.parametrize("monoid,expected", [
    (free_monoid(0), (0, ())),
    (free_monoid(3), (3, ())),
    (doubled(), (1, (2,))),
    (absorbing(), (1, ())),
    (numerical(), (1, ())),
    (mod_two(), (0, (2,))),
    (FGMonoid(3, [((2, 0, 0), (0, 0, 0)), ((0, 3, 0), (0, 0, 0))]),
     (1, (6,))),
])
def test_group_structure_matches_smith_oracle(monoid, expected):
    assert monoid.group_structure() == expected
    assert sympy_group_structure(
        monoid.generators, monoid.relations) == expected


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_group_structure_random_presentations(data):
    k = data.draw(st.integers(1, 3))
    nrel = data.draw(st.integers(0, 2))
    side = st.tuples(*[st.integers(0, 3)] * k)
    relations = [(data.draw(side), data.draw(side)) for _ in range(nrel)]
    m = FGMonoid(k, relations)
    assert m.group_structure() == sympy_group_structure(k, relations)


# -- integrality and saturation --------------------------------------------

@pytest.mark.parametrize("k", range(4))
def test_free_monoids_integral_and_saturated(k):
    m = free_monoid(k)
    assert is_integral(m)
    assert is_saturated(m)


def test_doubled_relation_is_cancellative():
    m = doubled()
    assert is_integral(m)
    assert cancellation_violation(2, m.relations, 8) is None
    assert m.group_structure() == (1, (2,))


def test_doubled_relation_not_saturated():
    # x - y is 2-torsion in the completion, hence a root of 0 = 2(x - y)
    # that the monoid itself never reaches
    assert not is_saturated(doubled())


def test_absorbing_relation_not_integral():
    m = absorbing()
    assert not is_integral(m)
    witness = cancellation_violation(2, m.relations, 8)
    assert witness is not None
    a, b, c = witness
    classes = graded_congruence_classes(2, m.relations, 8)
    sa = tuple(x + y for x, y in zip(a, c))
    sb = tuple(x + y for x, y in zip(b, c))
    assert classes[sa] == classes[sb] and classes[a] != classes[b]


def test_numerical_semigroup_integral_not_saturated():
    m = numerical()
    assert is_integral(m)
    # 1 = (1/2) * 2 lies in the saturation but not in {0, 2, 3, 4, ...}
    assert not is_saturated(m)


def test_chart_skeleton_saturated():
    m = ChartDescriptor(3, 1, 1).skeleton()
    assert is_integral(m)
    assert is_saturated(m)


def test_saturated_implies_integral_on_corpus():
    corpus = [free_monoid(2), doubled(), absorbing(), numerical(),
              mod_two(), ChartDescriptor(2, 1, 1).skeleton(),
              ChartDescriptor(4, 2, 1).skeleton()]
    for m in corpus:
        if is_saturated(m):
            assert is_integral(m)


def test_saturation_generator_limit():
    with pytest.raises(SizeLimit):
        is_saturated(free_monoid(7))


def test_monoid_json_roundtrip():
    m = numerical()
    again = FGMonoid.from_json(m.to_json())
    assert again.generators == m.generators
    assert again.relations == m.relations


# -- maps ------------------------------------------------------------------

def test_map_validates_relations():
    with pytest.raises(ConfigMismatch):
        MonoidMap(doubled(), free_monoid(1), [(1,), (2,)])
    with pytest.raises(ConfigMismatch):
        MonoidMap(free_monoid(2), free_monoid(1), [(1,)])


def test_map_apply():
    f = MonoidMap(free_monoid(2), free_monoid(1), [(2,), (3,)])
    assert f.apply((1, 1)) == (5,)
    assert f.apply_signed((-1, 1)) == (1,)


def test_surjectivity_witnesses_found():
    witnesses = surjectivity_witnesses(sum_map(2))
    assert len(witnesses) == 1
    assert sum_map(2).apply(witnesses[0]) == (1,)


def test_surjectivity_not_certified():
    f = MonoidMap(free_monoid(2), free_monoid(1), [(2,), (3,)])
    with pytest.raises(ConfigMismatch):
        surjectivity_witnesses(f)


# -- exactification --------------------------------------------------------

def test_identity_exactification_trivial():
    f = MonoidMap(free_monoid(2), free_monoid(2), [(1, 0), (0, 1)])
    ex = exactify(f)
    assert bool(ex)
    assert ex.kernel_rank == 0
    assert ex.kernel_basis == ()
    assert ex.mprime.generators == 2


def test_sum_map_exactification():
    ex = exactify(sum_map(2))
    assert bool(ex)
    assert ex.kernel_rank == 1
    assert ex.kernel_basis == ((1, -1),)
    assert is_integral(ex.mprime)
    assert ex.mprime.group_structure() == free_monoid(2).group_structure()
    for e in ((1, 0), (0, 1)):
        image = ex.projection.apply(ex.inclusion.apply(e))
        assert free_monoid(1).equal(image, sum_map(2).apply(e))


def test_sum_map_preimage_is_halfplane():
    # the preimage of N under addition is every pair with a + b >= 0
    ex = exactify(sum_map(2))
    for a in range(-4, 5):
        for b in range(-4, 5):
            assert ex.contains((a, b)) == (a + b >= 0), (a, b)


def test_triple_sum_kernel_rank():
    ex = exactify(sum_map(3))
    assert ex.kernel_rank == 2
    assert bool(ex)
    assert ex.kernel_rank == sympy_kernel_quotient_rank(
        sum_map(3).images, [])


@pytest.mark.parametrize("r,expected", [(0, 0), (1, 1), (2, 2)])
def test_chart_exactification_kernel_rank(r, expected):
    chart = ChartDescriptor(3, r, 1)
    f = chart.valuation_map()
    ex = exactify(f)
    assert bool(ex)
    assert ex.kernel_rank == expected
    assert ex.kernel_rank == sympy_kernel_quotient_rank(
        f.images, f.source.relations)


def test_weighted_chart_exactification():
    f = ChartDescriptor(2, 1, 1).valuation_map(weights=(2, 1))
    ex = exactify(f)
    assert bool(ex)
    assert ex.kernel_rank == 1
    assert ex.kernel_lattice == ((1, -2, 0), (0, 3, -1))
    assert ex.kernel_rank == sympy_kernel_quotient_rank(
        f.images, f.source.relations)


def test_torsion_kernel_class():
    # the completion kernel of (2x = 2y) -> N is Z/2: rank zero, but one
    # genuine class generator that must become a unit
    f = MonoidMap(doubled(), free_monoid(1), [(1,), (1,)])
    ex = exactify(f)
    assert bool(ex)
    assert ex.kernel_rank == 0
    assert ex.kernel_basis == ((1, -1),)
    assert ex.mprime.group_structure() == (1, (2,))


def test_dropped_coordinate_becomes_unit():
    f = MonoidMap(free_monoid(3), free_monoid(2),
                  [(1, 0), (0, 1), (0, 0)])
    ex = exactify(f)
    assert ex.kernel_rank == 1
    assert ex.contains((0, 0, -5))
    assert not ex.contains((-1, 0, 0))


def test_quotient_to_torsion_target():
    f = MonoidMap(free_monoid(1), mod_two(), [(1,)])
    ex = exactify(f)
    assert bool(ex)
    assert ex.kernel_rank == 1
    assert ex.mprime.group_structure() == (1, ())
    assert ex.contains((-1,))


def test_group_completion_preserved():
    maps = [sum_map(2), sum_map(3),
            MonoidMap(doubled(), free_monoid(1), [(1,), (1,)]),
            MonoidMap(free_monoid(1), mod_two(), [(1,)]),
            ChartDescriptor(3, 1, 1).valuation_map(),
            ChartDescriptor(3, 2, 1).valuation_map()]
    for f in maps:
        ex = exactify(f)
        assert ex.mprime.group_structure() == f.source.group_structure()


def test_exactify_idempotent_small():
    for f in [sum_map(2), MonoidMap(free_monoid(1), mod_two(), [(1,)])]:
        first = exactify(f)
        second = exactify(first.projection)
        assert bool(second)
        assert second.kernel_rank == first.kernel_rank
        lattice = [list(r) for r in first.mprime.lattice_basis()]
        for vec in second.kernel_basis:
            assert _shift_into_nonneg(vec, lattice)
        assert (second.mprime.group_structure()
                == first.mprime.group_structure())


def test_exactify_idempotent_chart():
    first = exactify(ChartDescriptor(3, 1, 1).valuation_map())
    second = exactify(first.projection)
    assert bool(second)
    assert second.kernel_rank == first.kernel_rank == 1
    lattice = [list(r) for r in first.mprime.lattice_basis()]
    for vec in second.kernel_basis:
        assert _shift_into_nonneg(vec, lattice)


def test_exactify_rejects_non_integral_source():
    f = MonoidMap(absorbing(), free_monoid(1), [(1,), (1,)])
    with pytest.raises(ConfigMismatch):
        exactify(f)


def test_exactify_rejects_non_surjective():
    f = MonoidMap(free_monoid(2), free_monoid(1), [(2,), (3,)])
    with pytest.raises(ConfigMismatch):
        exactify(f)


def test_exactify_kernel_rank_limit():
    with pytest.raises(SizeLimit):
        exactify(sum_map(6))


# -- chart descriptors and log differentials -------------------------------

def test_chart_validation():
    with pytest.raises(ConfigMismatch):
        ChartDescriptor(2, 3, 1)
    with pytest.raises(ConfigMismatch):
        ChartDescriptor(-1, 0, 1)
    with pytest.raises(ConfigMismatch):
        ChartDescriptor(2, 1, -1)
    chart = ChartDescriptor(2, 1, "1/2")
    assert chart.exponent.denominator == 2


def test_skeleton_presentation():
    m = ChartDescriptor(3, 1, 1).skeleton()
    assert m.generators == 3
    assert m.relations == (((1, 1, 0), (0, 0, 1)),)


def test_valuation_map_images():
    chart = ChartDescriptor(3, 2, 1)
    assert chart.valuation_map().images == ((1,), (1,), (1,), (3,))
    weighted = ChartDescriptor(2, 1, 1).valuation_map(weights=(2, 1))
    assert weighted.images == ((2,), (1,), (3,))
    with pytest.raises(ConfigMismatch):
        ChartDescriptor(2, 1, 1).valuation_map(weights=(1,))


def test_chart_json_roundtrip():
    chart = ChartDescriptor(3, 2, "2/3")
    again = ChartDescriptor.from_json(chart.to_json())
    assert (again.dim, again.semistable_r, again.exponent) == \
        (chart.dim, chart.semistable_r, chart.exponent)


def test_log_basis_divisorless_is_free():
    basis = omega_log_basis(ChartDescriptor(3, 0, 1))
    assert basis.rank == 3
    assert basis.basis == (1, 2, 3)
    assert basis.substitution == ()


def test_log_basis_surface_with_divisor():
    basis = omega_log_basis(ChartDescriptor(2, 1, 1))
    assert basis.symbols == ("dlog T_0", "dlog T_1", "dlog T_2")
    assert basis.relation == (0, 1)
    assert basis.basis == (1, 2)
    assert basis.substitution == ((-1, 1),)


def test_log_basis_rank_always_dim():
    for d in range(5):
        for r in range(d + 1):
            assert omega_log_basis(ChartDescriptor(d, r, 1)).rank == d
