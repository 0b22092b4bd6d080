"""Tests for capped linear algebra and Koszul cohomology over B_n."""

import random
from fractions import Fraction

import pytest

from padicrh import FieldConfig, INFINITY
from padicrh.errors import (CommutationFailure, ConfigMismatch,
                            PrecisionExhausted)
from padicrh.series import ModelRing
from padicrh.complexes import (
    CappedMatrix, CohomologyReport, ComplexData, cohomology_compute,
    commutation_defect, complex_compare, dvr_smith, koszul_build,
)
from oracles import frac_fixed_space_structure, frac_koszul_report

F3 = FieldConfig(3, precision=24)
R2 = ModelRing(F3, 2)
R3 = ModelRing(F3, 3)


def mat(ring, data):
    """CappedMatrix from nested lists of t-coefficient integer lists."""
    return CappedMatrix(ring, [
        [ring.series([ring.field.integer(c) for c in cell]) for cell in row]
        for row in data])


def report_profile(report):
    return [(f, tuple(sorted(t))) for f, t in report.degrees]


# -- instance generation: commuting operators as polynomials in one matrix --

def tpoly_identity(r, n):
    return [[[1 if i == j else 0] + [0] * (n - 1) for j in range(r)]
            for i in range(r)]


def tpoly_matmul(a, b, n):
    r = len(a)
    out = [[[Fraction(0)] * n for _ in range(r)] for _ in range(r)]
    for i in range(r):
        for j in range(r):
            cell = out[i][j]
            for k in range(r):
                for d1, c1 in enumerate(a[i][k]):
                    if c1:
                        for d2, c2 in enumerate(b[k][j]):
                            if c2 and d1 + d2 < n:
                                cell[d1 + d2] += Fraction(c1) * c2
    return out


def tpoly_combine(coeffs, base, n):
    """Evaluate sum coeffs[m] * base^m as a t-coefficient-list matrix."""
    r = len(base)
    power = tpoly_identity(r, n)
    out = [[[Fraction(0)] * n for _ in range(r)] for _ in range(r)]
    for m, cm in enumerate(coeffs):
        if m:
            power = tpoly_matmul(power, base, n)
        for i in range(r):
            for j in range(r):
                for d in range(n):
                    out[i][j][d] += cm * power[i][j][d]
    return out


def random_commuting_family(rng, r, n, count):
    base = [[[rng.randrange(-3, 4) for _ in range(n)] for _ in range(r)]
            for _ in range(r)]
    ops = []
    for _ in range(count):
        coeffs = [rng.randrange(-2, 3) for _ in range(3)]
        ops.append(tpoly_combine(coeffs, base, n))
    return ops


# ---------------------------------------------------------------------------
# frozen examples
# ---------------------------------------------------------------------------

def test_zero_operators_betti_numbers():
    zero = CappedMatrix.zero(R3, 2, 2)
    rep = cohomology_compute(koszul_build([zero, zero]))
    assert report_profile(rep) == [(2, ()), (4, ()), (2, ())]
    zero1 = CappedMatrix.zero(R3, 1, 1)
    rep = cohomology_compute(koszul_build([zero1, zero1, zero1]))
    assert report_profile(rep) == [(1, ()), (3, ()), (3, ()), (1, ())]


def test_unit_operator_acyclic():
    rep = cohomology_compute(koszul_build([CappedMatrix.identity(R3, 2)]))
    assert report_profile(rep) == [(0, ()), (0, ())]


def test_t_operator_on_b2():
    rep = cohomology_compute(koszul_build([CappedMatrix(R2, [[R2.t]])]))
    assert report_profile(rep) == [(0, (1,)), (0, (1,))]
    assert rep.f_dimension(0) == 1 and rep.f_dimension(1) == 1


def test_jordan_pair_frozen():
    # A a nilpotent Jordan block, B = t + A; hand-computed invariants
    a = mat(R2, [[[0], [1]], [[0], [0]]])
    b = mat(R2, [[[0, 1], [1]], [[0], [0, 1]]])
    rep = cohomology_compute(koszul_build([a, b]))
    assert report_profile(rep) == [(0, (1,)), (0, (1, 1)), (0, (1,))]


def test_jordan_pair_matches_hand_built_double_complex():
    a = mat(R2, [[[0], [1]], [[0], [0]]])
    b = mat(R2, [[[0, 1], [1]], [[0], [0, 1]]])
    d0 = CappedMatrix(R2, a.entries + b.entries, cols=2)
    d1 = CappedMatrix(R2, [row_b + row_a for row_b, row_a
                           in zip((-b).entries, a.entries)], cols=4)
    by_hand = ComplexData(R2, [2, 4, 2], [d0, d1])
    verdict = complex_compare(cohomology_compute(by_hand),
                              cohomology_compute(koszul_build([a, b])))
    assert verdict.equal


# ---------------------------------------------------------------------------
# randomized comparison against the rational oracle
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("r,n,count,seed", [
    (2, 2, 2, 1), (2, 3, 2, 2), (3, 2, 2, 3), (2, 2, 3, 4), (3, 3, 2, 5),
])
def test_koszul_matches_fraction_oracle(r, n, count, seed):
    rng = random.Random(seed)
    ring = ModelRing(F3, n)
    for _ in range(4):
        ops = random_commuting_family(rng, r, n, count)
        mats = [mat(ring, op) for op in ops]
        rep = cohomology_compute(koszul_build(mats))
        want = frac_koszul_report(ops, n)
        assert report_profile(rep) == [(f, tuple(sorted(t)))
                                       for f, t in want]


def test_h0_is_the_simultaneous_fixed_space():
    rng = random.Random(6)
    for _ in range(6):
        ops = random_commuting_family(rng, 2, 2, 2)
        rep = cohomology_compute(koszul_build([mat(R2, op) for op in ops]))
        free, tors = frac_fixed_space_structure(ops, 2)
        assert rep.degrees[0] == (free, tuple(sorted(tors)))


def test_invariance_under_base_change():
    rng = random.Random(7)
    for _ in range(4):
        ops = random_commuting_family(rng, 2, 2, 2)
        mats = [mat(R2, op) for op in ops]
        # random invertible change of basis with unit determinant
        p = mat(R2, [[[1], [rng.randrange(-2, 3), rng.randrange(-2, 3)]],
                     [[0], [1]]])
        q = mat(R2, [[[1], [0]], [[rng.randrange(-2, 3)], [1]]])
        g = p * q
        ginv = g.inverse()
        conj = [ginv * op * g for op in mats]
        verdict = complex_compare(
            cohomology_compute(koszul_build(mats)),
            cohomology_compute(koszul_build(conj)))
        assert verdict.equal, verdict.per_degree


# ---------------------------------------------------------------------------
# guards and failure modes
# ---------------------------------------------------------------------------

def test_non_commuting_operators_rejected():
    a = mat(R3, [[[0], [1]], [[0], [0]]])
    b = mat(R3, [[[0], [0]], [[1], [0]]])
    with pytest.raises(CommutationFailure) as err:
        koszul_build([a, b])
    assert "0 and 1" in str(err.value)
    assert not commutation_defect(a, b).is_zerolike


def test_square_zero_enforced():
    d0 = CappedMatrix.identity(R3, 2)
    with pytest.raises(CommutationFailure):
        ComplexData(R3, [2, 2, 2], [d0, d0])


def test_shape_guards():
    with pytest.raises(ConfigMismatch):
        ComplexData(R3, [2, 2], [CappedMatrix.zero(R3, 3, 2)])
    with pytest.raises(ConfigMismatch):
        CappedMatrix(R3, [[R3.one()], [R3.one(), R3.zero()]])
    with pytest.raises(ConfigMismatch):
        CappedMatrix.zero(R3, 2, 2) * CappedMatrix.zero(R3, 3, 3)
    with pytest.raises(ConfigMismatch):
        koszul_build([CappedMatrix.zero(R3, 2, 2),
                      CappedMatrix.zero(R2, 2, 2)])


def test_precision_exhaustion_reports_degree():
    fog = CappedMatrix(R2, [[R2.constant(F3.zeroish(0))]])
    with pytest.raises(PrecisionExhausted) as err:
        cohomology_compute(koszul_build([fog]))
    assert "degree" in str(err.value)


def test_singular_matrix_has_no_inverse():
    with pytest.raises(ConfigMismatch):
        CappedMatrix(R2, [[R2.t]]).inverse()
    with pytest.raises(ConfigMismatch):
        CappedMatrix.zero(R2, 1, 2).inverse()


# ---------------------------------------------------------------------------
# matrix utilities
# ---------------------------------------------------------------------------

def test_matrix_inverse_round_trip():
    rng = random.Random(8)
    for _ in range(5):
        m = mat(R3, [[[rng.randrange(-4, 5) for _ in range(3)]
                      for _ in range(2)] for _ in range(2)])
        m = m + CappedMatrix.identity(R3, 2).scale(R3.constant(7))
        prod = m * m.inverse()
        assert (prod - CappedMatrix.identity(R3, 2)).is_zerolike


def test_matrix_json_round_trip():
    m = mat(R2, [[[1, 2], [0, -1]], [[3], [0, 5]]])
    back = CappedMatrix.from_json(R2, m.to_json())
    assert (back - m).is_zerolike
    assert back.rows == 2 and back.cols == 2


def test_report_json_round_trip_and_compare():
    rep = CohomologyReport(2, [(1, (1, 1)), (0, ())], INFINITY)
    back = CohomologyReport.from_json(rep.to_json())
    assert back.degrees == rep.degrees
    assert complex_compare(rep, back).equal
    other = CohomologyReport(2, [(1, (1,)), (0, ())], INFINITY)
    verdict = complex_compare(rep, other)
    assert not verdict.equal
    assert list(verdict.per_degree) == [False, True]
    with pytest.raises(ConfigMismatch):
        complex_compare(rep, CohomologyReport(3, [(1, ())], INFINITY))


def test_euler_characteristic_identity():
    rng = random.Random(9)
    ops = random_commuting_family(rng, 3, 3, 2)
    cx = koszul_build([mat(R3, op) for op in ops])
    rep = cohomology_compute(cx)
    total = sum((-1) ** q * rep.f_dimension(q)
                for q in range(len(rep.degrees)))
    assert total == 3 * cx.euler_rank()


# ---------------------------------------------------------------------------
# elementary divisors over the valuation ring
# ---------------------------------------------------------------------------

def test_dvr_smith_frozen():
    pi = F3.pi_power
    div, floor = dvr_smith(F3, [[F3.integer(1), F3.zero()],
                                [pi(2), pi(3)]])
    assert div == [0, 3] and floor == INFINITY
    # p = pi^(p-1) * unit, so the single divisor of [p] is e
    div, _ = dvr_smith(F3, [[F3.integer(3)]])
    assert div == [2]
    div, floor = dvr_smith(F3, [[F3.zero(), F3.zero()]])
    assert div == [] and floor == INFINITY


def test_dvr_smith_invariance_under_integral_conjugation():
    rng = random.Random(10)
    pi = F3.pi_power
    base = [[pi(rng.randrange(0, 4)) * F3.integer(rng.randrange(1, 5)),
             F3.zero()],
            [pi(1), pi(2)]]
    div0, _ = dvr_smith(F3, base)
    for _ in range(5):
        a, b = rng.randrange(-3, 4), rng.randrange(-3, 4)
        # unimodular integer matrices preserve the divisors
        left = [[F3.integer(1), F3.integer(a)],
                [F3.zero(), F3.integer(1)]]
        right = [[F3.integer(1), F3.zero()],
                 [F3.integer(b), F3.integer(1)]]
        prod = _scalar_matmul(_scalar_matmul(left, base), right)
        div, _ = dvr_smith(F3, prod)
        assert div == div0


def _scalar_matmul(a, b):
    m, inner, ncols = len(a), len(b), len(b[0])
    out = [[F3.zero()] * ncols for _ in range(m)]
    for i in range(m):
        for j in range(ncols):
            acc = F3.zero()
            for k in range(inner):
                acc = acc + a[i][k] * b[k][j]
            out[i][j] = acc
    return out
