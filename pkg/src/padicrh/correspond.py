"""Dictionary between connections and commuting group actions over B_n.

The model ring is B_n = F[t]/t^n with F = Q_p(zeta_p), and the three
kinds of coefficient data are commuting matrix families: a Higgs datum
over the t-order-1 ring, a connection datum over B_n, and a gamma datum
of invertible matrices over B_n recording an action of d commuting group
generators.  With rho = pi^(1 + shift) the structure constant of the
model, the dictionary is exponential,

    G_i = exp(rho * nabla_i),        nabla_i = u * log(G_i) / gamma_const,

realized two ways.  The closed route sums the matrix series directly,
with certified cutoffs and explicit truncation windows on every dropped
tail.  The solver route builds the horizontal (resp. invariant) basis of
the module tensored with the degree-capped divided-power algebra B_n<W>,
reads the other structure off the constant terms of that basis, and then
certifies itself: the defining equation of the basis is rechecked
coefficientwise, and the residual must sit above the noise floor that
degree truncation forces.  A residual provably below the floor raises
TruncationOverflow, never a silently wrong answer.

Admission to the dictionary is smallness.  A Higgs datum is small when
every degree-i coefficient of its characteristic-polynomial point has
valuation strictly above i/(p - 1) and each matrix is (zeta_p - 1) times
an integral matrix with nilpotent residue; a gamma datum is small when
each (G_i - 1) is divisible by pi^(2 + shift) with integral quotient
whose residue is nilpotent.  The remaining entry points consume the
dictionary: round-trip defect reports, Koszul cohomology on both sides
with comparison, cocycle solvers for the twisted complexes on either
side, a constructive devissage of module presentations along t, and the
annihilation certificate for the cokernel of (gamma - 1) on the
degree-truncated integral module.
"""

import math
from fractions import Fraction

from .complexes import (CappedMatrix, _f_inverse, _f_rank, _t_shift,
                        cohomology_compute, commutation_defect,
                        complex_compare, dvr_smith, koszul_build)
from .errors import (CommutationFailure, ConfigMismatch, DivergentSeries,
                     NotSmall, PrecisionExhausted, TruncationOverflow)
from .padic import INFINITY, PAdicScalar
from .series import (FORM_BASIS_TWIST, ModelRing, PDElement, PDForm,
                     TruncatedSeries, form_differential, gamma_shift,
                     pd_zero, poincare_solve)

_EXACT = INFINITY


# ---------------------------------------------------------------------------
# polynomials in the d pencil variables
# ---------------------------------------------------------------------------
# A homogeneous polynomial in x_1..x_d is a dict from exponent tuples to
# scalars; only nonzero coefficients are stored.


def _xp_add(a, b):
    out = dict(a)
    for exps, c in b.items():
        s = out[exps] + c if exps in out else c
        if s.is_exact_zero:
            out.pop(exps, None)
        else:
            out[exps] = s
    return out


def _xp_mul(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            c = c1 * c2
            if c.is_exact_zero:
                continue
            exps = tuple(x + y for x, y in zip(e1, e2))
            s = out[exps] + c if exps in out else c
            if s.is_exact_zero:
                out.pop(exps, None)
            else:
                out[exps] = s
    return out


class HitchinPoint:
    """Characteristic-polynomial invariants of a matrix pencil.

    Component i (1-based) is the i-th elementary symmetric function of
    sum_k x_k theta_k, a homogeneous degree-i polynomial in x_1..x_d with
    scalar coefficients, stored as an exponent-tuple dict.
    """

    __slots__ = ("field", "rank", "dim", "components")

    def __init__(self, field, rank, dim, components):
        components = [dict(comp) for comp in components]
        if len(components) != rank:
            raise ConfigMismatch("need one component per degree 1..rank")
        for i, comp in enumerate(components, start=1):
            for exps, coeff in comp.items():
                if (len(exps) != dim or any(x < 0 for x in exps)
                        or sum(exps) != i):
                    raise ConfigMismatch(
                        f"component {i} has a bad exponent tuple {exps}")
                if not isinstance(coeff, PAdicScalar):
                    raise ConfigMismatch("coefficients must be scalars")
        self.field = field
        self.rank = rank
        self.dim = dim
        self.components = tuple(components)

    def component(self, i):
        return dict(self.components[i - 1])

    def coefficient(self, i, exps):
        return self.components[i - 1].get(tuple(exps), self.field.zero())

    def agrees_with(self, other):
        """Coefficientwise indistinguishability within stored windows."""
        if self.rank != other.rank or self.dim != other.dim:
            raise ConfigMismatch("points of different shapes")
        for mine, theirs in zip(self.components, other.components):
            for exps in set(mine) | set(theirs):
                a = mine.get(exps, self.field.zero())
                b = theirs.get(exps, self.field.zero())
                if not (a - b).is_zerolike:
                    return False
        return True

    def to_json(self):
        comps = []
        for comp in self.components:
            comps.append({"[" + ",".join(map(str, e)) + "]": c.to_json()
                          for e, c in sorted(comp.items())})
        return {"rank": self.rank, "dim": self.dim, "components": comps}

    def __repr__(self):
        body = "; ".join(
            ", ".join(f"x^{list(e)}: {c!r}" for e, c in sorted(comp.items()))
            or "0" for comp in self.components)
        return f"HitchinPoint({body})"


def _xp_scale(a, scalar):
    out = {}
    for exps, c in a.items():
        s = c * scalar
        if not s.is_exact_zero:
            out[exps] = s
    return out


def _xp_sum(terms):
    out = {}
    for t in terms:
        out = _xp_add(out, t)
    return out


def _xp_matmul(a, b):
    r = len(a)
    return [[_xp_sum(_xp_mul(a[i][k], b[k][j]) for k in range(r))
             for j in range(r)] for i in range(r)]


def hitchin_invariants(h):
    """The characteristic-polynomial point of a Higgs datum.

    Takes the power traces p_k of the pencil sum_k x_k theta_k and feeds
    them through the Newton recursion i e_i = sum (-1)^(j-1) e_{i-j} p_j;
    everything stays exact over the field, and commutation of the family
    makes the point independent of the choice of basis.
    """
    field = h.ring.field
    r, d = h.rank, h.dim
    pencil = [[{} for _ in range(r)] for _ in range(r)]
    for k, mat in enumerate(h.theta):
        unit = tuple(int(j == k) for j in range(d))
        for a in range(r):
            for b in range(r):
                s = mat.entries[a][b].coeffs[0]
                if not s.is_exact_zero:
                    pencil[a][b][unit] = s
    traces = []
    power = pencil
    for k in range(1, r + 1):
        if k > 1:
            power = _xp_matmul(power, pencil)
        traces.append(_xp_sum(power[i][i] for i in range(r)))
    elementary = [{(0,) * d: field.one()}]
    for i in range(1, r + 1):
        acc = {}
        for j in range(1, i + 1):
            term = _xp_mul(elementary[i - j], traces[j - 1])
            if j % 2 == 0:
                term = {e: -c for e, c in term.items()}
            acc = _xp_add(acc, term)
        elementary.append(_xp_scale(acc, field.fraction(Fraction(1, i))))
    return HitchinPoint(field, r, d, elementary[1:])


# ---------------------------------------------------------------------------
# coefficient data
# ---------------------------------------------------------------------------


def _check_family(ring, rank, dim, mats, label):
    if rank < 1 or dim < 1:
        raise ConfigMismatch("rank and dim must be >= 1")
    mats = list(mats)
    if len(mats) != dim:
        raise ConfigMismatch(f"need one {label} matrix per direction")
    out = []
    for mat in mats:
        if not isinstance(mat, CappedMatrix):
            mat = CappedMatrix(ring, mat)
        if mat.ring != ring:
            raise ConfigMismatch(f"{label} matrix over the wrong ring")
        if mat.rows != rank or mat.cols != rank:
            raise ConfigMismatch(f"{label} matrix is not {rank} x {rank}")
        out.append(mat)
    for i in range(dim):
        for j in range(i + 1, dim):
            defect = commutation_defect(out[i], out[j])
            if not defect.is_zerolike:
                raise CommutationFailure(
                    f"{label} matrices {i} and {j} do not commute; "
                    f"commutator valuation floor {defect.valuation_floor()}")
    return tuple(out)


class HiggsDatum:
    """Commuting matrix family over F in the twisted one-form basis.

    The stored matrices carry the (zeta_p - 1) normalization of the basis
    inside them, so smallness asks each one to be pi times an integral
    residue-nilpotent matrix.
    """

    __slots__ = ("ring", "rank", "dim", "theta", "twist")

    def __init__(self, ring, rank, dim, theta):
        if ring.t_order != 1:
            raise ConfigMismatch("Higgs data live over the t-order-1 ring")
        self.theta = _check_family(ring, rank, dim, theta, "Higgs")
        self.ring = ring
        self.rank = rank
        self.dim = dim
        self.twist = FORM_BASIS_TWIST


class ConnectionDatum:
    """Commuting connection matrices over B_n, one per direction."""

    __slots__ = ("ring", "rank", "dim", "nabla")

    def __init__(self, ring, rank, dim, nabla):
        self.nabla = _check_family(ring, rank, dim, nabla, "connection")
        self.ring = ring
        self.rank = rank
        self.dim = dim


class GammaRepDatum:
    """Commuting invertible matrices over B_n for the d group generators."""

    __slots__ = ("ring", "rank", "dim", "gamma")

    def __init__(self, ring, rank, dim, gamma):
        self.gamma = _check_family(ring, rank, dim, gamma, "gamma")
        self.ring = ring
        self.rank = rank
        self.dim = dim
        for i, mat in enumerate(self.gamma):
            try:
                _f_inverse(ring.field, _constant_part(mat))
            except ConfigMismatch:
                raise ConfigMismatch(
                    f"gamma matrix {i} is not invertible over the model ring")


def _constant_part(mat):
    """The t-constant scalar entries of a matrix over B_n."""
    return [[s.coeffs[0] for s in row] for row in mat.entries]


def _reduce_family(ring1, mats):
    return [CappedMatrix(ring1, [[ring1.constant(s) for s in row]
                                 for row in _constant_part(mat)])
            for mat in mats]


def connection_reduction(m):
    """The Higgs datum obtained by setting t = 0 in a connection."""
    ring1 = ModelRing(m.ring.field, 1)
    return HiggsDatum(ring1, m.rank, m.dim, _reduce_family(ring1, m.nabla))


def rep_reduction(g):
    """The gamma datum obtained by setting t = 0."""
    ring1 = ModelRing(g.ring.field, 1)
    return GammaRepDatum(ring1, g.rank, g.dim, _reduce_family(ring1, g.gamma))


def _truncate_family(ring, mats, t_order):
    small = ModelRing(ring.field, t_order)
    return [CappedMatrix(small, [[small.series(list(s.coeffs[:t_order]))
                                  for s in row] for row in mat.entries])
            for mat in mats]


def connection_truncate(m, t_order):
    """The same connection over the smaller ring B_{t_order}."""
    if not 1 <= t_order <= m.ring.t_order:
        raise ConfigMismatch("can only truncate to a smaller t-order")
    return ConnectionDatum(ModelRing(m.ring.field, t_order), m.rank, m.dim,
                           _truncate_family(m.ring, m.nabla, t_order))


def rep_truncate(g, t_order):
    """The same gamma datum over the smaller ring B_{t_order}."""
    if not 1 <= t_order <= g.ring.t_order:
        raise ConfigMismatch("can only truncate to a smaller t-order")
    return GammaRepDatum(ModelRing(g.ring.field, t_order), g.rank, g.dim,
                         _truncate_family(g.ring, g.gamma, t_order))


# ---------------------------------------------------------------------------
# valuation floors and truncation windows
# ---------------------------------------------------------------------------


def _pi_floor(x):
    """Certified pi-unit valuation floor of a scalar, INFINITY for zero."""
    lo = x.valuation_lower()
    if lo is INFINITY:
        return INFINITY
    return int(lo * x.F.e)


def _matrix_pi_floor(mat):
    w = mat.valuation_floor()
    if w is INFINITY:
        return INFINITY
    return int(w * mat.ring.field.e)


def _split_floors(mat):
    """Floors of the t-constant and t-positive parts, separately."""
    w0 = INFINITY
    wt = INFINITY
    for row in mat.entries:
        for s in row:
            c0 = s.coeffs[0]
            if not c0.is_exact_zero:
                w0 = min(w0, _pi_floor(c0))
            for ck in s.coeffs[1:]:
                if not ck.is_exact_zero:
                    wt = min(wt, _pi_floor(ck))
    return w0, wt


def _family_floors(mats):
    w0 = INFINITY
    wt = INFINITY
    for mat in mats:
        a, b = _split_floors(mat)
        w0 = min(w0, a)
        wt = min(wt, b)
    return w0, wt


def _word_bound(ring, w0, wt, length):
    """Valuation floor for any length-fold product of family letters.

    At most t_order - 1 factors can contribute their t-positive part
    before the product dies in B_n, so the bound optimizes over how many
    do.
    """
    if length == 0:
        return 0
    best = INFINITY
    for a in range(min(length, ring.t_order - 1) + 1):
        if length - a > 0 and w0 is INFINITY:
            continue
        if a > 0 and wt is INFINITY:
            continue
        val = (length - a) * (w0 if length - a else 0) + a * (wt if a else 0)
        best = min(best, val)
    return best


def _series_tail_floor(ring, w0, wt, kmin, offset=0):
    """Floor for the dropped tail sum_{k >= kmin} c^k / k! * (word k+offset).

    The scalar factor contributes k * (1 + shift) + digit_sum(k) and the
    matrix word its part-floor bound.  Monotonicity beyond the mixing
    range needs 1 + shift + w0 >= 1; anything weaker cannot be summed
    against the truncation and is reported as overflow.
    """
    sh = ring.shift
    if w0 is INFINITY and wt is INFINITY:
        return INFINITY
    if w0 is not INFINITY and 1 + sh + w0 < 1:
        raise TruncationOverflow(
            f"constant-part valuation floor {w0} pi-units is too low to "
            f"certify the series tail at shift {sh}")
    stop = max(kmin, ring.t_order - 1 - offset)
    best = INFINITY
    for k in range(kmin, stop + 1):
        wb = _word_bound(ring, w0, wt, k + offset)
        if wb is INFINITY:
            continue
        best = min(best, k * (1 + sh) + 1 + wb)
    return best


def _noise_entry(ring, bound):
    z = ring.field.zeroish(bound)
    return ring.series([z] * ring.t_order)


def _add_noise(mat, bound):
    """Charge an explicit O(pi^bound) window to every coefficient."""
    if bound is INFINITY:
        return mat
    noise = _noise_entry(mat.ring, bound)
    entries = [[s + noise for s in row] for row in mat.entries]
    return CappedMatrix(mat.ring, entries)


def _matrix_exact_zero(mat):
    return all(s.is_exact_zero for row in mat.entries for s in row)


def _target_window(mat, extra=0):
    field = mat.ring.field
    windows = [c.abs_window for row in mat.entries for s in row
               for c in s.coeffs if c.abs_window is not INFINITY]
    return max(windows + [field.rel + mat.ring.shift + 4]) + extra


# ---------------------------------------------------------------------------
# certified matrix exponential and logarithm over B_n
# ---------------------------------------------------------------------------


def _matrix_exp(mat):
    """exp of a matrix over B_n with an explicit window on the tail.

    Requires the t-constant part of the argument at pi-valuation 2 or
    more, which makes the term floors strictly increasing; nilpotent
    arguments terminate exactly and carry no window at all.
    """
    ring = mat.ring
    field = ring.field
    w0, wt = _split_floors(mat)
    if w0 is not INFINITY and w0 < 2:
        raise DivergentSeries(
            f"matrix exp needs constant-part valuation >= 2 pi-units, "
            f"found floor {w0}")
    target = _target_window(mat)

    def term_floor(k):
        wb = _word_bound(ring, w0, wt, k)
        return INFINITY if wb is INFINITY else wb - (k - 1)

    k = max(1, ring.t_order - 1)
    while term_floor(k) is not INFINITY and term_floor(k) < target:
        k += 1
        if k > 5000:
            raise AssertionError("exp cutoff runaway")
    cutoff = k
    acc = CappedMatrix.identity(ring, mat.rows)
    term = acc
    tail = term_floor(cutoff + 1)
    for k in range(1, cutoff + 1):
        term = (term * mat).scale(field.fraction(Fraction(1, k)))
        if _matrix_exact_zero(term):
            tail = INFINITY
            break
        acc = acc + term
    return _add_noise(acc, tail)


def _matrix_log(mat):
    """log of a matrix over B_n congruent to the identity.

    The t-constant part of (mat - 1) must have positive pi-valuation; the
    denominators grow only like v_p(k), so the cutoff comes from a
    digit-count scan rather than a factorial bound.
    """
    ring = mat.ring
    field = ring.field
    p, e = field.p, field.e
    x = mat - CappedMatrix.identity(ring, mat.rows)
    w0, wt = _split_floors(x)
    if w0 is not INFINITY and w0 < 1:
        raise DivergentSeries(
            f"matrix log diverges: (matrix - 1) has constant-part "
            f"valuation floor {w0} pi-units, needs >= 1")
    target = _target_window(mat)

    def tail_from(kstart):
        # within p^s <= j < p^(s+1) the denominator costs at most e*s
        best = INFINITY
        s = 0
        while p ** s <= kstart:
            s += 1
        s -= 1
        for step in range(s, s + 64):
            j = max(kstart, p ** step)
            wb = _word_bound(ring, w0, wt, j)
            if wb is not INFINITY:
                best = min(best, wb - e * step)
        return best

    cutoff = max(1, ring.t_order - 1)
    while tail_from(cutoff + 1) is not INFINITY and tail_from(cutoff + 1) < target:
        cutoff += 1
        if cutoff > 5000:
            raise AssertionError("log cutoff runaway")
    acc = CappedMatrix.zero(ring, mat.rows, mat.rows)
    power = CappedMatrix.identity(ring, mat.rows)
    tail = tail_from(cutoff + 1)
    for k in range(1, cutoff + 1):
        power = power * x
        if _matrix_exact_zero(power):
            tail = INFINITY
            break
        acc = acc + power.scale(field.fraction(Fraction((-1) ** (k - 1), k)))
    return _add_noise(acc, tail)


# ---------------------------------------------------------------------------
# smallness
# ---------------------------------------------------------------------------


class SmallnessVerdict:
    """Outcome of a smallness test.

    On success, normalized holds the integral generators (theta divided by
    zeta_p - 1, or the logarithm of gamma divided by pi^(2 + shift)); on
    provable failure, reason and witness say what broke.  Inputs too
    coarse to decide raise PrecisionExhausted instead of guessing.
    """

    __slots__ = ("ok", "reason", "witness", "normalized", "point")

    def __init__(self, ok, reason=None, witness=None, normalized=None,
                 point=None):
        self.ok = ok
        self.reason = reason
        self.witness = witness
        self.normalized = normalized
        self.point = point

    def __bool__(self):
        return self.ok

    def to_json(self):
        out = {"ok": self.ok}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.point is not None:
            out["point"] = self.point.to_json()
        return out

    def __repr__(self):
        if self.ok:
            return "SmallnessVerdict(ok)"
        return f"SmallnessVerdict(failed: {self.reason})"


def _residue_nilpotent(field, rows):
    """Nilpotence of an integral scalar matrix modulo pi."""
    p = field.p
    res = [[s.residue() for s in row] for row in rows]
    r = len(res)
    power = res
    for _ in range(r - 1):
        power = [[sum(power[i][k] * res[k][j] for k in range(r)) % p
                  for j in range(r)] for i in range(r)]
    return all(x % p == 0 for row in power for x in row)


def check_small_higgs(h):
    """Decide smallness of a Higgs datum.

    Every degree-i coefficient of the characteristic-polynomial point
    must have valuation strictly above i/(p - 1), each matrix must be
    (zeta_p - 1) times an integral matrix, and that quotient must have
    nilpotent residue.  The verdict carries the point and, on success,
    the normalized integral matrices.
    """
    field = h.ring.field
    point = hitchin_invariants(h)
    for i in range(1, h.rank + 1):
        threshold = Fraction(i, field.p - 1)
        for exps, coeff in sorted(point.components[i - 1].items()):
            lo = coeff.valuation_lower()
            if lo > threshold:
                continue
            if coeff.is_zeroish:
                raise PrecisionExhausted(
                    f"degree-{i} invariant coefficient at {exps} is only "
                    f"known to O(pi^{coeff.vp}); cannot compare with "
                    f"{threshold}")
            return SmallnessVerdict(
                False,
                reason=(f"degree-{i} invariant coefficient at exponents "
                        f"{exps} has valuation {coeff.valuation()}, not "
                        f"above {threshold}"),
                witness=coeff, point=point)
    pi_inv = field.pi_power(-1)
    normalized = []
    for k, mat in enumerate(h.theta):
        quotient = []
        for row in _constant_part(mat):
            qrow = []
            for s in row:
                q = s * pi_inv
                lo = q.valuation_lower()
                if lo is not INFINITY and lo < 0:
                    if q.is_zeroish:
                        raise PrecisionExhausted(
                            f"matrix {k} entry known too coarsely to test "
                            f"divisibility by zeta_p - 1")
                    return SmallnessVerdict(
                        False,
                        reason=(f"matrix {k} is not (zeta_p - 1) times an "
                                f"integral matrix; an entry has valuation "
                                f"{s.valuation()}"),
                        witness=s, point=point)
                qrow.append(q)
            quotient.append(qrow)
        if not _residue_nilpotent(field, quotient):
            return SmallnessVerdict(
                False,
                reason=(f"matrix {k} divided by (zeta_p - 1) does not have "
                        f"nilpotent residue"),
                point=point)
        normalized.append(CappedMatrix(
            h.ring, [[h.ring.constant(q) for q in row] for row in quotient]))
    return SmallnessVerdict(True, normalized=normalized, point=point)


def check_small_rep(g):
    """Decide smallness of a gamma datum; the condition lives mod t.

    Each (G_i - 1) mod t must be divisible by pi^(2 + shift) with
    integral quotient whose residue is nilpotent.  On success, normalized
    holds log(G_i mod t) divided by pi^(2 + shift), the integral Higgs
    generators of the reduction.
    """
    ring = g.ring
    field = ring.field
    c_val = 2 + ring.shift
    c_inv = field.pi_power(-c_val)
    ring1 = ModelRing(field, 1)
    one = field.one()
    normalized = []
    for k, mat in enumerate(g.gamma):
        const = _constant_part(mat)
        quotient = []
        for a in range(g.rank):
            qrow = []
            for b in range(g.rank):
                s = const[a][b] - one if a == b else const[a][b]
                q = s * c_inv
                lo = q.valuation_lower()
                if lo is not INFINITY and lo < 0:
                    if q.is_zeroish:
                        raise PrecisionExhausted(
                            f"gamma matrix {k} entry ({a},{b}) known too "
                            f"coarsely to test divisibility by pi^{c_val}")
                    return SmallnessVerdict(
                        False,
                        reason=(f"(gamma_{k} - 1) mod t is not divisible "
                                f"by pi^{c_val}: entry ({a},{b}) has "
                                f"valuation {s.valuation()}"),
                        witness=s)
                qrow.append(q)
            quotient.append(qrow)
        if not _residue_nilpotent(field, quotient):
            return SmallnessVerdict(
                False,
                reason=(f"(gamma_{k} - 1)/pi^{c_val} mod t does not have "
                        f"nilpotent residue"))
        g0 = CappedMatrix(ring1, [[ring1.constant(s) for s in row]
                                  for row in const])
        normalized.append(_matrix_log(g0).scale(c_inv))
    return SmallnessVerdict(True, normalized=normalized)


# ---------------------------------------------------------------------------
# the closed exponential route
# ---------------------------------------------------------------------------


def higgs_to_rep_closed(h):
    """Gamma datum of a small Higgs datum by the closed matrix series.

    G_i = exp(pi^(1 + shift) * theta_i); nilpotent normalized matrices
    terminate exactly, everything else carries an explicit tail window.
    """
    verdict = check_small_higgs(h)
    if not verdict:
        raise NotSmall(verdict.reason)
    rho = h.ring.rho
    gammas = [_matrix_exp(mat.scale(rho)) for mat in h.theta]
    return GammaRepDatum(h.ring, h.rank, h.dim, gammas)


# ---------------------------------------------------------------------------
# divided-power word tables and bases
# ---------------------------------------------------------------------------


def _graded_indices(dim, total):
    if dim == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _graded_indices(dim - 1, total - first):
            yield (first,) + rest


def _word_table(mats, cap):
    """Products M^J for all multi-indices of total degree <= cap.

    The first-nonzero-coordinate recursion fixes one multiplication
    order; the family commutes, so any other order agrees within stored
    windows.
    """
    dim = len(mats)
    ring = mats[0].ring
    table = {(0,) * dim: CappedMatrix.identity(ring, mats[0].rows)}
    for total in range(1, cap + 1):
        for J in _graded_indices(dim, total):
            i = next(pos for pos, x in enumerate(J) if x)
            prev = list(J)
            prev[i] -= 1
            table[J] = mats[i] * table[tuple(prev)]
    return table


def _pd_basis(ring, dim, cap, table, rank):
    """Column b of the table as a vector of PDElements, for each b."""
    basis = []
    for b in range(rank):
        comps = []
        for a in range(rank):
            terms = {}
            for J, mat in table.items():
                s = mat.entries[a][b]
                if not s.is_exact_zero:
                    terms[J] = s
            comps.append(PDElement(ring, dim, cap, terms))
        basis.append(comps)
    return basis


def _noise_floors(ring, w0, wt, cap):
    """Per-degree truncation noise of the capped basis equations."""
    return [_series_tail_floor(ring, w0, wt, cap - s + 1, offset=s)
            for s in range(cap + 1)]


def _certify_action(residuals, noise, context):
    """Require every residual coefficient to sit above the noise floor."""
    for x in residuals:
        for J, series in x.terms.items():
            bound = noise[sum(J)]
            for z in series.coeffs:
                if z.is_zerolike:
                    continue
                if bound is INFINITY or _pi_floor(z) < bound:
                    shown = "exact" if bound is INFINITY else f"{bound}"
                    raise TruncationOverflow(
                        f"{context}: residual at index {J} has valuation "
                        f"{z.valuation()} against a noise floor of {shown} "
                        f"pi-units; raise the degree cap and retry")


# ---------------------------------------------------------------------------
# solver route: connection -> gamma
# ---------------------------------------------------------------------------


def mic_to_rep(m, pd_cap=8):
    """Gamma datum of a small connection by the horizontal-basis solve.

    Builds the degree-capped horizontal basis K_b = sum_J W^[J] N^J e_b
    with letters N_i = u^{-1} nabla_i, reads each gamma matrix off the
    W-constant terms of the translated basis, charges the dropped part of
    the series to an explicit window, and recertifies the whole action
    equation against the noise floor of the truncation.
    """
    verdict = check_small_higgs(connection_reduction(m))
    if not verdict:
        raise NotSmall(verdict.reason)
    ring = m.ring
    field = ring.field
    r, d = m.rank, m.dim
    u_inv = field.pi_power(-1)
    letters = [mat.scale(u_inv) for mat in m.nabla]
    w0, wt = _family_floors(letters)
    table = _word_table(letters, pd_cap)
    basis = _pd_basis(ring, d, pd_cap, table, r)
    noise = _noise_floors(ring, w0, wt, pd_cap)
    g_tail = _series_tail_floor(ring, w0, wt, pd_cap + 1)
    gammas = []
    for i in range(d):
        shifted = [[gamma_shift(basis[b][a], i, 1) for a in range(r)]
                   for b in range(r)]
        entries = [[shifted[b][a].constant_term() for b in range(r)]
                   for a in range(r)]
        gmat = _add_noise(CappedMatrix(ring, entries), g_tail)
        residuals = []
        for b in range(r):
            for a in range(r):
                acc = shifted[b][a]
                for c in range(r):
                    acc = acc - basis[c][a].scale(gmat.entries[c][b])
                residuals.append(acc)
        _certify_action(residuals, noise,
                        f"horizontal basis, direction {i}")
        gammas.append(gmat)
    return GammaRepDatum(ring, r, d, gammas)


# ---------------------------------------------------------------------------
# solver route: gamma -> connection
# ---------------------------------------------------------------------------


def rep_to_mic(g, pd_cap=8):
    """Connection datum of a small gamma datum by the invariant-basis solve.

    With Theta_i = log(G_i)/pi^(2 + shift), the vectors
    Z_b = sum_J W^[J] (-Theta)^J e_b are fixed by every twisted generator
    G_i (x) shift_i; the certification replays that fixed-point equation
    degreewise.  The connection read off the basis is nabla_i =
    pi * Theta_i.
    """
    verdict = check_small_rep(g)
    if not verdict:
        raise NotSmall(verdict.reason)
    ring = g.ring
    field = ring.field
    r, d = g.rank, g.dim
    c_inv = field.pi_power(-(2 + ring.shift))
    thetas = [_matrix_log(mat).scale(c_inv) for mat in g.gamma]
    letters = [-t for t in thetas]
    w0, wt = _family_floors(letters)
    table = _word_table(letters, pd_cap)
    basis = _pd_basis(ring, d, pd_cap, table, r)
    g_floor = min((_matrix_pi_floor(mat) for mat in g.gamma),
                  default=INFINITY)
    pad = 0 if g_floor is INFINITY else min(0, g_floor)
    noise = [x if x is INFINITY else x + pad
             for x in _noise_floors(ring, w0, wt, pd_cap)]
    for i in range(d):
        gmat = g.gamma[i]
        residuals = []
        for b in range(r):
            for a in range(r):
                acc = -basis[b][a]
                for c in range(r):
                    acc = acc + gamma_shift(basis[b][c], i, 1).scale(
                        gmat.entries[a][c])
                residuals.append(acc)
        _certify_action(residuals, noise,
                        f"invariant basis, direction {i}")
    nablas = [t.scale(ring.u_const) for t in thetas]
    return ConnectionDatum(ring, r, d, nablas)


# ---------------------------------------------------------------------------
# duals, tensors, and round trips
# ---------------------------------------------------------------------------


def _kron(a, b):
    ring = a.ring
    entries = []
    for i in range(a.rows):
        for k in range(b.rows):
            row = []
            for j in range(a.cols):
                x = a.entries[i][j]
                for l in range(b.cols):
                    y = b.entries[k][l]
                    if x.is_exact_zero or y.is_exact_zero:
                        row.append(ring.zero())
                    else:
                        row.append(x * y)
            entries.append(row)
    return CappedMatrix(ring, entries)


def connection_dual(m):
    """Dual module: letters negate and transpose."""
    return ConnectionDatum(m.ring, m.rank, m.dim,
                           [-mat.transpose() for mat in m.nabla])


def connection_tensor(a, b):
    """Tensor product: Kronecker sums of the letters."""
    if a.ring != b.ring or a.dim != b.dim:
        raise ConfigMismatch("tensor factors over different settings")
    ia = CappedMatrix.identity(a.ring, a.rank)
    ib = CappedMatrix.identity(b.ring, b.rank)
    mats = [_kron(x, ib) + _kron(ia, y) for x, y in zip(a.nabla, b.nabla)]
    return ConnectionDatum(a.ring, a.rank * b.rank, a.dim, mats)


def rep_dual(g):
    """Dual module: inverse transpose of each generator matrix."""
    return GammaRepDatum(g.ring, g.rank, g.dim,
                         [mat.inverse().transpose() for mat in g.gamma])


def rep_tensor(a, b):
    """Tensor product: Kronecker products of the generator matrices."""
    if a.ring != b.ring or a.dim != b.dim:
        raise ConfigMismatch("tensor factors over different settings")
    return GammaRepDatum(a.ring, a.rank * b.rank, a.dim,
                         [_kron(x, y) for x, y in zip(a.gamma, b.gamma)])


class RoundTripReport:
    """Defect record of a there-and-back translation.

    defect_floor is a certified valuation lower bound (in p-units) for
    every entry of original - recovered; base_change records the change
    of basis relating the two sides, the identity for this solver pair.
    The derived dict holds the same floors for the dual and for the
    tensor with a fixed rank-1 probe, translated independently.
    """

    __slots__ = ("kind", "defects", "defect_floor", "base_change", "derived")

    def __init__(self, kind, defects, defect_floor, base_change, derived):
        self.kind = kind
        self.defects = defects
        self.defect_floor = defect_floor
        self.base_change = base_change
        self.derived = derived

    def meets(self, digits):
        """True when the defect floor certifies the given p-unit count."""
        return self.defect_floor is INFINITY or self.defect_floor >= digits

    def to_json(self):
        show = lambda v: "inf" if v is INFINITY else str(v)
        return {"kind": self.kind,
                "defect_floor": show(self.defect_floor),
                "derived": {k: show(v) for k, v in self.derived.items()}}

    def __repr__(self):
        return (f"RoundTripReport({self.kind}, "
                f"defect_floor={self.defect_floor})")


def _family_defect_floor(defects):
    floor = INFINITY
    for mat in defects:
        floor = min(floor, mat.valuation_floor())
    return floor


def _probe_connection(ring, dim):
    # rank-1, visibly small: theta-hat = p in every direction, t-part p
    field = ring.field
    pi_p = field.pi_power(1) * field.integer(field.p)
    coeffs = [pi_p] * ring.t_order
    mat = CappedMatrix(ring, [[ring.series(coeffs)]])
    return ConnectionDatum(ring, 1, dim, [mat] * dim)


def roundtrip_check(instance, pd_cap=8, check_derived=True):
    """Translate an instance across the dictionary and back.

    Accepts a connection or a gamma datum; the report carries certified
    valuation floors for the recovery defect, and optionally for the
    defects of the dual and of the tensor with a rank-1 probe, each
    translated on its own.
    """
    if isinstance(instance, ConnectionDatum):
        kind = "connection"
        mid = mic_to_rep(instance, pd_cap)
        back = rep_to_mic(mid, pd_cap)
        defects = [b - a for a, b in zip(instance.nabla, back.nabla)]
        m_side, g_side = instance, mid
    elif isinstance(instance, GammaRepDatum):
        kind = "gamma"
        mid = rep_to_mic(instance, pd_cap)
        back = mic_to_rep(mid, pd_cap)
        defects = [b - a for a, b in zip(instance.gamma, back.gamma)]
        m_side, g_side = mid, instance
    else:
        raise ConfigMismatch("roundtrip_check wants a connection or gamma "
                             "datum")
    derived = {}
    if check_derived:
        dual_defects = [b - a for a, b in zip(
            mic_to_rep(connection_dual(m_side), pd_cap).gamma,
            rep_dual(g_side).gamma)]
        derived["dual"] = _family_defect_floor(dual_defects)
        probe = _probe_connection(instance.ring, instance.dim)
        tensor_defects = [b - a for a, b in zip(
            mic_to_rep(connection_tensor(m_side, probe), pd_cap).gamma,
            rep_tensor(g_side, mic_to_rep(probe, pd_cap)).gamma)]
        derived["tensor"] = _family_defect_floor(tensor_defects)
    base_change = CappedMatrix.identity(instance.ring, instance.rank)
    return RoundTripReport(kind, defects, _family_defect_floor(defects),
                           base_change, derived)


# ---------------------------------------------------------------------------
# cohomology on both sides
# ---------------------------------------------------------------------------


def gamma_cohomology(g):
    """Koszul cohomology report of the operators (G_i - 1) on B_n^r."""
    ident = CappedMatrix.identity(g.ring, g.rank)
    return cohomology_compute(koszul_build([mat - ident for mat in g.gamma]))


def de_rham_cohomology(m):
    """Koszul cohomology report of the connection letters on B_n^r."""
    return cohomology_compute(koszul_build(list(m.nabla)))


def compare_cohomology(g, m):
    """Comparison verdict between the two sides of a corresponding pair."""
    return complex_compare(gamma_cohomology(g), de_rham_cohomology(m))


# ---------------------------------------------------------------------------
# the triangular transport between twisted and plain differentials
# ---------------------------------------------------------------------------


def _transport(table, vec):
    """Apply y -> sum_{K <= J} binom(J, K) M^K y_{J-K} to a pd vector.

    Exact, degree-preserving, and triangular; the table decides which
    letters M_i are used, so the same routine gives the map and its
    inverse (table of the negated letters).
    """
    rank = len(vec)
    ring = vec[0].ring
    dim, cap = vec[0].dim, vec[0].cap
    rel = min(x.reliable for x in vec)
    sources = {}
    for a, x in enumerate(vec):
        for J, s in x.terms.items():
            sources.setdefault(J, [None] * rank)[a] = s
    out = [dict() for _ in range(rank)]
    for L, coeffs in sources.items():
        for K, mat in table.items():
            J = tuple(l + k for l, k in zip(L, K))
            if sum(J) > cap:
                continue
            binom = math.prod(math.comb(l + k, k) for l, k in zip(L, K))
            for a in range(rank):
                acc = None
                for b in range(rank):
                    s = coeffs[b]
                    if s is None:
                        continue
                    entry = mat.entries[a][b]
                    if entry.is_exact_zero:
                        continue
                    val = entry * s
                    acc = val if acc is None else acc + val
                if acc is None:
                    continue
                if binom != 1:
                    acc = acc.scale(ring.field.integer(binom))
                out[a][J] = out[a][J] + acc if J in out[a] else acc
    return [PDElement(ring, dim, cap, terms, rel) for terms in out]


def _letters(m):
    u_inv = m.ring.field.pi_power(-1)
    return [mat.scale(u_inv) for mat in m.nabla]


def connection_differential(m, forms):
    """Differential of a vector of forms in the twisted complex.

    forms is one PDForm per module coordinate, all of one degree; the
    output combines the coefficientwise differential with the matrix
    wedge by the connection one-form, matching signs with the scalar
    complex.
    """
    if len(forms) != m.rank:
        raise ConfigMismatch("need one form per module coordinate")
    degree = forms[0].degree
    cap = forms[0].cap
    for w in forms:
        if w.degree != degree or w.cap != cap or w.dim != m.dim:
            raise ConfigMismatch("mismatched forms in the vector")
    scalar_parts = [form_differential(w) for w in forms]
    out = []
    for a in range(m.rank):
        comps = dict(scalar_parts[a].comps)
        for b in range(m.rank):
            for S, x in forms[b].comps.items():
                for i in range(m.dim):
                    if i in S:
                        continue
                    entry = m.nabla[i].entries[a][b]
                    if entry.is_exact_zero:
                        continue
                    nS = tuple(sorted(S + (i,)))
                    val = x.scale(entry)
                    if sum(1 for j in S if j < i) % 2:
                        val = -val
                    comps[nS] = comps[nS] + val if nS in comps else val
        out.append(PDForm(m.ring, m.dim, cap, scalar_parts[a].degree, comps,
                          scalar_parts[a].twist))
    return out


def vector_forms_agree(left, right):
    """Componentwise window agreement of two vectors of forms."""
    return all(x.agrees_with(y) for x, y in zip(left, right))


def horizontal_poincare_solve(m, forms):
    """A primitive of a closed vector of forms in the twisted complex.

    Conjugates by the exact triangular transport that straightens the
    twisted differential into the coefficientwise one, integrates each
    coordinate with the scalar contracting homotopy, and conjugates
    back.  The caller certifies the answer against
    connection_differential, exactly as in the scalar case.
    """
    if forms[0].degree < 1:
        raise ConfigMismatch("need a form of degree >= 1 to integrate")
    cap = forms[0].cap
    straight = _word_table([-x for x in _letters(m)], cap)
    curved = _word_table(_letters(m), cap)
    keys = set()
    for w in forms:
        keys |= set(w.comps)
    flat = {S: _transport(straight, [w.component(S) for w in forms])
            for S in keys}
    primitives = []
    for a in range(m.rank):
        w = PDForm(m.ring, m.dim, cap, forms[0].degree,
                   {S: flat[S][a] for S in keys}, forms[a].twist)
        primitives.append(poincare_solve(w))
    out_keys = set()
    for w in primitives:
        out_keys |= set(w.comps)
    back = {S: _transport(curved, [w.component(S) for w in primitives])
            for S in out_keys}
    return [PDForm(m.ring, m.dim, cap, forms[0].degree - 1,
                   {S: back[S][a] for S in out_keys}, primitives[a].twist)
            for a in range(m.rank)]


# ---------------------------------------------------------------------------
# the gamma-side cocycle solver, one group generator
# ---------------------------------------------------------------------------


def _gamma_prime(field, shift, k):
    # c^(k-1)/k! with c = pi^(2 + shift); integral for all k >= 1
    return field.pi_power((2 + shift) * (k - 1)) * Fraction(
        1, math.factorial(k))


def _shift_solve(ring, x):
    """Right inverse of (translation - 1) on one divided-power coordinate.

    translation - 1 = cD (1 + V) with D the degree-lowering derivative
    and V = sum_{k >= 2} c^(k-1)/k! D^(k-1) nilpotent, so the unit part
    inverts by a finite Neumann series and cD by one index raise.
    """
    field = ring.field
    c_inv = field.pi_power(-(2 + ring.shift))
    gam = [_gamma_prime(field, ring.shift, k) for k in range(x.cap + 3)]

    def vee(w):
        acc = None
        dw = w
        for k in range(2, w.cap + 3):
            dw = dw.deriv(0)
            if not dw.terms:
                break
            val = dw.scale(gam[k])
            acc = val if acc is None else acc + val
        return acc

    lift = x.raise_index(0).scale(c_inv)
    y = lift
    term = lift
    for _ in range(x.cap + 1):
        nxt = vee(term)
        if nxt is None:
            break
        term = -nxt
        y = y + term
    return y


def rep_coboundary_residual(g, y, x):
    """The defect (gamma (x) shift)(y) - y - x of a proposed coboundary."""
    if g.dim != 1:
        raise ConfigMismatch("the gamma-side solver handles one generator")
    out = []
    for a in range(g.rank):
        acc = -y[a] - x[a]
        for b in range(g.rank):
            entry = g.gamma[0].entries[a][b]
            if entry.is_exact_zero:
                continue
            acc = acc + gamma_shift(y[b], 0, 1).scale(entry)
        out.append(acc)
    return out


def rep_coboundary_solve(g, x):
    """Solve ((gamma (x) shift) - 1) y = x on the degree-capped module.

    Conjugating by the invariant-basis transport reduces each coordinate
    to the scalar translation operator; the caller certifies with
    rep_coboundary_residual, which vanishes within windows whenever the
    input was a coboundary visible at this cap.
    """
    if g.dim != 1:
        raise ConfigMismatch("the gamma-side solver handles one generator")
    verdict = check_small_rep(g)
    if not verdict:
        raise NotSmall(verdict.reason)
    ring = g.ring
    c_inv = ring.field.pi_power(-(2 + ring.shift))
    theta = _matrix_log(g.gamma[0]).scale(c_inv)
    cap = x[0].cap
    unstraighten = _word_table([-theta], cap)
    straighten = _word_table([theta], cap)
    flat = _transport(straighten, list(x))
    solved = [_shift_solve(ring, xa) for xa in flat]
    return _transport(unstraighten, solved)


# ---------------------------------------------------------------------------
# devissage of module presentations along t
# ---------------------------------------------------------------------------


class DevissageVerdict:
    """Outcome of the t-filtration freeness test.

    graded_dims[i] is the F-dimension of t^i M / t^(i+1) M; the module is
    free exactly when all of them equal the bottom one, and then basis
    names generators whose classes are certified to generate freely.  On
    failure failing_n is the first level whose dimension drops.
    """

    __slots__ = ("ok", "rank", "graded_dims", "failing_n", "basis",
                 "precision")

    def __init__(self, ok, rank, graded_dims, failing_n, basis, precision):
        self.ok = ok
        self.rank = rank
        self.graded_dims = tuple(graded_dims)
        self.failing_n = failing_n
        self.basis = basis
        self.precision = precision

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "rank": self.rank,
                "graded_dims": list(self.graded_dims),
                "failing_n": self.failing_n,
                "basis": None if self.basis is None else list(self.basis)}

    def __repr__(self):
        if self.ok:
            return (f"DevissageVerdict(free of rank {self.rank}, "
                    f"basis {list(self.basis)})")
        return (f"DevissageVerdict(not free: level {self.failing_n} "
                f"dimension {self.graded_dims[self.failing_n]} < "
                f"{self.rank})")


def devissage_lift(presentation):
    """Constructive freeness test for a presented module over B_m.

    presentation is a matrix over B_m whose columns are relations among
    the row generators; the module is the cokernel.  Computes every
    graded dimension along the t-filtration by scalar rank counts,
    stops at the first level that drops, and on success returns a subset
    of the generators certified to be a free basis.
    """
    ring = presentation.ring
    field = ring.field
    mm = ring.t_order
    ngen = presentation.rows
    span = []
    for col in range(presentation.cols):
        vec = []
        for a in range(ngen):
            vec.extend(presentation.entries[a][col].coeffs)
        for s in range(mm):
            span.append(_t_shift(vec, s, mm))
    floors = [INFINITY]

    def rank_of(vectors):
        rank, floor = _f_rank(field, [list(v) for v in vectors])
        floors[0] = min(floors[0], floor)
        return rank

    def unit(a, j):
        vec = [field.zero()] * (ngen * mm)
        vec[a * mm + j] = field.one()
        return vec

    def tail_units(level):
        return [unit(a, j) for a in range(ngen) for j in range(level, mm)]

    ranks = [rank_of(tail_units(i) + span) for i in range(mm)]
    ranks.append(rank_of(span))
    dims = [ranks[i] - ranks[i + 1] for i in range(mm)]
    rank = dims[0]
    for level in range(1, mm):
        if dims[level] != rank:
            return DevissageVerdict(False, rank, dims, level, None,
                                    floors[0])
    base = tail_units(1) + span
    chosen = []
    current = ranks[1]
    for a in range(ngen):
        if len(chosen) == rank:
            break
        candidate = base + [unit(c, 0) for c in chosen] + [unit(a, 0)]
        grown = rank_of(candidate)
        if grown > current:
            chosen.append(a)
            current = grown
    if len(chosen) != rank:
        raise TruncationOverflow(
            "could not assemble a generating set; input precision too low")
    generators = [_t_shift(unit(a, 0), s, mm) for a in chosen
                  for s in range(mm)]
    if rank_of(span + generators) != ngen * mm:
        raise TruncationOverflow(
            "chosen generators provably fail to span; input precision "
            "too low")
    return DevissageVerdict(True, rank, dims, None, tuple(chosen),
                            floors[0])


# ---------------------------------------------------------------------------
# annihilation of the truncated cokernel of (gamma - 1)
# ---------------------------------------------------------------------------


class AnnihilationVerdict:
    """Certificate that pi^(2 + shift) clears the truncated cokernel.

    For every degree in the window and every module generator, the
    verdict records that c times that generator was solved back through
    (gamma - 1) by an integral element, up to residuals provably inside
    the truncation noise.  divisors holds the elementary divisor
    valuations of the full truncated operator for reference.
    """

    __slots__ = ("ok", "cap", "window", "margin", "annihilator_valuation",
                 "failures", "divisors")

    def __init__(self, ok, cap, window, margin, annihilator_valuation,
                 failures, divisors):
        self.ok = ok
        self.cap = cap
        self.window = window
        self.margin = margin
        self.annihilator_valuation = annihilator_valuation
        self.failures = tuple(failures)
        self.divisors = tuple(divisors)

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "cap": self.cap,
                "window": list(self.window), "margin": self.margin,
                "annihilator_valuation": self.annihilator_valuation,
                "failures": list(self.failures),
                "divisors": list(self.divisors)}

    def __repr__(self):
        state = "ok" if self.ok else f"failed: {self.failures[0]}"
        return (f"AnnihilationVerdict({state}, window={self.window}, "
                f"divisors={self.divisors})")


def annihilation_check(g, pd_cap=12, margin=None, min_degree=0):
    """Certify pi^(2 + shift) annihilates coker(gamma - 1) on a window.

    Works on the degree-capped divided-power module over the t-order-1
    ring, with one generator and rank at most 2.  For each window degree
    the scaled generator equation is solved by upward Gauss-Seidel
    sweeps whose iterates are integral by construction; the verdict
    checks integrality and that the final residual sits inside the
    truncation noise.  Degrees within margin of the cap are excluded:
    there the noise floor swallows everything.
    """
    if g.ring.t_order != 1:
        raise ConfigMismatch("annihilation certificates run at t-order 1")
    if g.dim != 1:
        raise ConfigMismatch("annihilation certificates take one generator")
    if g.rank > 2:
        raise ConfigMismatch("annihilation certificates cover rank <= 2")
    field = g.ring.field
    sh = g.ring.shift
    floor = _matrix_pi_floor(g.gamma[0])
    if floor is not INFINITY and floor < 0:
        raise ConfigMismatch("gamma must preserve the integral lattice")
    if margin is None:
        # noise floor at the window top must clear the annihilator valuation
        margin = max(2, -((4 + 2 * sh) // -(1 + sh)) - 1)
    hi = pd_cap - margin
    if hi < min_degree:
        raise TruncationOverflow(
            f"window [{min_degree}, {hi}] is empty at cap {pd_cap}; "
            f"raise the cap")
    r = g.rank
    zero, one = field.zero(), field.one()
    g0 = _constant_part(g.gamma[0])
    g0_inv = _f_inverse(field, g0)
    c_inv = field.pi_power(-(2 + sh))
    theta_tilde = [[(g0[a][b] - (one if a == b else zero)) * c_inv
                    for b in range(r)] for a in range(r)]
    for a in range(r):
        for b in range(r):
            lo = theta_tilde[a][b].valuation_lower()
            if lo is not INFINITY and lo < 0:
                if theta_tilde[a][b].is_zeroish:
                    raise PrecisionExhausted(
                        f"(gamma - 1) entry ({a},{b}) known too coarsely "
                        f"to test divisibility by pi^{2 + sh}")
                raise NotSmall(
                    f"(gamma - 1) is not divisible by pi^{2 + sh}: entry "
                    f"({a},{b})")
    gam = [_gamma_prime(field, sh, k) for k in range(pd_cap + 2)]

    def mat_vec(mat, vec):
        return [sum((mat[a][b] * vec[b] for b in range(r)), zero)
                for a in range(r)]

    noise_div = [max(0, (pd_cap + 1 - j) * (1 + sh) + 1 - (2 + sh))
                 for j in range(pd_cap + 1)]
    sweeps = (pd_cap + 1) * (1 + sh) + field.rel + 8
    failures = []
    for mdeg in range(min_degree, hi + 1):
        for gen in range(r):
            target = [one if b == gen else zero for b in range(r)]
            y = [[zero] * r for _ in range(pd_cap + 1)]
            for _ in range(sweeps):
                for j in range(pd_cap):
                    rhs = list(target) if j == mdeg else [zero] * r
                    tt = mat_vec(theta_tilde, y[j])
                    rhs = [rhs[a] - tt[a] for a in range(r)]
                    nxt = mat_vec(g0_inv, rhs)
                    for k in range(2, pd_cap - j + 1):
                        for a in range(r):
                            nxt[a] = nxt[a] - gam[k] * y[j + k][a]
                    y[j + 1] = nxt
            for j in range(pd_cap + 1):
                for a in range(r):
                    lo = y[j][a].valuation_lower()
                    if lo is not INFINITY and lo < 0:
                        failures.append(
                            f"degree {mdeg} generator {gen}: solution "
                            f"coefficient at ({j},{a}) is non-integral "
                            f"({y[j][a].valuation()})")
            for j in range(pd_cap + 1):
                res = mat_vec(theta_tilde, y[j])
                acc = [zero] * r
                for k in range(1, pd_cap - j + 1):
                    for a in range(r):
                        acc[a] = acc[a] + gam[k] * y[j + k][a]
                gacc = mat_vec(g0, acc)
                for a in range(r):
                    val = res[a] + gacc[a]
                    if j == mdeg:
                        val = val - target[a]
                    if val.is_zerolike:
                        continue
                    if _pi_floor(val) < noise_div[j]:
                        failures.append(
                            f"degree {mdeg} generator {gen}: residual at "
                            f"({j},{a}) has valuation {val.valuation()} "
                            f"below the noise floor "
                            f"{noise_div[j]}/{field.e} + {2 + sh}/{field.e}")
    rows = []
    cf = [field.pi_power((2 + sh) * k) * Fraction(1, math.factorial(k))
          for k in range(pd_cap + 1)]
    for j in range(pd_cap + 1):
        for a in range(r):
            row = []
            for mcol in range(pd_cap + 1):
                for b in range(r):
                    if mcol < j:
                        row.append(zero)
                        continue
                    val = g0[a][b] * cf[mcol - j]
                    if mcol == j and a == b:
                        val = val - one
                    row.append(val)
            rows.append(row)
    divisors, _ = dvr_smith(field, rows)
    return AnnihilationVerdict(not failures, pd_cap, (min_degree, hi),
                               margin, 2 + sh, failures, divisors)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------
# All matrices are polynomials in one strictly upper triangular integer
# seed, conjugated by a unimodular integer matrix: scalar arithmetic on
# exact inputs is exact, so the families commute exactly, not just within
# windows.


def _int_capped(ring, rows):
    field = ring.field
    return CappedMatrix(ring, [[ring.constant(field.integer(v)) for v in row]
                               for row in rows])


def _random_unimodular(rng, ring, r):
    fwd = [[int(i == j) for j in range(r)] for i in range(r)]
    ops = []
    for _ in range(2 * r):
        if r < 2:
            break
        a, b = rng.sample(range(r), 2)
        k = rng.randrange(-2, 3)
        ops.append((a, b, k))
        for j in range(r):
            fwd[a][j] += k * fwd[b][j]
    inv = [[int(i == j) for j in range(r)] for i in range(r)]
    for a, b, k in reversed(ops):
        for j in range(r):
            inv[a][j] -= k * inv[b][j]
    return _int_capped(ring, fwd), _int_capped(ring, inv)


def _random_seed_powers(rng, ring, r):
    seed = [[rng.randrange(-3, 4) if j > i else 0 for j in range(r)]
            for i in range(r)]
    powers = [CappedMatrix.identity(ring, r), _int_capped(ring, seed)]
    for _ in range(2, r):
        powers.append(powers[-1] * powers[1])
    return powers


def _random_nilpotent(rng, ring, powers):
    r = powers[0].rows
    acc = CappedMatrix.zero(ring, r, r)
    for k in range(1, r):
        a = rng.randrange(-3, 4)
        if a:
            acc = acc + powers[k].scale(ring.field.integer(a))
    return acc


def random_higgs(rng, ring, rank, dim):
    """A random exactly-commuting small Higgs datum."""
    if ring.t_order != 1:
        raise ConfigMismatch("Higgs data live over the t-order-1 ring")
    field = ring.field
    powers = _random_seed_powers(rng, ring, rank)
    q, q_inv = _random_unimodular(rng, ring, rank)
    mats = []
    for _ in range(dim):
        core = _random_nilpotent(rng, ring, powers)
        scalar = field.p * rng.randrange(-2, 3)
        if scalar:
            core = core + CappedMatrix.identity(ring, rank).scale(
                field.integer(scalar))
        mats.append((q_inv * core * q).scale(ring.u_const))
    return HiggsDatum(ring, rank, dim, mats)


def random_connection(rng, ring, rank, dim):
    """A random exactly-commuting connection with small reduction."""
    field = ring.field
    powers = _random_seed_powers(rng, ring, rank)
    q, q_inv = _random_unimodular(rng, ring, rank)
    mats = []
    for _ in range(dim):
        core = _random_nilpotent(rng, ring, powers)
        scalar = field.p * rng.randrange(-2, 3)
        if scalar:
            core = core + CappedMatrix.identity(ring, rank).scale(
                field.integer(scalar))
        for k in range(1, ring.t_order):
            layer = CappedMatrix.zero(ring, rank, rank)
            for mpow in range(rank):
                a = rng.randrange(-2, 3)
                if a:
                    layer = layer + powers[mpow].scale(field.integer(a))
            core = core + layer.scale(ring.monomial(k, field.one()))
        mats.append((q_inv * core * q).scale(ring.u_const))
    return ConnectionDatum(ring, rank, dim, mats)


def random_rep(rng, ring, rank, dim):
    """A random exactly-commuting small gamma datum.

    The t-constant part is a terminating exponential of a nilpotent, so
    the instance is exact and round trips measure pure solver defects.
    """
    field = ring.field
    powers = _random_seed_powers(rng, ring, rank)
    q, q_inv = _random_unimodular(rng, ring, rank)
    c = ring.gamma_const
    mats = []
    for _ in range(dim):
        head = _matrix_exp(_random_nilpotent(rng, ring, powers).scale(c))
        tail = CappedMatrix.identity(ring, rank)
        for k in range(1, ring.t_order):
            layer = CappedMatrix.zero(ring, rank, rank)
            for mpow in range(rank):
                a = rng.randrange(-2, 3)
                if a:
                    layer = layer + powers[mpow].scale(field.integer(a))
            tail = tail + layer.scale(ring.monomial(k, c))
        mats.append(q_inv * (head * tail) * q)
    return GammaRepDatum(ring, rank, dim, mats)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_KIND_KEYS = (("theta", HiggsDatum), ("nabla", ConnectionDatum),
              ("gamma", GammaRepDatum))


def instance_to_json(datum, pd_cap=None):
    for key, cls in _KIND_KEYS:
        if isinstance(datum, cls):
            out = {"rank": datum.rank, "dim": datum.dim,
                   "t_order": datum.ring.t_order,
                   key: [mat.to_json() for mat in getattr(datum, key)]}
            if pd_cap is not None:
                out["pd_cap"] = pd_cap
            return out
    raise ConfigMismatch("not a serializable instance")


def instance_from_json(ring, obj):
    if ring.t_order != obj["t_order"]:
        raise ConfigMismatch(
            f"instance is at t-order {obj['t_order']}, ring at "
            f"{ring.t_order}")
    for key, cls in _KIND_KEYS:
        if key in obj:
            mats = [CappedMatrix.from_json(ring, mo) for mo in obj[key]]
            return cls(ring, obj["rank"], obj["dim"], mats)
    raise ConfigMismatch("no instance payload found")
