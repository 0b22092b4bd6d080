"""Finitely generated commutative monoids and semistable chart bookkeeping.

A monoid enters as a presentation: k generators and finitely many
relations, each relation a pair of exponent vectors in N^k that are
declared equal.  The word problem is solved by completing the relation
set into a confluent vector rewriting system (Buchberger completion on
pure-difference pairs under graded lexicographic order); everything else
is built on top of that and on exact integer lattice arithmetic.

The two log-structure predicates follow their categorical definitions.
A monoid is integral when the natural map to its group completion
Z^k / L is injective, with L the lattice spanned by the relation
differences; the decision compares the presented congruence against the
full lattice congruence, which is obtained by iterated common-factor
stripping and recompletion.  A monoid is saturated when it is integral
and closed under roots inside the completion; the decision enumerates
lattice points of the rational cone over a certified box and checks each
against the monoid image.  Both computations are exact at desk sizes and
raise SizeLimit instead of approximating beyond them.

Exactification takes a surjection f between integral monoids, forms the
kernel G of the induced map on group completions, and returns the
preimage monoid M' together with the factorization through it.  M' is
generated by the source generators and ±G, and the routine certifies
that claim by bounded box enumeration; it also certifies that G lands
in the units of M', which is what makes the sharp quotients of M' and
the source agree.

Chart descriptors record the combinatorial shape of a semistable
coordinate patch: dimension d, the number r of divisor coordinates tied
by the single multiplicative relation, and the rational exponent a of
that relation.  They expose the monoid skeleton of the chart (the unit
part of the log structure is abstracted into one formal tag generator)
and the log differential basis with its one relation and the standard
elimination that the series-level modules consume.
"""

import itertools
import math
from fractions import Fraction

from .errors import ConfigMismatch, SizeLimit

_RULE_LIMIT = 4096
_STEP_LIMIT = 500_000
_SATURATION_ROUNDS = 64
_BOX_LIMIT = 400_000
_SATURATED_MAX_GENERATORS = 6
_EXACTIFY_MAX_KERNEL_RANK = 4


# ---------------------------------------------------------------------------
# exponent vector helpers
# ---------------------------------------------------------------------------


def _vec(v, k, what):
    out = tuple(int(x) for x in v)
    if len(out) != k:
        raise ConfigMismatch(f"{what} has length {len(out)}, expected {k}")
    if any(x < 0 for x in out):
        raise ConfigMismatch(f"{what} has a negative exponent: {out}")
    return out


def _glex(v):
    return (sum(v), v)


def _divides(a, v):
    return all(x <= y for x, y in zip(a, v))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _strip(a, b):
    common = tuple(min(x, y) for x, y in zip(a, b))
    return _sub(a, common), _sub(b, common)


# ---------------------------------------------------------------------------
# confluent rewriting for the presented congruence
# ---------------------------------------------------------------------------


class _Rewriter:
    """Confluent rewriting system deciding the presented congruence."""

    __slots__ = ("k", "rules")

    def __init__(self, k, pairs):
        self.k = k
        self.rules = []
        queue = [(_vec(a, k, "relation side"), _vec(b, k, "relation side"))
                 for a, b in pairs]
        steps = 0
        while queue:
            a, b = queue.pop()
            a = self.normal(a)
            b = self.normal(b)
            if a == b:
                continue
            if _glex(a) < _glex(b):
                a, b = b, a
            # only genuinely overlapping pairs can break local confluence
            for lhs, rhs in self.rules:
                if any(min(x, y) > 0 for x, y in zip(a, lhs)):
                    m = tuple(max(x, y) for x, y in zip(a, lhs))
                    queue.append((_add(_sub(m, a), b), _add(_sub(m, lhs), rhs)))
            self.rules.append((a, b))
            if len(self.rules) > _RULE_LIMIT:
                raise SizeLimit(
                    f"congruence completion exceeded {_RULE_LIMIT} rules")
            steps += 1
            if steps > _STEP_LIMIT:
                raise SizeLimit("congruence completion did not stabilize")
        self._interreduce()

    def _interreduce(self):
        changed = True
        rounds = 0
        while changed:
            changed = False
            rounds += 1
            if rounds > _SATURATION_ROUNDS:
                raise SizeLimit("rewriting system interreduction ran away")
            for i, (lhs, rhs) in enumerate(list(self.rules)):
                others = self.rules[:i] + self.rules[i + 1:]
                nl = self._normal_with(lhs, others)
                nr = self._normal_with(rhs, others)
                if nl == lhs and nr == rhs:
                    continue
                self.rules = others
                if nl != nr:
                    if _glex(nl) < _glex(nr):
                        nl, nr = nr, nl
                    self.rules.append((nl, nr))
                changed = True
                break

    def _normal_with(self, v, rules):
        steps = 0
        done = False
        while not done:
            done = True
            for lhs, rhs in rules:
                if _divides(lhs, v):
                    v = _add(_sub(v, lhs), rhs)
                    done = False
                    steps += 1
                    if steps > _STEP_LIMIT:
                        raise SizeLimit("rewriting did not terminate")
                    break
        return v

    def normal(self, v):
        return self._normal_with(v, self.rules)

    def equal(self, a, b):
        return self.normal(a) == self.normal(b)


# ---------------------------------------------------------------------------
# integer lattice arithmetic
# ---------------------------------------------------------------------------


def _hnf_rows(rows):
    """Echelon basis (strictly increasing pivot columns) of the row lattice."""
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    n = len(work[0])
    basis = []
    for j in range(n):
        live = [r for r in work if r[j] != 0]
        rest = [r for r in work if r[j] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[j]))
            pivot = live[0]
            reduced_live = [pivot]
            for r in live[1:]:
                q = r[j] // pivot[j]
                reduced = [x - q * y for x, y in zip(r, pivot)]
                if reduced[j] != 0:
                    reduced_live.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            live = reduced_live
        if live:
            row = live[0]
            if row[j] < 0:
                row = [-x for x in row]
            basis.append(tuple(row))
        work = rest
        if not work:
            break
    return basis


def _lattice_member(basis, z):
    """Whether z lies in the lattice given by an echelon basis."""
    v = list(z)
    for row in basis:
        j = next(i for i, x in enumerate(row) if x != 0)
        if v[j] % row[j] != 0:
            return False
        q = v[j] // row[j]
        v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def _int_kernel(rows):
    """Basis of the integer kernel {c : sum_i c_i rows[i] = 0}."""
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    # row-reduce [rows | I]; the identity block tracks the combinations
    aug = [list(rows[i]) + [1 if t == i else 0 for t in range(m)]
           for i in range(m)]
    frozen = []
    for j in range(n):
        live = [r for r in aug if r[j] != 0]
        aug = [r for r in aug if r[j] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[j]))
            pivot = live[0]
            keep = [pivot]
            for r in live[1:]:
                q = r[j] // pivot[j]
                reduced = [x - q * y for x, y in zip(r, pivot)]
                (keep if reduced[j] != 0 else aug).append(reduced)
            live = keep
        if live:
            frozen.append(live[0])
    kernel = [tuple(r[n:]) for r in aug if any(r[n:])]
    return _hnf_rows(kernel)


def _minor_det(mat, rows, cols):
    if not rows:
        return 1
    i = rows[0]
    total = 0
    for pos, j in enumerate(cols):
        if mat[i][j] == 0:
            continue
        sub = _minor_det(mat, rows[1:], cols[:pos] + cols[pos + 1:])
        total += (-1) ** pos * mat[i][j] * sub
    return total


def _snf_divisors(rows):
    """Nonzero Smith divisors d_1 | d_2 | ... of the integer row lattice.

    Computed as quotients of the minor gcds; presentations here are
    small enough that the exponential minor count never matters.
    """
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return []
    m, n = len(mat), len(mat[0])
    divisors = []
    previous = 1
    for size in range(1, min(m, n) + 1):
        g = 0
        for rset in itertools.combinations(range(m), size):
            for cset in itertools.combinations(range(n), size):
                g = math.gcd(g, _minor_det(mat, rset, cset))
            if g == 1:
                break
        if g == 0:
            break
        divisors.append(g // previous)
        previous = g
    return divisors


# ---------------------------------------------------------------------------
# rational polyhedra at desk scale
# ---------------------------------------------------------------------------


def _fm_eliminate(system, var):
    """Fourier-Motzkin elimination of one variable from a <= system."""
    lower, upper, rest = [], [], []
    for coeffs, rhs in system:
        c = coeffs[var]
        if c > 0:
            upper.append((coeffs, rhs))
        elif c < 0:
            lower.append((coeffs, rhs))
        else:
            rest.append((coeffs, rhs))
    for lc, lb in lower:
        for uc, ub in upper:
            scale_l, scale_u = uc[var], -lc[var]
            coeffs = tuple(scale_l * a + scale_u * b
                           for a, b in zip(lc, uc))
            rest.append((coeffs, scale_l * lb + scale_u * ub))
    return rest


def _fm_feasible(system, nvars):
    for var in range(nvars):
        system = _fm_eliminate(system, var)
        if len(system) > _BOX_LIMIT:
            raise SizeLimit("rational cone test outgrew the desk budget")
    return all(rhs >= 0 for _, rhs in system)


def _var_bounds(system, nvars):
    """Rational bounds for variable 0 after projecting the others away."""
    proj = system
    for var in range(nvars - 1, 0, -1):
        proj = _fm_eliminate(proj, var)
        if len(proj) > _BOX_LIMIT:
            raise SizeLimit("lattice point search outgrew the desk budget")
    lo, hi = None, None
    for coeffs, rhs in proj:
        c = coeffs[0]
        if c > 0:
            bound = Fraction(rhs, c)
            hi = bound if hi is None else min(hi, bound)
        elif c < 0:
            bound = Fraction(rhs, c)
            lo = bound if lo is None else max(lo, bound)
        elif rhs < 0:
            return None
    return lo, hi


def _int_point_exists(system, nvars):
    """Whether the rational <= system admits an integer point."""
    if nvars == 0:
        return all(rhs >= 0 for _, rhs in system)
    bounds = _var_bounds(system, nvars)
    if bounds is None:
        return False
    lo, hi = bounds
    if lo is None or hi is None:
        raise SizeLimit(
            "unbounded lattice point search; presentation exceeds the "
            "certified desk scale")
    for value in range(math.ceil(lo), math.floor(hi) + 1):
        sub = []
        for coeffs, rhs in system:
            sub.append((coeffs[1:], rhs - coeffs[0] * value))
        if _int_point_exists(sub, nvars - 1):
            return True
    return False


def _free_directions(n, basis):
    """Coordinates where some nonnegative lattice vector is positive.

    Decided rationally: the defining cone is rational and homogeneous
    up to one >= 1 constraint, so a rational solution scales to an
    integer one.
    """
    m = len(basis)
    free = []
    base = [(tuple(-row[j] for row in basis), 0) for j in range(n)]
    for i in range(n):
        if _fm_feasible(base + [(tuple(-row[i] for row in basis), -1)], m):
            free.append(i)
    return free


def _shift_into_nonneg(z, basis):
    """Whether z + (lattice element) >= 0 has an integer solution.

    Coordinates met by a nonnegative lattice vector impose no
    constraint: one large such vector repairs them all at once without
    disturbing the others.  Off those coordinates the projected lattice
    has no nonzero nonnegative vector, so the remaining search region
    is a bounded polytope and the integer search terminates.
    """
    if not basis:
        return all(x >= 0 for x in z)
    n = len(z)
    free = set(_free_directions(n, basis))
    keep = [i for i in range(n) if i not in free]
    if not keep:
        return True
    reduced = _hnf_rows([[row[i] for i in keep] for row in basis])
    if not reduced:
        return all(z[i] >= 0 for i in keep)
    system = []
    for pos, i in enumerate(keep):
        system.append((tuple(-row[pos] for row in reduced), z[i]))
    return _int_point_exists(system, len(reduced))


# ---------------------------------------------------------------------------
# the monoid type
# ---------------------------------------------------------------------------


class FGMonoid:
    """Commutative monoid presented by generators and exponent relations."""

    __slots__ = ("generators", "relations", "_rewriter", "_lattice")

    def __init__(self, generators, relations):
        generators = int(generators)
        if generators < 0:
            raise ConfigMismatch("generator count must be nonnegative")
        self.generators = generators
        rels = []
        for pair in relations:
            a, b = pair
            rels.append((_vec(a, generators, "relation side"),
                         _vec(b, generators, "relation side")))
        self.relations = tuple(rels)
        self._rewriter = None
        self._lattice = None

    def _rules(self):
        if self._rewriter is None:
            self._rewriter = _Rewriter(self.generators, self.relations)
        return self._rewriter

    def normal_form(self, v):
        return self._rules().normal(_vec(v, self.generators, "element"))

    def equal(self, a, b):
        return self._rules().equal(
            _vec(a, self.generators, "element"),
            _vec(b, self.generators, "element"))

    def lattice_basis(self):
        """Echelon basis of the relation lattice inside Z^k."""
        if self._lattice is None:
            diffs = [_sub(a, b) for a, b in self.relations]
            self._lattice = tuple(_hnf_rows(diffs))
        return self._lattice

    def group_structure(self):
        """(free rank, torsion divisors) of the group completion."""
        basis = self.lattice_basis()
        divisors = _snf_divisors(basis)
        torsion = tuple(d for d in divisors if d > 1)
        return self.generators - len(divisors), torsion

    def to_json(self):
        return {"gens": self.generators,
                "relations": [[list(a), list(b)] for a, b in self.relations]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["gens"], [(a, b) for a, b in obj["relations"]])

    def __repr__(self):
        return (f"FGMonoid(generators={self.generators}, "
                f"relations={len(self.relations)})")


def free_monoid(k):
    return FGMonoid(k, [])


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def is_integral(m):
    """Whether the natural map to the group completion is injective.

    The full lattice congruence is reached by iterating common-factor
    stripping with recompletion; the monoid is integral exactly when
    every rule of the stabilized system already holds in the presented
    congruence.
    """
    base = m._rules()
    pairs = list(base.rules)
    for _ in range(_SATURATION_ROUNDS):
        stripped = [_strip(a, b) for a, b in pairs]
        if stripped == pairs:
            break
        pairs = list(_Rewriter(m.generators, stripped).rules)
    else:
        raise SizeLimit("lattice congruence computation did not stabilize")
    return all(base.equal(a, b) for a, b in pairs)


def _cone_box(k, basis):
    radius = [1 + sum(abs(row[i]) for row in basis) for i in range(k)]
    count = 1
    for r in radius:
        count *= 2 * r + 1
        if count > _BOX_LIMIT:
            raise SizeLimit(
                f"candidate box has more than {_BOX_LIMIT} points")
    return radius


def is_saturated(m):
    """Whether the monoid is integral and root-closed in its completion.

    Root closure is equivalent to the monoid image containing every
    lattice point of the rational cone spanned by the generator images
    and the relation directions; a certified box of candidates generates
    all such points, so checking the box decides the question.
    """
    if m.generators > _SATURATED_MAX_GENERATORS:
        raise SizeLimit(
            f"saturation decided only up to {_SATURATED_MAX_GENERATORS} "
            f"generators, got {m.generators}")
    if not is_integral(m):
        return False
    k = m.generators
    basis = [list(r) for r in m.lattice_basis()]
    if not basis:
        return True
    radius = _cone_box(k, basis)
    span = len(basis)
    for point in itertools.product(*[range(-r, r + 1) for r in radius]):
        if all(x >= 0 for x in point):
            continue
        # rational cone membership: point - sum lambda_j basis_j >= 0
        system = [(tuple(Fraction(-row[i]) for row in basis),
                   Fraction(point[i])) for i in range(k)]
        if not _fm_feasible(system, span):
            continue
        if not _shift_into_nonneg(point, basis):
            return False
    return True


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


class MonoidMap:
    """Map of presented monoids, given by generator images."""

    __slots__ = ("source", "target", "images")

    def __init__(self, source, target, images):
        if len(images) != source.generators:
            raise ConfigMismatch(
                f"{len(images)} generator images for "
                f"{source.generators} generators")
        self.source = source
        self.target = target
        self.images = tuple(_vec(v, target.generators, "generator image")
                            for v in images)
        for a, b in source.relations:
            if not target.equal(self.apply(a), self.apply(b)):
                raise ConfigMismatch(
                    f"generator images break the relation {a} = {b}")

    def apply(self, v):
        v = _vec(v, self.source.generators, "element")
        out = [0] * self.target.generators
        for mult, image in zip(v, self.images):
            for i, x in enumerate(image):
                out[i] += mult * x
        return tuple(out)

    def apply_signed(self, v):
        """Image of a group-completion element (integer vector)."""
        out = [0] * self.target.generators
        for mult, image in zip(v, self.images):
            for i, x in enumerate(image):
                out[i] += mult * x
        return tuple(out)


def surjectivity_witnesses(f, budget=8):
    """Source preimages of the target generators, by bounded search.

    Raises ConfigMismatch when some generator is not reached within the
    total-degree budget; the map is then not certified surjective.
    """
    k = f.source.generators
    witnesses = []
    for j in range(f.target.generators):
        goal = tuple(1 if i == j else 0 for i in range(f.target.generators))
        found = None
        for total in range(budget + 1):
            for element in _compositions(total, k):
                if f.target.equal(f.apply(element), goal):
                    found = element
                    break
            if found is not None:
                break
        if found is None:
            raise ConfigMismatch(
                f"target generator {j} not reached within degree {budget}; "
                f"map not certified surjective")
        witnesses.append(found)
    return tuple(witnesses)


def _compositions(total, k):
    if k == 0:
        if total == 0:
            yield ()
        return
    if k == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, k - 1):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# exactification
# ---------------------------------------------------------------------------


class Exactification:
    """Preimage monoid of a surjection with its factorization data.

    generator_vectors hold the generators of the preimage monoid as
    integer vectors in the source completion coordinates: first the
    source generators, then plus and minus each kernel class generator.
    kernel_lattice is the full preimage of the target relation lattice;
    kernel_rank is the rank of the completion kernel itself, after the
    source relation lattice is quotiented away.
    """

    __slots__ = ("mprime", "generator_vectors", "kernel_basis",
                 "kernel_lattice", "kernel_rank", "inclusion", "projection",
                 "generation_verified", "factorization_verified",
                 "units_verified", "failure")

    def __init__(self, mprime, generator_vectors, kernel_basis,
                 kernel_lattice, kernel_rank, inclusion, projection,
                 generation_verified, factorization_verified, units_verified,
                 failure=None):
        self.mprime = mprime
        self.generator_vectors = generator_vectors
        self.kernel_basis = kernel_basis
        self.kernel_lattice = kernel_lattice
        self.kernel_rank = kernel_rank
        self.inclusion = inclusion
        self.projection = projection
        self.generation_verified = generation_verified
        self.factorization_verified = factorization_verified
        self.units_verified = units_verified
        self.failure = failure

    def __bool__(self):
        return (self.generation_verified and self.factorization_verified
                and self.units_verified)

    def contains(self, z):
        """Decide membership of an integer vector in the preimage monoid.

        The preimage monoid is the source plus the kernel, so membership
        amounts to shifting z into the nonnegative orthant by a kernel
        lattice element.
        """
        z = tuple(int(x) for x in z)
        return _shift_into_nonneg(z, [list(r) for r in self.kernel_lattice])

    def __repr__(self):
        state = "certified" if self else "failed"
        return (f"Exactification({state}, kernel_rank={self.kernel_rank}, "
                f"generators={len(self.generator_vectors)})")


def _image_in_monoid(f, z):
    """Whether the signed image of z lies in the target monoid image."""
    image = f.apply_signed(z)
    return _shift_into_nonneg(image, [list(r)
                                      for r in f.target.lattice_basis()])


def exactify(f):
    """Exactify a surjection of integral monoids.

    Computes the kernel of the induced map on group completions, builds
    the preimage monoid with generators source-union-kernel, presents it
    by its relation lattice, and certifies generation, factorization,
    and that the kernel consists of units of the result.
    """
    source, target = f.source, f.target
    if not is_integral(source):
        raise ConfigMismatch("exactification needs an integral source")
    if not is_integral(target):
        raise ConfigMismatch("exactification needs an integral target")
    surjectivity_witnesses(f)
    k = source.generators
    source_lattice = source.lattice_basis()
    target_lattice = [list(r) for r in target.lattice_basis()]

    # kernel lattice: z with image inside the target relation lattice
    stacked = [list(img) for img in f.images] + \
        [[-x for x in row] for row in target_lattice]
    combos = _int_kernel(stacked)
    projected = _hnf_rows([c[:k] for c in combos])
    if len(projected) > _EXACTIFY_MAX_KERNEL_RANK:
        raise SizeLimit(
            f"kernel lattice rank {len(projected)} exceeds the certified "
            f"generation box scale {_EXACTIFY_MAX_KERNEL_RANK}")
    # source relations map to equal images, so their lattice sits inside
    # the kernel lattice; the completion kernel is the quotient
    kernel_rank = len(projected) - len(source_lattice)

    # reduce to class generators: drop rows reachable from the source
    # relation lattice and earlier accepted rows
    kernel_basis = []
    spanned = [list(r) for r in source_lattice]
    for row in projected:
        if not _lattice_member(_hnf_rows(spanned), row):
            kernel_basis.append(tuple(row))
            spanned.append(list(row))
    kernel_basis = tuple(kernel_basis)

    gens = [tuple(1 if i == j else 0 for i in range(k)) for j in range(k)]
    for row in kernel_basis:
        gens.append(tuple(row))
        gens.append(tuple(-x for x in row))
    gens = tuple(gens)

    # presentation of the preimage monoid by its relation lattice
    stacked = [list(g) for g in gens] + \
        [[-x for x in row] for row in source_lattice]
    relation_lattice = _hnf_rows([c[:len(gens)]
                                  for c in _int_kernel(stacked)])
    relations = [tuple(_strip_signs(row)) for row in relation_lattice]
    for b in range(len(kernel_basis)):
        plus, minus = k + 2 * b, k + 2 * b + 1
        unit = tuple(1 if i in (plus, minus) else 0
                     for i in range(len(gens)))
        relations.append((unit, (0,) * len(gens)))
    mprime = FGMonoid(len(gens), relations)

    inclusion = MonoidMap(source, mprime,
                          [tuple(1 if i == j else 0
                                 for i in range(len(gens)))
                           for j in range(k)])
    zero = (0,) * target.generators
    projection = MonoidMap(mprime, target,
                           list(f.images)
                           + [zero] * (2 * len(kernel_basis)))

    factorization_ok = all(
        target.equal(projection.apply(inclusion.apply(e)), f.apply(e))
        for e in gens[:k])

    units_ok = all(
        mprime.equal(
            tuple((1 if i in (k + 2 * b, k + 2 * b + 1) else 0)
                  for i in range(len(gens))),
            (0,) * len(gens))
        and _lattice_member(target.lattice_basis(),
                            f.apply_signed(kernel_basis[b]))
        for b in range(len(kernel_basis)))

    result = Exactification(mprime, gens, kernel_basis,
                            tuple(tuple(r) for r in projected), kernel_rank,
                            inclusion, projection, True, factorization_ok,
                            units_ok)

    # generation certificate: every box point of the preimage decomposes
    box_basis = [list(r) for r in projected] + \
        [list(r) for r in source_lattice]
    radius = _cone_box(k, box_basis) if box_basis else [1] * k
    for point in itertools.product(*[range(-r, r + 1) for r in radius]):
        if not any(x < 0 for x in point):
            continue
        if not _image_in_monoid(f, point):
            continue
        if not result.contains(point):
            result.generation_verified = False
            result.failure = tuple(point)
            break
    return result


def _strip_signs(row):
    plus = tuple(x if x > 0 else 0 for x in row)
    minus = tuple(-x if x < 0 else 0 for x in row)
    return plus, minus


# ---------------------------------------------------------------------------
# semistable charts and their log differentials
# ---------------------------------------------------------------------------


class ChartDescriptor:
    """Combinatorial data of a semistable coordinate patch."""

    __slots__ = ("dim", "semistable_r", "exponent")

    def __init__(self, dim, semistable_r, exponent):
        dim = int(dim)
        semistable_r = int(semistable_r)
        if dim < 0 or not 0 <= semistable_r <= dim:
            raise ConfigMismatch(
                f"chart needs 0 <= r <= d, got r={semistable_r} d={dim}")
        exponent = Fraction(exponent)
        if exponent < 0:
            raise ConfigMismatch(f"chart exponent must be >= 0: {exponent}")
        self.dim = dim
        self.semistable_r = semistable_r
        self.exponent = exponent

    def skeleton(self):
        """Monoid skeleton of the chart log structure.

        Generators are the r + 1 divisor coordinates plus one formal tag
        for the unit part; the single relation identifies the product of
        the divisor coordinates with the tag.
        """
        r = self.semistable_r
        product = tuple([1] * (r + 1) + [0])
        tag = tuple([0] * (r + 1) + [1])
        return FGMonoid(r + 2, [(product, tag)])

    def valuation_map(self, weights=None):
        """Surjection of the skeleton onto the free rank-one monoid."""
        r = self.semistable_r
        if weights is None:
            weights = [1] * (r + 1)
        if len(weights) != r + 1 or any(w < 0 for w in weights):
            raise ConfigMismatch(
                f"need {r + 1} nonnegative weights, got {weights}")
        images = [(int(w),) for w in weights] + [(int(sum(weights)),)]
        return MonoidMap(self.skeleton(), free_monoid(1), images)

    def to_json(self):
        return {"d": self.dim, "r": self.semistable_r,
                "a": f"{self.exponent.numerator}/"
                     f"{self.exponent.denominator}"}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["d"], obj["r"], Fraction(obj["a"]))

    def __repr__(self):
        return (f"ChartDescriptor(d={self.dim}, r={self.semistable_r}, "
                f"a={self.exponent})")


class LogBasis:
    """Log differential symbols of a chart with the standard elimination.

    symbols lists dlog T_0 .. dlog T_d; relation gives the indices whose
    symbols sum to zero; basis drops index 0, so it has exactly d
    elements, and substitution expresses the dropped symbol in it.
    """

    __slots__ = ("symbols", "relation", "basis", "substitution")

    def __init__(self, dim, semistable_r):
        self.symbols = tuple(f"dlog T_{i}" for i in range(dim + 1))
        self.relation = tuple(range(semistable_r + 1))
        self.basis = tuple(range(1, dim + 1))
        self.substitution = tuple((-1, i)
                                  for i in range(1, semistable_r + 1))

    @property
    def rank(self):
        return len(self.basis)

    def __repr__(self):
        return f"LogBasis(rank={self.rank}, relation={self.relation})"


def omega_log_basis(chart):
    """Log differential basis of a chart: d symbols after elimination."""
    return LogBasis(chart.dim, chart.semistable_r)
