"""Linear algebra over the truncated model ring and Koszul cohomology.

CappedMatrix holds TruncatedSeries entries over B_n = F[[t]]/t^n and is the
carrier for operators, differentials, and gauge transformations.  Cohomology
of a complex of free B_n-modules is computed through the F-linear structure:
B_n^m is an F-space of dimension m*n filtered by multiplication by t,
kernels and images of the differentials are F-subspaces, and the module
invariants of H = ker/im follow from the dimensions h_i = dim t^i H, because
a summand B_n/t^k contributes to t^i H exactly when k > i.  This sidesteps
matrix normal forms over B_n, which is not a domain.

Eliminations certify their output: pivots must be provably nonzero, and
whatever is left over must be indistinguishable from zero within its stored
window.  The smallest window met along the way is reported alongside the
answer; a window that has shrunk to nothing raises PrecisionExhausted
instead of guessing.  Pivot preference is lowest t-degree first, then lowest
valuation, then lowest column, which keeps runs reproducible.

dvr_smith provides elementary divisors over the valuation ring of F itself
(pi-adic instead of t-adic); the annihilation checks downstream need both.
"""

import itertools

from .errors import (CommutationFailure, ConfigMismatch, PrecisionExhausted)
from .padic import INFINITY
from .series import TruncatedSeries


class CappedMatrix:
    """Matrix with TruncatedSeries entries over a fixed model ring."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring, entries, cols=None):
        entries = [[self._coerce(ring, x) for x in row] for row in entries]
        rows = len(entries)
        if rows:
            cols = len(entries[0])
            if any(len(row) != cols for row in entries):
                raise ConfigMismatch("ragged matrix rows")
        elif cols is None:
            cols = 0
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @staticmethod
    def _coerce(ring, x):
        if isinstance(x, TruncatedSeries):
            if x.ring != ring:
                raise ConfigMismatch("entry from a different model ring")
            return x
        return ring.constant(x)

    @classmethod
    def zero(cls, ring, rows, cols):
        z = ring.zero()
        return cls(ring, [[z] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, ring, m):
        one, z = ring.one(), ring.zero()
        return cls(ring, [[one if i == j else z for j in range(m)]
                          for i in range(m)])

    def entry(self, i, j):
        return self.entries[i][j]

    def _shape_check(self, other):
        if other.ring != self.ring:
            raise ConfigMismatch("matrices over different model rings")
        if other.rows != self.rows or other.cols != self.cols:
            raise ConfigMismatch("matrix shape mismatch")

    def __add__(self, other):
        self._shape_check(other)
        return CappedMatrix(self.ring, [
            [a + b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.entries, other.entries)], cols=self.cols)

    def __neg__(self):
        return CappedMatrix(self.ring,
                            [[-a for a in row] for row in self.entries],
                            cols=self.cols)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if other.ring != self.ring:
            raise ConfigMismatch("matrices over different model rings")
        if other.rows != self.cols:
            raise ConfigMismatch("inner dimensions do not match")
        z = self.ring.zero()
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.is_exact_zero:
                        continue
                    b = other.entries[k][j]
                    if b.is_exact_zero:
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return CappedMatrix(self.ring, out, cols=other.cols)

    def scale(self, factor):
        factor = self._coerce(self.ring, factor)
        return CappedMatrix(self.ring,
                            [[a * factor for a in row]
                             for row in self.entries], cols=self.cols)

    def transpose(self):
        return CappedMatrix(self.ring,
                            [[self.entries[i][j] for i in range(self.rows)]
                             for j in range(self.cols)], cols=self.rows)

    def apply(self, vector):
        if len(vector) != self.cols:
            raise ConfigMismatch("vector length does not match")
        z = self.ring.zero()
        out = []
        for row in self.entries:
            acc = z
            for a, x in zip(row, vector):
                if not (a.is_exact_zero or x.is_exact_zero):
                    acc = acc + a * x
            out.append(acc)
        return out

    @property
    def is_zerolike(self):
        return all(x.is_zerolike for row in self.entries for x in row)

    def valuation_floor(self):
        floors = [x.valuation_floor() for row in self.entries for x in row]
        return min(floors) if floors else INFINITY

    def inverse(self):
        """Inverse over B_n: invert the constant term, then a Neumann tail.

        A matrix over B_n is invertible exactly when its constant-term
        matrix over F is; the t-adically small remainder is handled by the
        finite geometric series.
        """
        if self.rows != self.cols:
            raise ConfigMismatch("only square matrices invert")
        n = self.ring.t_order
        const = [[x.coeffs[0] for x in row] for row in self.entries]
        cinv = _f_inverse(self.ring.field, const)
        c0 = CappedMatrix(self.ring,
                          [[self.ring.constant(x) for x in row]
                           for row in cinv], cols=self.cols)
        ident = CappedMatrix.identity(self.ring, self.rows)
        nil = ident - c0 * self
        out = ident
        power = ident
        for _ in range(1, n):
            power = power * nil
            out = out + power
        return out * c0

    def to_json(self):
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[x.to_json() for x in row]
                            for row in self.entries]}

    @classmethod
    def from_json(cls, ring, obj):
        entries = [[ring.series_from_json(x) for x in row]
                   for row in obj["entries"]]
        return cls(ring, entries, cols=obj["cols"])

    def __repr__(self):
        return f"CappedMatrix({self.rows}x{self.cols}, {self.ring!r})"


def commutation_defect(a, b):
    return a * b - b * a


# ---------------------------------------------------------------------------
# certified elimination over the coefficient field
# ---------------------------------------------------------------------------


def _window_guard(x, context):
    w = x.abs_window
    if w <= 0:
        raise PrecisionExhausted(
            f"{context}: an entry is known to no precision at all")
    return w


def _f_eliminate(field, rows, t_degree=None, pivot_cols=None):
    """Gauss-Jordan over F with certified pivots; mutates `rows`.

    Returns (pivots, floor): pivots is a list of (row, col) in the order
    they were used, floor the smallest precision window among the entries
    that had to be discarded as indistinguishable from zero.  Pivot
    preference: lowest t-degree of the row coordinate, then lowest
    valuation, then lowest column and row index.  pivot_cols caps the
    columns eligible as pivots (row operations still touch every column).
    """
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    if pivot_cols is None:
        pivot_cols = ncols
    if t_degree is None:
        t_degree = lambda r: 0
    pivots = []
    row_used = set()
    col_used = set()
    while True:
        best = None
        for r in range(nrows):
            if r in row_used:
                continue
            for c in range(pivot_cols):
                if c in col_used:
                    continue
                x = rows[r][c]
                if x.is_zerolike:
                    continue
                key = (t_degree(r), x.valuation_lower(), c, r)
                if best is None or key < best[0]:
                    best = (key, r, c)
        if best is None:
            break
        _, pr, pc = best
        pivots.append((pr, pc))
        row_used.add(pr)
        col_used.add(pc)
        prow = rows[pr]
        pivot = prow[pc]
        for r in range(nrows):
            if r == pr:
                continue
            x = rows[r][pc]
            if x.is_exact_zero:
                continue
            factor = x / pivot
            rr = rows[r]
            for c2 in range(ncols):
                a = prow[c2]
                if not a.is_exact_zero:
                    rr[c2] = rr[c2] - factor * a
    floor = INFINITY
    for r in range(nrows):
        if r in row_used:
            continue
        for c in range(pivot_cols):
            if c in col_used:
                continue
            x = rows[r][c]
            if not x.is_exact_zero:
                floor = min(floor, _window_guard(x, "elimination"))
    return pivots, floor


def _f_rank(field, rows, t_degree=None):
    work = [list(r) for r in rows]
    pivots, floor = _f_eliminate(field, work, t_degree)
    return len(pivots), floor


def _f_kernel(field, rows, ncols, t_degree=None):
    """Basis of the right kernel; vectors are lists of scalars."""
    work = [list(r) for r in rows]
    pivots, floor = _f_eliminate(field, work, t_degree)
    pivot_cols = {pc for _, pc in pivots}
    basis = []
    zero, one = field.zero(), field.one()
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = [zero] * ncols
        vec[f] = one
        for pr, pc in pivots:
            num = work[pr][f]
            if not num.is_exact_zero:
                vec[pc] = -(num / work[pr][pc])
        basis.append(vec)
    return basis, floor


def _f_inverse(field, rows):
    """Inverse of a square scalar matrix by augmented elimination."""
    m = len(rows)
    zero, one = field.zero(), field.one()
    work = [list(r) + [one if i == j else zero for j in range(m)]
            for i, r in enumerate(rows)]
    pivots, _ = _f_eliminate(field, work, pivot_cols=m)
    if len(pivots) < m:
        for r in range(m):
            for c in range(m):
                x = work[r][c]
                if not x.is_exact_zero and x.is_zerolike:
                    raise PrecisionExhausted(
                        "matrix is not provably invertible at this precision")
        raise ConfigMismatch("matrix is not invertible")
    out = [[zero] * m for _ in range(m)]
    for pr, pc in pivots:
        pivot = work[pr][pc]
        for j in range(m):
            out[pc][j] = work[pr][m + j] / pivot
    return out


# ---------------------------------------------------------------------------
# flattening B_n-linear maps to F-linear maps
# ---------------------------------------------------------------------------
# Coordinates of B_n^m over F are pairs (module index, t-degree), laid out
# as index * n + degree, so multiplication by t is an index shift.


def _flatten(matrix):
    n = matrix.ring.t_order
    field = matrix.ring.field
    zero = field.zero()
    out = [[zero] * (matrix.cols * n) for _ in range(matrix.rows * n)]
    for i, row in enumerate(matrix.entries):
        for j, series in enumerate(row):
            for k, ck in enumerate(series.coeffs):
                if ck.is_exact_zero:
                    continue
                for l in range(n - k):
                    out[i * n + k + l][j * n + l] = ck
    return out


def _t_shift(vector, i, n):
    zero = vector[0].F.zero()
    out = [zero] * len(vector)
    for base in range(0, len(vector), n):
        for j in range(n - i):
            out[base + j + i] = vector[base + j]
    return out


def _structure_from_dims(h, n):
    """Module invariants from the dimensions h_i = dim_F t^i H.

    A summand B_n/t^k has dim_F t^i(B_n/t^k) = max(k - i, 0), so the count
    of summands with k >= i+1 is h_i - h_{i+1}.
    """
    h = list(h) + [0]
    counts = [h[i] - h[i + 1] for i in range(n)]
    if any(c < 0 for c in counts) or any(
            counts[i] < counts[i + 1] for i in range(n - 1)):
        raise AssertionError(
            "dimension sequence is not realizable by a module")
    free = counts[n - 1]
    torsion = []
    for k in range(1, n):
        torsion.extend([k] * (counts[k - 1] - counts[k]))
    return free, tuple(torsion)


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------


class ComplexData:
    """A bounded complex of free B_n-modules with explicit differentials."""

    __slots__ = ("ring", "ranks", "diffs")

    def __init__(self, ring, ranks, diffs):
        if len(diffs) != len(ranks) - 1:
            raise ConfigMismatch("need one differential between "
                                 "consecutive degrees")
        for q, d in enumerate(diffs):
            if d.ring != ring:
                raise ConfigMismatch("differential over the wrong ring")
            if d.cols != ranks[q] or d.rows != ranks[q + 1]:
                raise ConfigMismatch(f"differential {q} has the wrong shape")
        for q in range(len(diffs) - 1):
            square = diffs[q + 1] * diffs[q]
            if not square.is_zerolike:
                raise CommutationFailure(
                    f"differentials {q} and {q + 1} do not compose to zero; "
                    f"residual valuation floor {square.valuation_floor()}")
        self.ring = ring
        self.ranks = list(ranks)
        self.diffs = list(diffs)

    @property
    def length(self):
        return len(self.ranks) - 1

    def euler_rank(self):
        return sum((-1) ** q * r for q, r in enumerate(self.ranks))


def koszul_build(operators):
    """Koszul complex of commuting endomorphisms of a free B_n-module.

    Degree q is the module tensored with the q-th exterior power of the span
    of the operators; the differential inserts each operator with the usual
    alternating sign.  Non-commuting inputs are rejected up front since the
    squared differential would not vanish.
    """
    if not operators:
        raise ConfigMismatch("need at least one operator")
    ring = operators[0].ring
    r = operators[0].rows
    for op in operators:
        if op.ring != ring:
            raise ConfigMismatch("operators over different model rings")
        if op.rows != r or op.cols != r:
            raise ConfigMismatch("operators must be square and same-sized")
    k = len(operators)
    for i in range(k):
        for j in range(i + 1, k):
            defect = commutation_defect(operators[i], operators[j])
            if not defect.is_zerolike:
                raise CommutationFailure(
                    f"operators {i} and {j} do not commute; residual "
                    f"valuation floor {defect.valuation_floor()}")
    subsets = [list(itertools.combinations(range(k), q))
               for q in range(k + 1)]
    ranks = [r * len(s) for s in subsets]
    diffs = []
    z = ring.zero()
    for q in range(k):
        index_of = {S: si for si, S in enumerate(subsets[q + 1])}
        entries = [[z] * ranks[q] for _ in range(ranks[q + 1])]
        for si, S in enumerate(subsets[q]):
            for i in range(k):
                if i in S:
                    continue
                T = tuple(sorted(S + (i,)))
                ti = index_of[T]
                sign = -1 if sum(1 for j in S if j < i) % 2 else 1
                op = operators[i]
                for a in range(r):
                    row = entries[ti * r + a]
                    for b in range(r):
                        x = op.entries[a][b]
                        if x.is_exact_zero:
                            continue
                        row[si * r + b] = row[si * r + b] + (
                            x if sign == 1 else -x)
        diffs.append(CappedMatrix(ring, entries, cols=ranks[q]))
    return ComplexData(ring, ranks, diffs)


class CohomologyReport:
    """Per-degree module invariants of a computed cohomology."""

    __slots__ = ("t_order", "degrees", "precision")

    def __init__(self, t_order, degrees, precision):
        self.t_order = t_order
        self.degrees = [(int(f), tuple(sorted(tors)))
                        for f, tors in degrees]
        self.precision = precision

    def free_ranks(self):
        return [f for f, _ in self.degrees]

    def torsion(self):
        return [list(t) for _, t in self.degrees]

    def f_dimension(self, q):
        free, tors = self.degrees[q]
        return free * self.t_order + sum(tors)

    def to_json(self):
        prec = "inf" if self.precision == INFINITY else int(self.precision)
        return {"t_order": self.t_order,
                "degrees": [{"free": f, "torsion": list(t)}
                            for f, t in self.degrees],
                "precision": prec}

    @classmethod
    def from_json(cls, obj):
        prec = obj.get("precision", "inf")
        prec = INFINITY if prec == "inf" else int(prec)
        return cls(obj["t_order"],
                   [(d["free"], tuple(d["torsion"]))
                    for d in obj["degrees"]], prec)

    def __repr__(self):
        body = ", ".join(f"H^{q}=(free {f}, torsion {list(t)})"
                         for q, (f, t) in enumerate(self.degrees))
        return f"CohomologyReport({body})"


def cohomology_compute(complex_data):
    """Module invariants of every cohomology of a complex of free modules.

    Works through the flattened F-linear picture: per degree, a kernel
    basis, then the filtration dimensions dim t^i(ker + im)/im for
    i = 0..n-1, which pin down the free rank and torsion divisors.  The
    alternating sum of F-dimensions must match n times the alternating rank
    sum of the complex; that identity is asserted before reporting.
    """
    ring = complex_data.ring
    n = ring.t_order
    field = ring.field
    t_degree = lambda r: r % n
    degrees = []
    precision = INFINITY
    for q in range(complex_data.length + 1):
        try:
            ncols = complex_data.ranks[q] * n
            if q < complex_data.length:
                flat = _flatten(complex_data.diffs[q])
                kernel, fl = _f_kernel(field, flat, ncols, t_degree)
                precision = min(precision, fl)
            else:
                kernel = _identity_vectors(field, ncols)
            if q > 0:
                image = _columns(field, _flatten(complex_data.diffs[q - 1]))
                rank_im, fl = _f_rank(field, image)
                precision = min(precision, fl)
            else:
                image, rank_im = [], 0
            dims = []
            for i in range(n):
                shifted = [_t_shift(v, i, n) for v in kernel]
                rank_all, fl = _f_rank(field, shifted + image)
                precision = min(precision, fl)
                dims.append(rank_all - rank_im)
            degrees.append(_structure_from_dims(dims, n))
        except PrecisionExhausted as exc:
            raise PrecisionExhausted(f"cohomology degree {q}: {exc}")
    total = sum((-1) ** q * (f * n + sum(tors))
                for q, (f, tors) in enumerate(degrees))
    if total != n * complex_data.euler_rank():
        raise AssertionError("Euler characteristic mismatch against "
                             "the module ranks")
    return CohomologyReport(n, degrees, precision)


def _identity_vectors(field, m):
    zero, one = field.zero(), field.one()
    return [[one if i == j else zero for j in range(m)] for i in range(m)]


def _columns(field, rows):
    if not rows:
        return []
    return [[rows[r][c] for r in range(len(rows))]
            for c in range(len(rows[0]))]


class ComparisonVerdict:
    """Outcome of comparing two cohomology reports degree by degree."""

    __slots__ = ("equal", "per_degree", "precision")

    def __init__(self, equal, per_degree, precision):
        self.equal = equal
        self.per_degree = tuple(per_degree)
        self.precision = precision

    def __bool__(self):
        return self.equal

    def to_json(self):
        prec = "inf" if self.precision == INFINITY else int(self.precision)
        return {"equal": self.equal, "per_degree": list(self.per_degree),
                "precision": prec}

    def __repr__(self):
        return (f"ComparisonVerdict(equal={self.equal}, "
                f"per_degree={list(self.per_degree)})")


def complex_compare(a, b):
    """Compare free ranks and torsion multisets of two reports.

    Missing trailing degrees count as zero modules.  The verdict carries the
    weaker of the two precision floors; the reports themselves remain the
    record of what each side guaranteed.
    """
    if a.t_order != b.t_order:
        raise ConfigMismatch("reports over different t-orders")
    length = max(len(a.degrees), len(b.degrees))
    pad = (0, ())
    per_degree = []
    for q in range(length):
        da = a.degrees[q] if q < len(a.degrees) else pad
        db = b.degrees[q] if q < len(b.degrees) else pad
        per_degree.append(da[0] == db[0]
                          and sorted(da[1]) == sorted(db[1]))
    precision = min(a.precision, b.precision)
    return ComparisonVerdict(all(per_degree), per_degree, precision)


# ---------------------------------------------------------------------------
# elementary divisors over the valuation ring of F
# ---------------------------------------------------------------------------


def dvr_smith(field, rows):
    """Elementary divisors (pi-adic valuations) of a scalar matrix.

    The valuation ring of F is a discrete valuation ring with uniformizer
    pi, so a minimum-valuation entry divides everything left and the usual
    one-pivot-at-a-time reduction applies.  Returns (divisors, floor):
    divisors is the nondecreasing list of pivot valuations in pi-units,
    floor the smallest precision window among the discarded remainder.
    """
    work = [list(r) for r in rows]
    nrows = len(work)
    ncols = len(work[0]) if nrows else 0
    row_used = set()
    col_used = set()
    divisors = []
    while True:
        best = None
        for r in range(nrows):
            if r in row_used:
                continue
            for c in range(ncols):
                if c in col_used:
                    continue
                x = work[r][c]
                if x.is_zerolike:
                    continue
                key = (x.valuation_lower(), c, r)
                if best is None or key < best[0]:
                    best = (key, r, c)
        if best is None:
            break
        _, pr, pc = best
        pivot = work[pr][pc]
        val = pivot.valuation() * field.e
        if val.denominator != 1:
            raise AssertionError("pivot valuation is not in pi-units")
        divisors.append(int(val))
        row_used.add(pr)
        col_used.add(pc)
        for r in range(nrows):
            if r == pr or work[r][pc].is_exact_zero:
                continue
            factor = work[r][pc] / pivot
            for c in range(ncols):
                if not work[pr][c].is_exact_zero:
                    work[r][c] = work[r][c] - factor * work[pr][c]
    floor = INFINITY
    for r in range(nrows):
        if r in row_used:
            continue
        for c in range(ncols):
            if c in col_used:
                continue
            x = work[r][c]
            if not x.is_exact_zero:
                floor = min(floor, _window_guard(x, "dvr reduction"))
    if any(a > b for a, b in zip(divisors, divisors[1:])):
        raise AssertionError("pivot valuations came out decreasing")
    return divisors, floor
