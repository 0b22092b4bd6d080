"""Truncated period-ring model and the divided-power algebra on a chart.

ModelRing fixes the working model of F[[t]]/t^n together with its
distinguished elements: u is the constant zeta_p - 1, the series xi satisfies
t = u * pi^shift * xi exactly, rho = pi^(1+shift) is the mod-t reduction of
t/xi, and gamma_const = u * t/xi = pi^(2+shift) is the translation constant
of the group action on the chart coordinates.  The integer shift encodes the
extra ramification carried by the field's different_valuation.

PDElement is a divided-power polynomial sum_J c_J(t) W^[J] in d chart
coordinates with TruncatedSeries coefficients, truncated at a total-degree
cap.  Every element carries a reliability degree: coefficients at total
degree <= reliable equal those of the object being represented, higher ones
are unspecified.  Operations propagate the tag; whenever a product would
create degrees above the cap the dropped information is charged to the tag
instead of being silently ignored.  Assertions downstream are made only on
reliable degrees.

PDForm wraps alternating forms on the basis symbols dlog T_i / xi with
PDElement coefficients and a bookkeeping twist index.  The differential is
sum_i (-u d/dW_i) e_i; because d/dW_i acts on divided powers without
denominators, integration in a single variable is division-free, which gives
the explicit contracting homotopy used by poincare_solve.
"""

import math
from fractions import Fraction

from .errors import ConfigMismatch, TruncationOverflow
from .padic import INFINITY, PAdicScalar

_EXACT = INFINITY


class TwistIndex:
    """Additive bookkeeping index for tensor twists of the line ker(theta)."""

    __slots__ = ("k",)

    def __init__(self, k):
        self.k = int(k)

    def __add__(self, other):
        return TwistIndex(self.k + other.k)

    def __sub__(self, other):
        return TwistIndex(self.k - other.k)

    def __neg__(self):
        return TwistIndex(-self.k)

    def __eq__(self, other):
        return isinstance(other, TwistIndex) and other.k == self.k

    def __hash__(self):
        return hash(("TwistIndex", self.k))

    def __repr__(self):
        return f"TwistIndex({self.k})"


FORM_BASIS_TWIST = TwistIndex(-1)


class ModelRing:
    """The ring F[[t]]/t^n with the model normalization t = u * pi^shift * xi."""

    __slots__ = ("field", "t_order", "shift", "u_const", "rho", "gamma_const",
                 "u", "t", "xi")

    def __init__(self, field, t_order):
        if t_order < 1:
            raise ConfigMismatch("t_order must be >= 1")
        sh = field.different_valuation * field.e
        if sh.denominator != 1 or sh < 0:
            raise ConfigMismatch(
                "different_valuation must be a nonnegative multiple of "
                "1/(p-1)")
        self.field = field
        self.t_order = t_order
        self.shift = int(sh)
        self.u_const = field.pi_power(1)
        self.rho = field.pi_power(1 + self.shift)
        self.gamma_const = field.pi_power(2 + self.shift)
        self.u = self.constant(self.u_const)
        self.t = self.monomial(1, field.one()) if t_order > 1 else self.zero()
        self.xi = (self.monomial(1, field.pi_power(-1 - self.shift))
                   if t_order > 1 else self.zero())

    def series(self, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) > self.t_order:
            raise ConfigMismatch("too many coefficients for this t_order")
        coeffs += [self.field.zero()] * (self.t_order - len(coeffs))
        return TruncatedSeries(self, tuple(coeffs))

    def constant(self, scalar):
        if not isinstance(scalar, PAdicScalar):
            scalar = self.field.scalar(scalar)
        return self.series([scalar])

    def monomial(self, k, scalar):
        if not 0 <= k < self.t_order:
            raise ConfigMismatch("monomial degree outside the truncation")
        coeffs = [self.field.zero()] * self.t_order
        coeffs[k] = scalar
        return TruncatedSeries(self, tuple(coeffs))

    def zero(self):
        return self.series([])

    def one(self):
        return self.constant(self.field.one())

    def series_from_json(self, obj):
        return self.series([self.field.scalar_from_json(c) for c in obj])

    def __eq__(self, other):
        return (isinstance(other, ModelRing) and other.field == self.field
                and other.t_order == self.t_order)

    def __hash__(self):
        return hash((self.field, self.t_order))

    def __repr__(self):
        return (f"ModelRing(p={self.field.p}, t_order={self.t_order}, "
                f"shift={self.shift})")


def _same_ring(a, b):
    if a.ring is not b.ring and a.ring != b.ring:
        raise ConfigMismatch("operands from different model rings")


class TruncatedSeries:
    """Element of F[[t]]/t^n with capped-precision coefficients."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = coeffs

    @property
    def is_exact_zero(self):
        return all(c.is_exact_zero for c in self.coeffs)

    @property
    def is_zerolike(self):
        return all(c.is_zerolike for c in self.coeffs)

    @property
    def is_provable_unit(self):
        # the coefficients live in a field, so any provably nonzero
        # constant term makes the series invertible
        return not self.coeffs[0].is_zerolike

    def order_floor(self):
        """Smallest t-degree whose coefficient is not exactly zero."""
        for j, c in enumerate(self.coeffs):
            if not c.is_exact_zero:
                return j
        return INFINITY

    def valuation_floor(self):
        """Certified lower bound on the valuations of all coefficients."""
        floors = [c.valuation_lower() for c in self.coeffs]
        return min(floors) if floors else INFINITY

    def __add__(self, other):
        _same_ring(self, other)
        return TruncatedSeries(self.ring, tuple(
            a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return TruncatedSeries(self.ring, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        _same_ring(self, other)
        n = self.ring.t_order
        zero = self.ring.field.zero()
        out = [zero] * n
        for i, a in enumerate(self.coeffs):
            if a.is_exact_zero:
                continue
            for j in range(n - i):
                b = other.coeffs[j]
                if b.is_exact_zero:
                    continue
                out[i + j] = out[i + j] + a * b
        return TruncatedSeries(self.ring, tuple(out))

    def scale(self, scalar):
        if not isinstance(scalar, PAdicScalar):
            scalar = self.ring.field.scalar(scalar)
        return TruncatedSeries(self.ring, tuple(
            c * scalar for c in self.coeffs))

    def shift_t(self, k):
        """Multiply by t^k, truncating at the t-order."""
        n = self.ring.t_order
        zero = self.ring.field.zero()
        out = [zero] * n
        for j in range(n - k):
            out[j + k] = self.coeffs[j]
        return TruncatedSeries(self.ring, tuple(out))

    def inv(self):
        """Inverse, defined exactly when the constant term is a unit."""
        c = self.coeffs
        b0 = c[0].inv()
        out = [b0]
        for k in range(1, self.ring.t_order):
            acc = self.ring.field.zero()
            for j in range(1, k + 1):
                acc = acc + c[j] * out[k - j]
            out.append(-(b0 * acc))
        return TruncatedSeries(self.ring, tuple(out))

    def power(self, n):
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        _same_ring(self, other)
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def to_json(self):
        return [c.to_json() for c in self.coeffs]

    def __repr__(self):
        return f"TruncatedSeries({list(self.coeffs)!r})"


# ---------------------------------------------------------------------------
# divided-power elements
# ---------------------------------------------------------------------------


def _zero_index(d):
    return (0,) * d


class PDElement:
    """Divided-power polynomial sum_J c_J(t) W^[J] with a reliability tag."""

    __slots__ = ("ring", "dim", "cap", "terms", "reliable")

    def __init__(self, ring, dim, cap, terms, reliable=_EXACT):
        if dim < 1 or cap < 1:
            raise ConfigMismatch("dim and cap must be >= 1")
        clean = {}
        for J, c in terms.items():
            if len(J) != dim or any(j < 0 for j in J):
                raise ConfigMismatch(f"bad multi-index {J}")
            if sum(J) > cap:
                raise ConfigMismatch(f"index {J} exceeds the degree cap")
            if not c.is_exact_zero:
                clean[J] = c
        self.ring = ring
        self.dim = dim
        self.cap = cap
        self.terms = clean
        self.reliable = reliable

    def _compat(self, other):
        _same_ring(self, other)
        if other.dim != self.dim or other.cap != self.cap:
            raise ConfigMismatch("mismatched pd dimension or degree cap")

    def coefficient(self, J):
        return self.terms.get(tuple(J), self.ring.zero())

    def effective_order(self):
        """Certified lower bound for the total degree of the true object."""
        floor = self.reliable + 1 if self.reliable != _EXACT else INFINITY
        degrees = [sum(J) for J in self.terms]
        return min(degrees + [floor]) if degrees else floor

    @property
    def stored_degree(self):
        return max((sum(J) for J in self.terms), default=0)

    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        for J, c in other.terms.items():
            out[J] = out[J] + c if J in out else c
        return PDElement(self.ring, self.dim, self.cap, out,
                         min(self.reliable, other.reliable))

    def __neg__(self):
        return PDElement(self.ring, self.dim, self.cap,
                         {J: -c for J, c in self.terms.items()},
                         self.reliable)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return pd_multiply(self, other)

    def scale(self, factor):
        """Multiply by a TruncatedSeries or scalar coefficient."""
        if not isinstance(factor, TruncatedSeries):
            factor = self.ring.constant(factor)
        return PDElement(self.ring, self.dim, self.cap,
                         {J: c * factor for J, c in self.terms.items()},
                         self.reliable)

    def deriv(self, i):
        """Divided-power partial derivative: W_i^[m] -> W_i^[m-1]."""
        out = {}
        for J, c in self.terms.items():
            if J[i]:
                nj = list(J)
                nj[i] -= 1
                out[tuple(nj)] = c
        rel = self.reliable if self.reliable == _EXACT else self.reliable - 1
        return PDElement(self.ring, self.dim, self.cap, out, rel)

    def raise_index(self, i):
        """The right inverse of deriv(i): W_i^[m] -> W_i^[m+1]."""
        out = {}
        dropped = False
        for J, c in self.terms.items():
            if sum(J) + 1 > self.cap:
                dropped = True
                continue
            nj = list(J)
            nj[i] += 1
            out[tuple(nj)] = c
        rel = self.reliable if self.reliable == _EXACT else self.reliable + 1
        if dropped:
            rel = min(rel, self.cap)
        return PDElement(self.ring, self.dim, self.cap, out, rel)

    def constant_in(self, i):
        """The part free of W_i."""
        return PDElement(self.ring, self.dim, self.cap,
                         {J: c for J, c in self.terms.items() if J[i] == 0},
                         self.reliable)

    def constant_term(self):
        return self.coefficient(_zero_index(self.dim))

    def as_exact(self):
        """Reinterpret the stored terms as the entire object."""
        return PDElement(self.ring, self.dim, self.cap, dict(self.terms))

    def is_zerolike_on_reliable(self):
        return all(c.is_zerolike for J, c in self.terms.items()
                   if sum(J) <= self.reliable)

    def residual_floor(self):
        """Certified valuation lower bound over the reliable window."""
        floors = [c.valuation_floor() for J, c in self.terms.items()
                  if sum(J) <= self.reliable]
        return min(floors) if floors else INFINITY

    def agrees_with(self, other):
        """Equality of coefficients on the common reliable window."""
        self._compat(other)
        rel = min(self.reliable, other.reliable)
        keys = set(self.terms) | set(other.terms)
        for J in keys:
            if sum(J) > rel:
                continue
            if not (self.coefficient(J) - other.coefficient(J)).is_zerolike:
                return False
        return True

    def to_json(self):
        terms = {}
        for J in sorted(self.terms):
            terms["[" + ",".join(map(str, J)) + "]"] = self.terms[J].to_json()
        rel = "inf" if self.reliable == _EXACT else self.reliable
        return {"dim": self.dim, "cap": self.cap, "terms": terms,
                "reliable": rel}

    def __repr__(self):
        body = ", ".join(f"{J}: {c!r}" for J, c in sorted(self.terms.items()))
        return (f"PDElement(dim={self.dim}, cap={self.cap}, "
                f"reliable={self.reliable}, {{{body}}})")


def pd_zero(ring, dim, cap):
    return PDElement(ring, dim, cap, {})


def pd_one(ring, dim, cap):
    return PDElement(ring, dim, cap, {_zero_index(dim): ring.one()})


def pd_scalar(ring, dim, cap, coefficient):
    if not isinstance(coefficient, TruncatedSeries):
        coefficient = ring.constant(coefficient)
    return PDElement(ring, dim, cap, {_zero_index(dim): coefficient})


def pd_variable(ring, dim, cap, i, m=1):
    """The basis element W_i^[m]."""
    J = [0] * dim
    J[i] = m
    return PDElement(ring, dim, cap, {tuple(J): ring.one()})


def pd_from_json(ring, obj):
    terms = {}
    for key, val in obj["terms"].items():
        J = tuple(int(x) for x in key.strip("[]").split(",")) if key != "[]" \
            else ()
        terms[J] = ring.series_from_json(val)
    rel = obj.get("reliable", "inf")
    rel = _EXACT if rel == "inf" else int(rel)
    return PDElement(ring, obj["dim"], obj["cap"], terms, rel)


def pd_multiply(a, b):
    """Product under the divided-power law W^[i] W^[j] = C(i+j,i) W^[i+j]."""
    a._compat(b)
    out = {}
    dropped = False
    for Ja, ca in a.terms.items():
        for Jb, cb in b.terms.items():
            J = tuple(x + y for x, y in zip(Ja, Jb))
            if sum(J) > a.cap:
                dropped = True
                continue
            mult = 1
            for x, y in zip(Ja, Jb):
                if x and y:
                    mult *= math.comb(x + y, x)
            c = (ca * cb).scale(mult) if mult != 1 else ca * cb
            out[J] = out[J] + c if J in out else c
    rel = min(a.reliable + b.effective_order(),
              b.reliable + a.effective_order())
    if dropped:
        rel = min(rel, a.cap)
    return PDElement(a.ring, a.dim, a.cap, out, rel)


def _single_pd_power(ring, dim, cap, J, c, k):
    """(c W^[J])^[k] as (terms, dropped); integral except in degree zero."""
    if k == 0:
        return {_zero_index(dim): ring.one()}, False
    s = sum(1 for x in J if x)
    if s == 0:
        coeff = c.power(k).scale(Fraction(1, math.factorial(k)))
        return {_zero_index(dim): coeff}, False
    nJ = tuple(x * k for x in J)
    if sum(nJ) > cap:
        return {}, True
    mult = math.factorial(k) ** (s - 1)
    for x in J:
        if x:
            mult *= math.factorial(x * k) // (
                math.factorial(x) ** k * math.factorial(k))
    return {nJ: c.power(k).scale(mult)}, False


def pd_power(x, m):
    """The divided power x^[m] = x^m / m!.

    Computed term by term: writing x as a sum of single terms tau_i, the
    result is the convolution of the closed-form powers tau_i^[k].  All
    divisions happen in the scalar field, and only degree-zero terms ever
    produce denominators.
    """
    ring, dim, cap = x.ring, x.dim, x.cap
    if m < 0:
        raise ConfigMismatch("negative divided power")
    rel_in = x.reliable
    if m == 0:
        return pd_one(ring, dim, cap)
    # partial[k] accumulates (sum of first terms)^[k]
    partial = {0: {_zero_index(dim): ring.one()}}
    dropped = False
    for J, c in sorted(x.terms.items()):
        singles = []
        for j in range(m + 1):
            single, drop = _single_pd_power(ring, dim, cap, J, c, j)
            dropped = dropped or drop
            singles.append(single)
        new = {}
        for k in range(m + 1):
            acc = {}
            for j in range(k + 1):
                prev = partial.get(k - j)
                if prev is None:
                    continue
                single = singles[j]
                for Jp, cp in prev.items():
                    for Js, cs in single.items():
                        Jn = tuple(p + q for p, q in zip(Jp, Js))
                        if sum(Jn) > cap:
                            dropped = True
                            continue
                        mult = 1
                        for p, q in zip(Jp, Js):
                            if p and q:
                                mult *= math.comb(p + q, p)
                        cn = (cp * cs).scale(mult) if mult != 1 else cp * cs
                        acc[Jn] = acc[Jn] + cn if Jn in acc else cn
            new[k] = acc
        partial = new
    terms = partial.get(m, {})
    if rel_in == _EXACT:
        rel = _EXACT
    else:
        # unknown input degrees >= rel_in + 1 first affect the m-th divided
        # power at that same degree (all other factors have degree >= 0)
        rel = rel_in
    if dropped:
        rel = min(rel, cap)
    return PDElement(ring, dim, cap, terms, rel)


def pd_substitute(a, values):
    """Evaluate a at values[i] in place of the i-th coordinate.

    All substituted values must share one (ring, dim, cap).  When `a` has
    only finite reliability, every value must have positive effective order,
    otherwise unknown high-degree terms of `a` would contaminate low degrees
    of the result unpredictably.
    """
    if len(values) != a.dim:
        raise ConfigMismatch("need one value per coordinate")
    v0 = values[0]
    for v in values[1:]:
        v0._compat(v)
    _same_ring(a, v0)
    if a.reliable != _EXACT:
        used = [i for J in a.terms for i, x in enumerate(J) if x]
        if any(values[i].effective_order() < 1 for i in set(used)):
            raise ConfigMismatch(
                "substitution into a partially reliable element needs "
                "values without constant terms")
    ring, dim, cap = v0.ring, v0.dim, v0.cap
    memo = {}

    def power(i, k):
        got = memo.get((i, k))
        if got is None:
            got = pd_power(values[i], k)
            memo[(i, k)] = got
        return got

    out = pd_zero(ring, dim, cap)
    for J, c in sorted(a.terms.items()):
        piece = pd_scalar(ring, dim, cap, c)
        for i, k in enumerate(J):
            if k:
                piece = pd_multiply(piece, power(i, k))
        out = out + piece
    if a.reliable != _EXACT:
        out = PDElement(ring, dim, cap, out.terms,
                        min(out.reliable, a.reliable))
    return out


# ---------------------------------------------------------------------------
# connection, coordinate changes, group action
# ---------------------------------------------------------------------------


def pd_connection(a):
    """Components of d(a) on the basis dlog T_i / xi: the i-th is -u da/dW_i.

    The basis symbols carry twist FORM_BASIS_TWIST; the components returned
    here are their plain coefficients.
    """
    u = a.ring.u_const
    return [a.deriv(i).scale(-u) for i in range(a.dim)]


def pd_connection_U(a, convention=1):
    """The same differential in the multiplicative coordinates.

    With convention=+1 the coordinates satisfy U_i = (u/xi)(T_i/t_i - 1) and
    the i-th component is (u + xi U_i) da/dU_i; convention=-1 flips the sign
    of the coordinates, giving (xi U_i - u) da/dU_i.  Matches pd_connection
    through coordinate_change_UW at the same convention.
    """
    if convention not in (1, -1):
        raise ConfigMismatch("convention must be +1 or -1")
    ring = a.ring
    out = []
    for i in range(a.dim):
        factor = pd_variable(ring, a.dim, a.cap, i).scale(ring.xi) + \
            pd_scalar(ring, a.dim, a.cap, ring.u.scale(convention))
        out.append(pd_multiply(factor, a.deriv(i)))
    return out


def _uw_series(ring, dim, cap, i, direction, convention):
    """The substituted series for one coordinate of coordinate_change_UW.

    Both conventions expand the same log/exp relation; the inner sign of the
    geometric ratio and an overall sign depend on direction and convention.
    """
    n = ring.t_order
    if n > cap:
        raise TruncationOverflow(
            "degree cap too small for the coordinate-change series at this "
            "t-order; need cap >= t_order")
    ratio = ring.xi * ring.constant(ring.u_const.inv())  # xi/u, t-order 1
    inner = -1 if direction == "U->W" else -convention
    out = pd_zero(ring, dim, cap)
    coeff = ring.one()
    for m in range(1, n + 1):
        # coeff is (inner * xi/u)^(m-1)
        c = coeff if direction == "U->W" else coeff.scale(
            math.factorial(m - 1))
        out = out + pd_variable(ring, dim, cap, i, m).scale(c)
        coeff = coeff * ratio.scale(inner)
    if convention == 1:
        out = -out
    return out


def coordinate_change_UW(a, direction, convention=1):
    """Rewrite between the additive and multiplicative coordinates.

    direction "U->W" treats `a` as living in U-coordinates and substitutes
    the log/exp series for each U_i in terms of W_i; "W->U" is the inverse.
    The series terminate because xi/u has t-order 1, but they reach degree
    t_order, so the cap must be at least the t-order (TruncationOverflow
    otherwise).  The two directions compose to the identity on the reliable
    window.
    """
    if direction not in ("U->W", "W->U"):
        raise ConfigMismatch("direction must be 'U->W' or 'W->U'")
    if convention not in (1, -1):
        raise ConfigMismatch("convention must be +1 or -1")
    values = [_uw_series(a.ring, a.dim, a.cap, i, direction, convention)
              for i in range(a.dim)]
    return pd_substitute(a, values)


def eliminate_w0(a, r, relation):
    """Substitute away coordinate 0 using the chart relation.

    `a` lives in d+1 coordinates indexed 0..d; the relation involves the
    first r+1 of them.  relation "linear" substitutes W_0 = -(W_1+...+W_r);
    "multiplicative" substitutes V_0 = prod_{i<=r}(1+V_i)^{-1} - 1, whose
    expansion is the alternating series -V + V^2 - ... written with divided
    powers.  The result lives in the d remaining coordinates.
    """
    d = a.dim - 1
    if d < 1:
        raise ConfigMismatch("need at least one remaining coordinate")
    if r > d or r < 1:
        raise ConfigMismatch("relation width r must satisfy 1 <= r <= d")
    ring, cap = a.ring, a.cap
    if relation == "linear":
        expr = pd_zero(ring, d, cap)
        for i in range(r):
            expr = expr - pd_variable(ring, d, cap, i)
    elif relation == "multiplicative":
        expr = pd_one(ring, d, cap)
        for i in range(r):
            # (1 + V_i)^(-1) = sum_m (-1)^m m! V_i^[m], truncated at the cap
            inv = pd_one(ring, d, cap)
            for m in range(1, cap + 1):
                inv = inv + pd_variable(ring, d, cap, i, m).scale(
                    (-1) ** m * math.factorial(m))
            inv = PDElement(ring, d, cap, inv.terms, cap)
            expr = pd_multiply(expr, inv)
        expr = expr - pd_one(ring, d, cap)
    else:
        raise ConfigMismatch("relation must be 'linear' or 'multiplicative'")
    values = [expr] + [pd_variable(ring, d, cap, i) for i in range(d)]
    return pd_substitute(a, values)


def gamma_shift(a, i, exponent):
    """Action of the i-th chart translation to the given integer power.

    Substitutes W_i -> W_i + exponent * gamma_const, expanded by the
    divided-power binomial law; the shift constants exponent^k c^k / k! gain
    valuation with k, so the finite sum is the exact action on the stored
    terms.  Reliability is inherited.
    """
    ring = a.ring
    c = ring.gamma_const
    out = {}
    for J, coeff in a.terms.items():
        m = J[i]
        for k in range(m + 1):
            if k == 0:
                add = coeff
            else:
                shift = (c * exponent) ** k * Fraction(1, math.factorial(k))
                add = coeff.scale(shift)
            nj = list(J)
            nj[i] = m - k
            nj = tuple(nj)
            prev = out.get(nj)
            out[nj] = add if prev is None else prev + add
    return PDElement(ring, a.dim, a.cap, out, a.reliable)


# ---------------------------------------------------------------------------
# differential forms and the contracting homotopy
# ---------------------------------------------------------------------------


def _insert_sign(i, S):
    """Sign of e_i wedge e_S relative to the sorted basis of S + {i}."""
    return -1 if sum(1 for j in S if j < i) % 2 else 1


class PDForm:
    """Alternating form with PDElement coefficients on sorted index sets."""

    __slots__ = ("ring", "dim", "cap", "degree", "comps", "twist")

    def __init__(self, ring, dim, cap, degree, comps, twist=None):
        # degree dim + 1 exists only as the zero target of the top
        # differential; no index set of that size fits, so comps stays empty
        if not 0 <= degree <= dim + 1:
            raise ConfigMismatch("form degree out of range")
        clean = {}
        for S, x in comps.items():
            S = tuple(S)
            if len(S) != degree or sorted(set(S)) != list(S):
                raise ConfigMismatch(f"bad index set {S}")
            if x.dim != dim or x.cap != cap:
                raise ConfigMismatch("component with mismatched parameters")
            if x.terms or x.reliable != _EXACT:
                clean[S] = x
        self.ring = ring
        self.dim = dim
        self.cap = cap
        self.degree = degree
        self.comps = clean
        self.twist = TwistIndex(-degree) if twist is None else twist

    def component(self, S):
        return self.comps.get(tuple(S), pd_zero(self.ring, self.dim,
                                                self.cap))

    def reliable(self):
        rels = [x.reliable for x in self.comps.values()]
        return min(rels) if rels else _EXACT

    def __add__(self, other):
        if (other.ring != self.ring or other.dim != self.dim
                or other.cap != self.cap or other.degree != self.degree):
            raise ConfigMismatch("incompatible forms")
        out = dict(self.comps)
        for S, x in other.comps.items():
            out[S] = out[S] + x if S in out else x
        return PDForm(self.ring, self.dim, self.cap, self.degree, out,
                      self.twist)

    def __neg__(self):
        return PDForm(self.ring, self.dim, self.cap, self.degree,
                      {S: -x for S, x in self.comps.items()}, self.twist)

    def __sub__(self, other):
        return self + (-other)

    def agrees_with(self, other):
        keys = set(self.comps) | set(other.comps)
        return all(self.component(S).agrees_with(other.component(S))
                   for S in keys)

    def is_zerolike_on_reliable(self):
        return all(x.is_zerolike_on_reliable() for x in self.comps.values())

    def __repr__(self):
        body = ", ".join(f"{S}: {x!r}" for S, x in sorted(self.comps.items()))
        return f"PDForm(degree={self.degree}, {{{body}}})"


def form_from_element(x):
    """Degree-0 form wrapping a PDElement."""
    return PDForm(x.ring, x.dim, x.cap, 0, {(): x})


def form_differential(w):
    """The de Rham differential sum_i (-u dW_i) e_i with Koszul signs."""
    out = {}
    for S, x in w.comps.items():
        parts = pd_connection(x)
        for i in range(w.dim):
            if i in S:
                continue
            comp = parts[i]
            if not comp.terms and comp.reliable == _EXACT:
                continue
            nS = tuple(sorted(S + (i,)))
            signed = comp if _insert_sign(i, S) == 1 else -comp
            out[nS] = out[nS] + signed if nS in out else signed
    # everything above top degree is the zero space; park it at dim + 1
    return PDForm(w.ring, w.dim, w.cap, min(w.degree + 1, w.dim + 1), out,
                  w.twist + FORM_BASIS_TWIST)


def _integrate(x, k):
    """Right inverse of -u d/dW_k on elements; division-free."""
    return x.raise_index(k).scale(-x.ring.u_const.inv())


def homotopy_contract(w, k):
    """The contraction h_k: strip e_k and integrate in W_k."""
    if w.degree < 1:
        raise ConfigMismatch("homotopy_contract needs a form of degree >= 1")
    out = {}
    for S, x in w.comps.items():
        if k not in S:
            continue
        nS = tuple(j for j in S if j != k)
        val = _integrate(x, k)
        out[nS] = val if _insert_sign(k, nS) == 1 else -val
    return PDForm(w.ring, w.dim, w.cap, w.degree - 1, out,
                  w.twist - FORM_BASIS_TWIST)


def homotopy_project(w, k):
    """The projection pi_k: kill e_k components and all W_k dependence."""
    out = {}
    for S, x in w.comps.items():
        if k in S:
            continue
        out[S] = x.constant_in(k)
    return PDForm(w.ring, w.dim, w.cap, w.degree, out, w.twist)


def poincare_solve(w):
    """A primitive of a closed positive-degree form.

    Applies the variable-by-variable contracting homotopy; the caller
    certifies the answer by checking form_differential(x).agrees_with(w).
    For non-closed inputs the returned form simply fails that check.
    """
    if w.degree < 1:
        raise ConfigMismatch("poincare_solve needs a form of degree >= 1")
    x = PDForm(w.ring, w.dim, w.cap, w.degree - 1, {})
    cur = w
    for k in range(w.dim):
        x = x + homotopy_contract(cur, k)
        cur = homotopy_project(cur, k)
    return x


def kernel_is_constant(x):
    """Check the degree-0 statement: d(x) = 0 forces x constant.

    Returns (closed, constant_witness): closed is True when all components
    of d(x) vanish on the reliable window, and in that case every
    nonconstant reliable coefficient of x is indistinguishable from zero, so
    the witness is the constant term.
    """
    dx = form_differential(form_from_element(x))
    closed = dx.is_zerolike_on_reliable()
    if closed:
        rel = x.reliable if x.reliable != _EXACT else x.cap
        for J, c in x.terms.items():
            if sum(J) and sum(J) <= rel and not c.is_zerolike:
                raise AssertionError(
                    "closed element with a reliable nonconstant coefficient")
    return closed, x.constant_term()
