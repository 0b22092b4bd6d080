"""p-typical Witt vectors over small perfect bases of characteristic p.

The universal sum, product, and negation polynomials are solved once per
(p, length) from the ghost equations over the rationals and cached; every
division by p^j happens on integer coefficients and doubles as the
integrality verification.  Vectors have a fixed length, addition and
multiplication evaluate the cached polynomials in the base, Frobenius is
componentwise p-th power (the base is perfect), and Verschiebung prepends a
zero.  Bases that lift to characteristic zero (prime fields and monomial
algebras) also expose the ghost map, where identities can be checked with
exact integers.
"""

from fractions import Fraction

from .errors import ConfigMismatch, SizeLimit

# ---------------------------------------------------------------------------
# sparse integer polynomials, exponent-vector keyed
# ---------------------------------------------------------------------------


def _padd(d1, d2):
    out = dict(d1)
    for e, c in d2.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _pscale(d, k):
    if k == 0:
        return {}
    return {e: c * k for e, c in d.items()}


def _pmul(d1, d2):
    out = {}
    for e1, c1 in d1.items():
        for e2, c2 in d2.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            s = out.get(e, 0) + c1 * c2
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _ppow(d, n):
    out = None
    base = d
    while n:
        if n & 1:
            out = base if out is None else _pmul(out, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return out if out is not None else {}


def _pdivexact(d, k):
    out = {}
    for e, c in d.items():
        q, r = divmod(c, k)
        if r:
            raise AssertionError("ghost equations produced a non-integer")
        out[e] = q
    return out


def _var(width, i, exp=1):
    e = [0] * width
    e[i] = exp
    return {tuple(e): 1}


_STRUCTURE_CACHE = {}


def witt_structure(p, m):
    """Universal polynomials for length-m vectors: dict with sum/prod/neg.

    Sum and product live in 2m variables (components of the two operands in
    order), negation in m.  Guarded by a desk-scale bound because the
    expansion degree grows like p^(m-1).
    """
    key = (p, m)
    cached = _STRUCTURE_CACHE.get(key)
    if cached is not None:
        return cached
    if m < 1 or m > 4:
        raise ConfigMismatch("supported Witt lengths are 1..4")
    if p ** (m - 1) > 125:
        raise SizeLimit(
            f"universal polynomials for (p, m) = ({p}, {m}) exceed the "
            "desk-scale expansion bound")

    def ghost(j, offset, width):
        acc = {}
        for i in range(j + 1):
            acc = _padd(acc, _pscale(
                _ppow(_var(width, offset + i), p ** (j - i)), p ** i))
        return acc

    ssum, sprod, sneg = [], [], []
    for j in range(m):
        acc = _padd(ghost(j, 0, 2 * m), ghost(j, m, 2 * m))
        for i in range(j):
            acc = _padd(acc, _pscale(_ppow(ssum[i], p ** (j - i)), -p ** i))
        ssum.append(_pdivexact(acc, p ** j))

        acc = _pmul(ghost(j, 0, 2 * m), ghost(j, m, 2 * m))
        for i in range(j):
            acc = _padd(acc, _pscale(_ppow(sprod[i], p ** (j - i)), -p ** i))
        sprod.append(_pdivexact(acc, p ** j))

        acc = _pscale(ghost(j, 0, m), -1)
        for i in range(j):
            acc = _padd(acc, _pscale(_ppow(sneg[i], p ** (j - i)), -p ** i))
        sneg.append(_pdivexact(acc, p ** j))

    cached = {"sum": ssum, "prod": sprod, "neg": sneg}
    _STRUCTURE_CACHE[key] = cached
    return cached


def eval_poly(poly, vals, ring):
    """Evaluate an exponent-dict polynomial on ring elements."""
    powers = {}

    def pw(idx, ex):
        got = powers.get((idx, ex))
        if got is None:
            if ex == 1:
                got = vals[idx]
            elif ex % 2 == 0:
                h = pw(idx, ex // 2)
                got = ring.mul(h, h)
            else:
                got = ring.mul(pw(idx, ex - 1), vals[idx])
            powers[(idx, ex)] = got
        return got

    acc = ring.zero()
    for mono, coeff in poly.items():
        term = None
        for idx, ex in enumerate(mono):
            if ex:
                f = pw(idx, ex)
                term = f if term is None else ring.mul(term, f)
        if term is None:
            term = ring.one()
        acc = ring.add(acc, ring.scalar(coeff, term))
    return acc


# ---------------------------------------------------------------------------
# perfect bases
# ---------------------------------------------------------------------------


class IntegerRing:
    """Plain integers; the lift target of the prime field."""

    characteristic = 0
    is_liftable = False

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def scalar(self, c, a):
        return c * a


class FiniteField:
    """F_{p^k} for small k; elements are ints (k=1) or coordinate tuples.

    Only k <= 3 is supported, which keeps the irreducible-polynomial search
    and the root tests trivial.
    """

    def __init__(self, p, k=1):
        if k < 1 or k > 3:
            raise SizeLimit("finite-field extensions supported for k <= 3")
        self.p = p
        self.k = k
        self.characteristic = p
        self.is_liftable = (k == 1)
        if k > 1:
            self.modulus = self._find_irreducible()

    def _find_irreducible(self):
        # monic x^k + c_{k-1} x^{k-1} + ... + c_0 with no roots in F_p;
        # for k in {2, 3} rootlessness is irreducibility
        p, k = self.p, self.k
        for code in range(p ** k):
            cs = []
            c = code
            for _ in range(k):
                cs.append(c % p)
                c //= p
            has_root = any(
                (pow(x, k, p) + sum(cs[i] * pow(x, i, p)
                                    for i in range(k))) % p == 0
                for x in range(p))
            if not has_root:
                return tuple(cs)
        raise AssertionError("no irreducible polynomial found")

    def zero(self):
        return 0 if self.k == 1 else (0,) * self.k

    def one(self):
        return 1 if self.k == 1 else (1,) + (0,) * (self.k - 1)

    def element(self, coords):
        if self.k == 1:
            return coords % self.p
        return tuple(c % self.p for c in coords)

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p
        return tuple((-x) % self.p for x in a)

    def scalar(self, c, a):
        if self.k == 1:
            return (c * a) % self.p
        return tuple((c * x) % self.p for x in a)

    def mul(self, a, b):
        p, k = self.p, self.k
        if k == 1:
            return (a * b) % p
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % p
        for d in range(2 * k - 2, k - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for i in range(k):
                    prod[d - k + i] = (prod[d - k + i]
                                       - c * self.modulus[i]) % p
        return tuple(prod[:k])

    def pow(self, a, n):
        out = self.one()
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def frobenius(self, a):
        return self.pow(a, self.p)

    def proot(self, a):
        # x -> x^(p^(k-1)) inverts Frobenius on F_{p^k}
        return self.pow(a, self.p ** (self.k - 1))

    def lift(self, a):
        if not self.is_liftable:
            raise ConfigMismatch("only the prime field lifts canonically")
        return a

    def lifted(self):
        if not self.is_liftable:
            raise ConfigMismatch("only the prime field lifts canonically")
        return IntegerRing()

    def elements(self):
        if self.k == 1:
            return list(range(self.p))
        out = []
        for code in range(self.p ** self.k):
            cs = []
            c = code
            for _ in range(self.k):
                cs.append(c % self.p)
                c //= self.p
            out.append(tuple(cs))
        return out


class MonomialAlgebra:
    """Monomials x_1^(a_1) ... x_r^(a_r) with exponents in (1/p^e) * N.

    At characteristic p this is a perfect F_p-algebra as long as p-th roots
    stay within the allowed denominator p^e; taking a root that would need a
    deeper denominator raises ConfigMismatch.  characteristic=0 gives the
    canonical integer-coefficient lift used by the ghost map.
    """

    def __init__(self, p, nvars, denom_exp, characteristic=None):
        self.p = p
        self.nvars = nvars
        self.denom_exp = denom_exp
        self.characteristic = p if characteristic is None else characteristic
        if self.characteristic not in (0, p):
            raise ConfigMismatch("characteristic must be p or 0")
        self.is_liftable = self.characteristic == p

    def _norm(self, c):
        return c % self.p if self.characteristic else c

    def zero(self):
        return {}

    def one(self):
        return {(Fraction(0),) * self.nvars: 1}

    def monomial(self, exps, coeff=1):
        exps = tuple(Fraction(x) for x in exps)
        for x in exps:
            if x < 0:
                raise ConfigMismatch("negative exponent")
            d = x.denominator
            if self.p ** self.denom_exp % d != 0:
                raise ConfigMismatch(
                    f"denominator {d} exceeds allowed p^{self.denom_exp}")
        c = self._norm(coeff)
        return {exps: c} if c else {}

    def variable(self, i):
        exps = [Fraction(0)] * self.nvars
        exps[i] = Fraction(1)
        return {tuple(exps): 1}

    def add(self, a, b):
        out = dict(a)
        for e, c in b.items():
            s = self._norm(out.get(e, 0) + c)
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return out

    def neg(self, a):
        return {e: self._norm(-c) for e, c in a.items()}

    def scalar(self, c, a):
        out = {}
        for e, x in a.items():
            s = self._norm(c * x)
            if s:
                out[e] = s
        return out

    def mul(self, a, b):
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = self._norm(out.get(e, 0) + c1 * c2)
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return out

    def pow(self, a, n):
        out = self.one()
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def frobenius(self, a):
        if not self.characteristic:
            raise ConfigMismatch("frobenius needs characteristic p")
        return {tuple(x * self.p for x in e): c for e, c in a.items()}

    def proot(self, a):
        if not self.characteristic:
            raise ConfigMismatch("p-th roots need characteristic p")
        out = {}
        for e, c in a.items():
            ne = tuple(x / self.p for x in e)
            for x in ne:
                if self.p ** self.denom_exp % x.denominator != 0:
                    raise ConfigMismatch(
                        "p-th root needs a deeper denominator than allowed")
            out[ne] = c
        return out

    def lift(self, a):
        if not self.is_liftable:
            raise ConfigMismatch("already characteristic 0")
        return dict(a)

    def lifted(self):
        return MonomialAlgebra(self.p, self.nvars, self.denom_exp,
                               characteristic=0)

    def reduce(self, a):
        out = {}
        for e, c in a.items():
            s = c % self.p
            if s:
                out[e] = s
        return out


# ---------------------------------------------------------------------------
# Witt vectors
# ---------------------------------------------------------------------------


class WittVector:
    """Fixed-length p-typical Witt vector over a perfect base."""

    __slots__ = ("base", "comps")

    def __init__(self, base, comps):
        self.base = base
        self.comps = tuple(comps)

    @property
    def length(self):
        return len(self.comps)

    def _check(self, other):
        if not isinstance(other, WittVector):
            raise TypeError("expected a WittVector")
        if other.base is not self.base or other.length != self.length:
            raise ConfigMismatch("mismatched Witt base or length")

    def __add__(self, other):
        self._check(other)
        polys = witt_structure(self.base.p, self.length)["sum"]
        vals = list(self.comps) + list(other.comps)
        return WittVector(self.base,
                          [eval_poly(s, vals, self.base) for s in polys])

    def __neg__(self):
        polys = witt_structure(self.base.p, self.length)["neg"]
        vals = list(self.comps)
        return WittVector(self.base,
                          [eval_poly(s, vals, self.base) for s in polys])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        polys = witt_structure(self.base.p, self.length)["prod"]
        vals = list(self.comps) + list(other.comps)
        return WittVector(self.base,
                          [eval_poly(s, vals, self.base) for s in polys])

    def __eq__(self, other):
        return (isinstance(other, WittVector) and other.base is self.base
                and other.comps == self.comps)

    __hash__ = None

    def frobenius(self):
        """The Witt Frobenius; componentwise p-th power over a perfect base."""
        return WittVector(self.base,
                          [self.base.frobenius(c) for c in self.comps])

    def verschiebung(self):
        """Prepend a zero component; the last component falls off the end."""
        return WittVector(self.base,
                          (self.base.zero(),) + self.comps[:-1])

    def scalar_int(self, c):
        """Multiply by an integer via repeated addition (desk-scale c)."""
        if c < 0:
            return (-self).scalar_int(-c)
        out = witt_zero(self.base, self.length)
        for _ in range(c):
            out = out + self
        return out

    def ghost(self):
        """Ghost components in the characteristic-zero lift of the base."""
        base = self.base
        lift_ring = base.lifted()
        lifted = [base.lift(c) for c in self.comps]
        p = base.p
        out = []
        for j in range(self.length):
            acc = lift_ring.zero()
            for i in range(j + 1):
                pw = lifted[i]
                for _ in range(j - i):
                    # iterate p-th powers to avoid huge one-shot exponents
                    nxt = lift_ring.one()
                    for _ in range(p):
                        nxt = lift_ring.mul(nxt, pw)
                    pw = nxt
                acc = lift_ring.add(acc, lift_ring.scalar(p ** i, pw))
            out.append(acc)
        return out

    def __repr__(self):
        return f"WittVector({list(self.comps)!r})"


def witt_zero(base, m):
    return WittVector(base, [base.zero()] * m)


def witt_one(base, m):
    return WittVector(base, [base.one()] + [base.zero()] * (m - 1))


def teichmueller(base, x, m):
    """The multiplicative lift [x] = (x, 0, ..., 0)."""
    return WittVector(base, [x] + [base.zero()] * (m - 1))


def lifted_witt_sum(p, m, lift_ring, lifted_a, lifted_b):
    """Witt addition performed entirely in a characteristic-zero lift.

    Evaluating the universal polynomials over the lift makes the ghost map an
    exact ring homomorphism; reducing the answer mod p recovers the
    characteristic-p sum.
    """
    polys = witt_structure(p, m)["sum"]
    vals = list(lifted_a) + list(lifted_b)
    return [eval_poly(s, vals, lift_ring) for s in polys]


# ---------------------------------------------------------------------------
# Teichmueller difference expansion
# ---------------------------------------------------------------------------


def _divide_by_root_difference(elt, p, n):
    """Divide an F_p polynomial in X^(1/p^n), Y^(1/p^n) by the root difference.

    Exponents are rescaled by p^n so the divisor becomes A - B with integer
    exponents.  Returns (quotient, remainder) in the original fractional
    exponents; the remainder is a polynomial in B alone.
    """
    scale = p ** n
    work = {}
    for e, c in elt.items():
        a, b = e[0] * scale, e[1] * scale
        if a.denominator != 1 or b.denominator != 1:
            raise AssertionError("component not defined over the 1/p^n grid")
        work[(int(a), int(b))] = c % p
    quot = {}
    while True:
        live = [e for e, c in work.items() if c and e[0] > 0]
        if not live:
            break
        a, b = max(live)
        c = work.pop((a, b))
        quot[(a - 1, b)] = (quot.get((a - 1, b), 0) + c) % p
        nb = (a - 1, b + 1)
        s = (work.get(nb, 0) + c) % p
        if s:
            work[nb] = s
        else:
            work.pop(nb, None)
    rem = {e: c for e, c in work.items() if c}

    def unscale(d):
        return {(Fraction(a, scale), Fraction(b, scale)): c
                for (a, b), c in d.items() if c}

    return unscale(quot), unscale(rem)


def teich_difference_expansion(p, m):
    """Expand [X] - [Y] as sum_n p^n [P_n(X, Y)] over the perfect base.

    Returns (terms, quotients): terms[n] is P_n as a monomial element in
    F_p[X^(1/p^n), Y^(1/p^n)], quotients[n] certifies the divisibility
    P_n = (X^(1/p^n) - Y^(1/p^n)) * quotients[n], which is asserted.
    """
    base = MonomialAlgebra(p, 2, max(0, m - 1))
    x = base.variable(0)
    y = base.variable(1)
    diff = teichmueller(base, x, m) - teichmueller(base, y, m)
    terms, quotients = [], []
    for n, comp in enumerate(diff.comps):
        pn = comp
        for _ in range(n):
            pn = base.proot(pn)
        quot, rem = _divide_by_root_difference(pn, p, n)
        if rem:
            raise AssertionError(
                f"P_{n} is not divisible by the p^{n}-th root difference")
        terms.append(pn)
        quotients.append(quot)
    return terms, quotients
