"""Capped relative precision arithmetic over F = Q_p(zeta_p).

The field is the p-th cyclotomic extension of Q_p, totally ramified of degree
p - 1 with uniformizer pi = zeta_p - 1.  The normalized valuation has
v(p) = 1, so values live in (1/(p-1)) * Z.  A nonzero element is stored as

    pi^w * (c_0 + c_1*pi + ... + c_{p-2}*pi^{p-2})

with integer coefficients, c_0 a unit mod p, and the coefficient vector
reduced canonically so that two elements agreeing within the stored window
have identical representations.  Relative precision is tracked in pi-adic
units: an element with valuation w and relative precision r is known modulo
pi^(w + r).  The reduction uses

    pi^(p-1) = -p * (1 + a_1*pi + ... + a_{p-2}*pi^(p-2)),  a_k = C(p, k+1)/p,

which is the minimal relation Phi_p(1 + pi) = 0 rearranged.

Addition accounts for leading-term cancellation, multiplication takes the
minimum of the operands' relative precisions, and questions the stored window
cannot answer raise PrecisionExhausted instead of guessing.  Exact zero is a
distinguished value with valuation INFINITY; an inexact zero remembers only
the bound below which it is indistinguishable from zero.
"""

import math
from fractions import Fraction

from .errors import ConfigMismatch, DivergentSeries, PrecisionExhausted

INFINITY = math.inf


def _vp(n, p):
    """Exact p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


class FieldConfig:
    """Arithmetic context for Q_p(zeta_p) at a fixed working precision.

    precision counts guaranteed relative digits in powers of p; internally
    everything runs at precision * (p-1) pi-adic digits.  cyclotomic_depth is
    a forward-compatibility knob and only depth 1 is implemented.
    different_valuation feeds the ramification shift of model rings built on
    top of this field; it must be a nonnegative element of (1/(p-1)) * Z.
    """

    def __init__(self, p, precision=8, cyclotomic_depth=1,
                 different_valuation=Fraction(0)):
        if not _is_prime(p):
            raise ConfigMismatch(f"p = {p} is not prime")
        if precision < 1:
            raise ConfigMismatch("precision must be a positive integer")
        if cyclotomic_depth != 1:
            raise ConfigMismatch("only cyclotomic_depth = 1 is implemented")
        dv = Fraction(different_valuation)
        if dv < 0:
            raise ConfigMismatch("different_valuation must be >= 0")
        shift = dv * (p - 1)
        if shift.denominator != 1:
            raise ConfigMismatch(
                "different_valuation must lie in the value group (1/(p-1))Z")
        self.p = p
        self.precision = precision
        self.cyclotomic_depth = cyclotomic_depth
        self.different_valuation = dv
        self.shift = int(shift)
        self.e = p - 1
        self.rel = precision * self.e
        # pi^(p-1) = -p * A(pi) with A monic in the constant term
        self._acoef = tuple(math.comb(p, k + 1) // p for k in range(self.e))
        self._redrows = self._build_redrows()
        self._pi_cache = {}
        self._neg_ainv_cache = {}
        self._moduli_cache = {}

    # -- relation plumbing -------------------------------------------------

    def _build_redrows(self):
        e, p = self.e, self.p
        rows = []
        row = [-p * a for a in self._acoef]
        rows.append(tuple(row))
        for _ in range(e - 2):
            over = row[-1]
            row = [0] + row[:-1]
            if over:
                base = rows[0]
                row = [row[i] + over * base[i] for i in range(e)]
            rows.append(tuple(row))
        return rows

    def _polymul(self, c1, c2):
        """Multiply coefficient vectors and reduce back to length p-1."""
        e = self.e
        prod = [0] * (2 * e - 1)
        for i, a in enumerate(c1):
            if a:
                for j, b in enumerate(c2):
                    if b:
                        prod[i + j] += a * b
        out = prod[:e]
        for j in range(e, 2 * e - 1):
            c = prod[j]
            if c:
                row = self._redrows[j - e]
                for i in range(e):
                    out[i] += c * row[i]
        return out

    def _pi_pow(self, k):
        """Coefficient vector of pi^k for k >= 0."""
        e = self.e
        cached = self._pi_cache.get(k)
        if cached is not None:
            return cached
        if k < e:
            out = tuple(1 if i == k else 0 for i in range(e))
        else:
            prev = list(self._pi_pow(k - 1))
            over = prev[-1]
            out = [0] + prev[:-1]
            if over:
                base = self._redrows[0]
                out = [out[i] + over * base[i] for i in range(e)]
            out = tuple(out)
        self._pi_cache[k] = out
        return out

    def _poly_inv(self, c, M):
        """Inverse of a unit coefficient vector modulo p^M."""
        p, e = self.p, self.e
        pm = p ** M
        c = [x % pm for x in c]
        y = [pow(c[0], -1, p)] + [0] * (e - 1)
        steps = max(1, (M * e).bit_length() + 1)
        for _ in range(steps):
            cy = self._polymul(c, y)
            t = [(-x) % pm for x in cy]
            t[0] = (t[0] + 2) % pm
            y = [x % pm for x in self._polymul(y, t)]
        return tuple(y)

    def _neg_ainv(self, M):
        """-A(pi)^(-1) mod p^M; the unit part of 1/p up to the pi power."""
        cached = self._neg_ainv_cache.get(M)
        if cached is None:
            inv = self._poly_inv(self._acoef, M)
            pm = self.p ** M
            cached = tuple((-x) % pm for x in inv)
            self._neg_ainv_cache[M] = cached
        return cached

    def _moduli(self, rel):
        """Canonical coefficient moduli p^ceil((rel - i)/(p-1)) for a window."""
        cached = self._moduli_cache.get(rel)
        if cached is None:
            e, p = self.e, self.p
            cached = tuple(p ** max(0, -((i - rel) // e)) for i in range(e))
            self._moduli_cache[rel] = cached
        return cached

    # -- constructors ------------------------------------------------------

    def zero(self):
        return PAdicScalar(self, INFINITY, (), INFINITY)

    def zeroish(self, bound):
        """The inexact zero O(pi^bound)."""
        return PAdicScalar(self, int(bound), None, 0)

    def one(self):
        return self._make_exact(0, (1,) + (0,) * (self.e - 1))

    def integer(self, n):
        if n == 0:
            return self.zero()
        return self._make_exact(0, (n,) + (0,) * (self.e - 1))

    def fraction(self, q):
        q = Fraction(q)
        if q == 0:
            return self.zero()
        return self.integer(q.numerator) / self.integer(q.denominator)

    def pi_power(self, k=1):
        """pi^k = (zeta_p - 1)^k at full working precision."""
        return self._make_exact(int(k), (1,) + (0,) * (self.e - 1))

    def zeta_minus_one(self):
        return self.pi_power(1)

    def zeta(self):
        """zeta_p itself, as 1 + pi."""
        coeffs = [1] + [0] * (self.e - 1)
        if self.e > 1:
            coeffs[1] = 1
        else:
            # p = 2: pi = -2, zeta = -1
            coeffs[0] = -1
        return self._make_exact(0, tuple(coeffs))

    def scalar(self, x):
        """Coerce an int, Fraction, or scalar into this field."""
        if isinstance(x, PAdicScalar):
            if x.F is not self:
                raise ConfigMismatch("scalar belongs to a different field")
            return x
        if isinstance(x, int):
            return self.integer(x)
        if isinstance(x, Fraction):
            return self.fraction(x)
        raise TypeError(f"cannot coerce {type(x).__name__}")

    def _make_exact(self, w, coeffs):
        """Build from exact integer coordinates; valuation extraction exact."""
        p, e = self.p, self.e
        cs = [int(c) for c in coeffs]
        if all(c == 0 for c in cs):
            return self.zero()
        delta = min(i + e * _vp(c, p) for i, c in enumerate(cs) if c)
        if delta:
            a, b = divmod(delta, e)
            M = -(-self.rel // e) + a + 2
            if b:
                cs = self._polymul(cs, self._pi_pow(e - b))
                cs = [c // p for c in cs]
                cs = self._polymul(cs, self._neg_ainv(M))
                a_left = a
            else:
                a_left = a
            for _ in range(a_left):
                cs = [c // p for c in cs]
                cs = self._polymul(cs, self._neg_ainv(M))
            w += delta
        return _make(self, int(w), cs, self.rel)

    def scalar_from_json(self, obj):
        """Inverse of PAdicScalar.to_json, bit-exact."""
        val, unit, prec = obj["val"], obj["unit"], obj["prec"]
        if val == "inf":
            return self.zero()
        if val is None:
            return self.zeroish(int(prec))
        fr = Fraction(val)
        w = fr * self.e
        if w.denominator != 1:
            raise ValueError("valuation outside the value group")
        coeffs = tuple(int(c) for c in unit)
        if len(coeffs) != self.e:
            raise ValueError("unit vector has wrong length")
        out = PAdicScalar(self, int(w), coeffs, int(prec))
        # round-trip through _make to reject non-canonical input
        chk = _make(self, int(w), list(coeffs), int(prec))
        if chk.vp != out.vp or chk.unit != out.unit or chk.rel != out.rel:
            raise ValueError("non-canonical scalar encoding")
        return chk

    def __eq__(self, other):
        return (isinstance(other, FieldConfig)
                and (self.p, self.precision, self.cyclotomic_depth,
                     self.different_valuation)
                == (other.p, other.precision, other.cyclotomic_depth,
                    other.different_valuation))

    def __hash__(self):
        return hash((self.p, self.precision, self.cyclotomic_depth,
                     self.different_valuation))

    def __repr__(self):
        return (f"FieldConfig(p={self.p}, precision={self.precision}, "
                f"different_valuation={self.different_valuation})")


def _make(F, w, coeffs, rel):
    """Normalize raw integer coordinates at window rel (pi-units) above w."""
    if rel <= 0:
        return PAdicScalar(F, int(w), None, 0)
    e, p = F.e, F.p
    red = F._moduli(rel)
    cs = [0] * e
    allz = True
    for i in range(e):
        m = red[i]
        c = coeffs[i] % m if m > 1 else 0
        cs[i] = c
        if c:
            allz = False
    if allz:
        return PAdicScalar(F, int(w) + rel, None, 0)
    delta = min(i + e * _vp(c, p) for i, c in enumerate(cs) if c)
    if delta:
        a, b = divmod(delta, e)
        M = -(-rel // e) + 2
        if b:
            cs = F._polymul(cs, F._pi_pow(e - b))
            cs = [c // p for c in cs]
            cs = F._polymul(cs, F._neg_ainv(M))
        for _ in range(a):
            cs = [c // p for c in cs]
            cs = F._polymul(cs, F._neg_ainv(M))
        w += delta
        rel -= delta
        red = F._moduli(rel)
        cs = [cs[i] % red[i] if red[i] > 1 else 0 for i in range(e)]
    return PAdicScalar(F, int(w), tuple(cs), rel)


class PAdicScalar:
    """One element of Q_p(zeta_p) at capped relative precision.

    Do not call the constructor directly; use the FieldConfig factory
    methods, which normalize.  Instances are immutable.
    """

    __slots__ = ("F", "vp", "unit", "rel")

    def __init__(self, F, vp, unit, rel):
        self.F = F
        self.vp = vp        # pi-adic valuation; INFINITY for exact zero
        self.unit = unit    # canonical tuple; () exact zero; None inexact
        self.rel = rel      # relative window in pi-units

    # -- classification ----------------------------------------------------

    @property
    def is_exact_zero(self):
        return self.unit == ()

    @property
    def is_zeroish(self):
        return self.unit is None

    @property
    def is_zerolike(self):
        """True when the element cannot be told apart from zero."""
        return self.unit == () or self.unit is None

    @property
    def abs_window(self):
        """Absolute precision: the element is known modulo pi^abs_window."""
        if self.is_exact_zero:
            return INFINITY
        if self.is_zeroish:
            return self.vp
        return self.vp + self.rel

    @property
    def guaranteed(self):
        """Remaining relative precision, floored to whole powers of p."""
        if self.is_exact_zero:
            return INFINITY
        if self.is_zeroish:
            return 0
        return self.rel // self.F.e

    def valuation(self):
        """Normalized valuation with v(p) = 1; INFINITY for exact zero."""
        if self.is_exact_zero:
            return INFINITY
        if self.is_zeroish:
            raise PrecisionExhausted(
                f"valuation unknown; only >= {Fraction(self.vp, self.F.e)}")
        return Fraction(self.vp, self.F.e)

    def valuation_lower(self):
        """A certified lower bound for the valuation, always available."""
        if self.is_exact_zero:
            return INFINITY
        return Fraction(self.vp, self.F.e)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if isinstance(other, PAdicScalar):
            if other.F is not self.F and other.F != self.F:
                raise ConfigMismatch("operands from different field configs")
            return other
        if isinstance(other, (int, Fraction)):
            return self.F.scalar(other)
        return None

    def __add__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        F = self.F
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        A = min(self.abs_window, other.abs_window)
        if self.is_zeroish or other.is_zeroish:
            live = other if self.is_zeroish else self
            if live.is_zeroish or live.vp >= A:
                return F.zeroish(min(A, live.abs_window if live.is_zeroish
                                     else A))
            return _make(F, live.vp, list(live.unit), A - live.vp)
        w0 = min(self.vp, other.vp)
        c1 = self.unit if self.vp == w0 else F._polymul(
            self.unit, F._pi_pow(self.vp - w0))
        c2 = other.unit if other.vp == w0 else F._polymul(
            other.unit, F._pi_pow(other.vp - w0))
        cs = [a + b for a, b in zip(c1, c2)]
        return _make(F, w0, cs, A - w0)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zerolike:
            return self
        F = self.F
        red = F._moduli(self.rel)
        cs = tuple((-c) % m if m > 1 else 0 for c, m in zip(self.unit, red))
        return PAdicScalar(F, self.vp, cs, self.rel)

    def __sub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        F = self.F
        if self.is_exact_zero or other.is_exact_zero:
            return F.zero()
        if self.is_zeroish or other.is_zeroish:
            return F.zeroish(self.vp + other.vp)
        cs = F._polymul(self.unit, other.unit)
        return _make(F, self.vp + other.vp, cs, min(self.rel, other.rel))

    __rmul__ = __mul__

    def inv(self):
        if self.is_exact_zero:
            raise ZeroDivisionError("inverse of exact zero")
        if self.is_zeroish:
            raise PrecisionExhausted(
                "inverse of an element indistinguishable from zero")
        F = self.F
        M = -(-self.rel // F.e) + 1
        iu = F._poly_inv(self.unit, M)
        return _make(F, -self.vp, list(iu), self.rel)

    def __truediv__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        out = self.F.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return (self - other).is_zerolike

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return eq
        return not eq

    __hash__ = None

    # -- analytic maps -----------------------------------------------------

    def exp(self):
        """p-adic exponential; needs v(x) > 1/(p-1)."""
        F = self.F
        if self.is_exact_zero:
            return F.one()
        if self.is_zeroish:
            if self.vp >= 2:
                return _make(F, 0, [1] + [0] * (F.e - 1), self.vp)
            raise PrecisionExhausted("cannot certify exp convergence domain")
        if self.vp < 2:
            raise DivergentSeries(
                f"exp needs v > 1/(p-1); got {self.valuation()}")
        A = self.abs_window
        res = F.one()
        term = F.one()
        k = 0
        while True:
            k += 1
            term = term * self / F.integer(k)
            if term.is_zerolike or term.vp >= A:
                break
            res = res + term
        return res

    def log(self):
        """p-adic logarithm; needs v(x - 1) > 0."""
        F = self.F
        z = self - F.one()
        if z.is_exact_zero:
            return F.zero()
        if z.is_zeroish:
            if z.vp >= 1:
                return F.zeroish(z.vp)
            raise PrecisionExhausted("cannot certify log convergence domain")
        if z.vp < 1:
            raise DivergentSeries(
                f"log needs v(x-1) > 0; got {z.valuation()} for x-1")
        A = z.abs_window
        w = z.vp
        e, p = F.e, F.p
        # past this index every term sits above the window
        K = 1
        while K < e + 2 or K * w - e * (math.log(K) / math.log(p)) < A:
            K += 1
        res = F.zero()
        zpow = F.one()
        for k in range(1, K + 1):
            zpow = zpow * z
            if zpow.is_zerolike:
                break
            term = zpow / F.integer(k)
            if k % 2 == 0:
                term = -term
            if not term.is_zerolike and term.vp < A:
                res = res + term
        return res

    # -- residue and serialization ----------------------------------------

    def residue(self):
        """Image in the residue field F_p; defined for integral elements."""
        if self.is_zerolike:
            if not self.is_exact_zero and self.vp < 1:
                raise PrecisionExhausted("residue below stored precision")
            return 0
        if self.vp < 0:
            raise ValueError("residue of a non-integral element")
        if self.vp > 0:
            return 0
        return self.unit[0] % self.F.p

    def to_json(self):
        if self.is_exact_zero:
            return {"val": "inf", "unit": [], "prec": "inf"}
        if self.is_zeroish:
            return {"val": None, "unit": None, "prec": self.vp}
        fr = Fraction(self.vp, self.F.e)
        return {"val": f"{fr.numerator}/{fr.denominator}",
                "unit": [str(c) for c in self.unit],
                "prec": self.rel}

    def __repr__(self):
        if self.is_exact_zero:
            return "0"
        if self.is_zeroish:
            return f"O(pi^{self.vp})"
        names = ["", "*pi"] + [f"*pi^{i}" for i in range(2, self.F.e)]
        parts = [f"{c}{names[i]}" for i, c in enumerate(self.unit) if c]
        body = " + ".join(parts) if parts else "0"
        return f"pi^{self.vp}*({body}) + O(pi^{self.vp + self.rel})"
