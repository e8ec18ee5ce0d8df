"""Exact arithmetic in cyclotomic fields.

Elements of Q(zeta_q) are stored as rational coefficient vectors on the power
basis 1, zeta, ..., zeta^(phi(q)-1), always reduced modulo the q-th cyclotomic
polynomial.  The representation is canonical, so equality and the zero test are
coefficient scans.  Rationals are `fractions.Fraction` throughout; no floating
point enters any decision path (floats appear only in the embedding helper used
for cross-checks).

Cosines of rational angles cos(2*pi*a/q) get a small symbolic wrapper
(`CosSymbol`) with an exact integer comparison rule, plus the embedding
(zeta^a + zeta^(q-a))/2 into the field.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

# Rational values: arbitrary precision, always reduced, positive denominator.
# Fraction guarantees all three invariants.
Rational = Fraction

_F0 = Fraction(0)

LT, EQ, GT = -1, 0, 1


def euler_phi(q: int) -> int:
    if q < 1:
        raise ValueError("conductor must be >= 1")
    result = q
    m = q
    d = 2
    while d * d <= m:
        if m % d == 0:
            while m % d == 0:
                m //= d
            result -= result // d
        d += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divmod_exact(num: list[int], den: list[int]) -> list[int]:
    """Quotient of an exact integer polynomial division (remainder must be 0)."""
    num = list(num)
    dn = len(den) - 1
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    quot = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        quot[i - dn] = c
        if c:
            for j, dj in enumerate(den):
                num[i - dn + j] -= c * dj
    if any(num[:dn]):
        raise ArithmeticError("non-exact polynomial division")
    return quot


@lru_cache(maxsize=None)
def cyclotomic_polynomial(q: int) -> tuple[int, ...]:
    """Coefficients (constant first) of Phi_q, by dividing x^q - 1 by all
    Phi_d over proper divisors d of q."""
    if q == 1:
        return (-1, 1)
    poly = [-1] + [0] * (q - 1) + [1]  # x^q - 1
    for d in range(1, q):
        if q % d == 0:
            poly = _poly_divmod_exact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _reduction_rows(q: int) -> tuple[tuple[int, ...], ...]:
    """x^e mod Phi_q for e = 0 .. max(q-1, 2*deg-2), as integer rows."""
    phi = cyclotomic_polynomial(q)
    deg = len(phi) - 1
    top = max(q - 1, 2 * deg - 2)
    rows: list[tuple[int, ...]] = []
    for e in range(deg):
        row = [0] * deg
        row[e] = 1
        rows.append(tuple(row))
    # x^deg = -(phi[0] + phi[1] x + ...)
    for e in range(deg, top + 1):
        prev = rows[e - 1]
        shifted = [0] + list(prev[:-1])
        lead = prev[-1]
        if lead:
            for j in range(deg):
                shifted[j] -= lead * phi[j]
        rows.append(tuple(shifted))
    return tuple(rows)


class CycloNumber:
    """An element of Q(zeta_q) in canonical reduced form."""

    __slots__ = ("q", "coeffs")

    def __init__(self, q: int, coeffs):
        deg = euler_phi(q)
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != deg:
            raise ValueError(f"need {deg} coefficients for conductor {q}, got {len(coeffs)}")
        self.q = q
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------

    @classmethod
    def _raw(cls, q: int, coeffs: tuple) -> "CycloNumber":
        """Internal constructor: coeffs already a correct-length tuple of Fractions."""
        self = object.__new__(cls)
        self.q = q
        self.coeffs = coeffs
        return self

    @staticmethod
    def zero(q: int) -> "CycloNumber":
        return CycloNumber._raw(q, (_F0,) * euler_phi(q))

    @staticmethod
    def one(q: int) -> "CycloNumber":
        return CycloNumber.from_rational(q, 1)

    @staticmethod
    def from_rational(q: int, r) -> "CycloNumber":
        deg = euler_phi(q)
        return CycloNumber._raw(q, (Fraction(r),) + (_F0,) * (deg - 1))

    @staticmethod
    @lru_cache(maxsize=65536)
    def root_of_unity(q: int, a: int) -> "CycloNumber":
        """zeta_q^a, reduced.  Instances are immutable and shared."""
        a %= q
        rows = _reduction_rows(q)
        return CycloNumber._raw(q, tuple(Fraction(x) for x in rows[a]))

    # -- ring operations ----------------------------------------------

    def _check(self, other: "CycloNumber") -> None:
        if self.q != other.q:
            raise ValueError(f"conductor mismatch: {self.q} != {other.q}")

    def __add__(self, other: "CycloNumber") -> "CycloNumber":
        self._check(other)
        return CycloNumber._raw(
            self.q, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "CycloNumber") -> "CycloNumber":
        self._check(other)
        return CycloNumber._raw(
            self.q, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CycloNumber":
        return CycloNumber._raw(self.q, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloNumber._raw(self.q, tuple(a * other for a in self.coeffs))
        self._check(other)
        deg = len(self.coeffs)
        conv = [_F0] * (2 * deg - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    conv[i + j] += a * b
        rows = _reduction_rows(self.q)
        out = list(conv[:deg])
        for e in range(deg, 2 * deg - 1):
            c = conv[e]
            if not c:
                continue
            row = rows[e]
            for j in range(deg):
                if row[j]:
                    out[j] += c * row[j]
        return CycloNumber._raw(self.q, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "CycloNumber":
        """Multiplicative inverse via the extended Euclidean algorithm against
        Phi_q (irreducible, so any nonzero element is a unit)."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_q)")
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.q)]
        a = list(self.coeffs)
        # extended gcd of a and phi in Q[x]; track s with s*a = gcd (mod phi)
        r0, r1 = phi, _trim(a)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while _degree(r1) >= 0:
            quot, rem = _poly_divmod_q(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quot, s1))
        if _degree(r0) != 0:
            raise ArithmeticError("element not invertible (gcd with Phi_q nontrivial)")
        inv_lead = 1 / r0[0]
        s0 = [c * inv_lead for c in s0]
        deg = euler_phi(self.q)
        out = [_F0] * deg
        rows = _reduction_rows(self.q)
        for e, c in enumerate(s0):
            if not c:
                continue
            for j in range(deg):
                if rows[e][j]:
                    out[j] += c * rows[e][j]
        return CycloNumber._raw(self.q, tuple(out))

    def __pow__(self, e: int) -> "CycloNumber":
        if e < 0:
            return self.inverse() ** (-e)
        result = CycloNumber.one(self.q)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CycloNumber)
            and self.q == other.q
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.q, self.coeffs))

    def embed(self) -> complex:
        """Float embedding with zeta_q = exp(2*pi*i/q)."""
        z = cmath.exp(2j * math.pi / self.q)
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + complex(c)
        return acc

    def __repr__(self):
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"CycloNumber(q={self.q}, {' + '.join(terms) or '0'})"


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p = p[:-1]
    return p or [Fraction(0)]


def _degree(p: list[Fraction]) -> int:
    p = _trim(p)
    if len(p) == 1 and p[0] == 0:
        return -1
    return len(p) - 1


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _trim(out)


def _poly_divmod_q(num, den):
    num = list(num)
    den = _trim(list(den))
    dn = _degree(den)
    quot = [Fraction(0)] * max(len(num) - dn, 1)
    lead = den[-1]
    for i in range(len(num) - 1, dn - 1, -1):
        if i - dn < 0:
            break
        c = num[i] / lead
        quot[i - dn] = c
        if c:
            for j, dj in enumerate(den):
                num[i - dn + j] -= c * dj
    return _trim(quot), _trim(num[:dn] if dn > 0 else [Fraction(0)])


# -- free-function aliases for the ring operations ----------------------


def cyclo_add(x: CycloNumber, y: CycloNumber) -> CycloNumber:
    return x + y


def cyclo_mul(x: CycloNumber, y: CycloNumber) -> CycloNumber:
    return x * y


def cyclo_neg(x: CycloNumber) -> CycloNumber:
    return -x


def cyclo_inverse(x: CycloNumber) -> CycloNumber:
    return x.inverse()


def is_zero(x: CycloNumber) -> bool:
    return x.is_zero()


# -- symbolic cosines ---------------------------------------------------


def dist_q(a: int, q: int) -> int:
    """Distance of the residue a to 0 mod q: min(a mod q, q - a mod q).
    cos(2*pi*a/q) is strictly decreasing in dist_q(a) on 0..floor(q/2)."""
    a %= q
    return min(a, q - a)


@dataclass(frozen=True)
class CosSymbol:
    """cos(2*pi*a/q), normalized so that 0 <= a <= q//2."""

    a: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("conductor must be >= 1")
        object.__setattr__(self, "a", dist_q(self.a, self.q))

    def value(self) -> float:
        return math.cos(2 * math.pi * self.a / self.q)


@lru_cache(maxsize=65536)
def _two_cos_cached(q: int, a: int) -> CycloNumber:
    """zeta^a + zeta^(-a) = 2 cos(2*pi*a/q); integer coefficients."""
    return CycloNumber.root_of_unity(q, a) + CycloNumber.root_of_unity(q, -a)


def two_cos_as_cyclo(c: CosSymbol) -> CycloNumber:
    return _two_cos_cached(c.q, c.a)


def cos_as_cyclo(c: CosSymbol) -> CycloNumber:
    """cos(2*pi*a/q) = (zeta^a + zeta^(q-a)) / 2 as an element of Q(zeta_q)."""
    return _two_cos_cached(c.q, c.a) * Fraction(1, 2)


def compare_cos(a: CosSymbol, b: CosSymbol) -> int:
    """Exact ordering of cos(2*pi*a/q) vs cos(2*pi*b/q).

    Returns GT/EQ/LT (+1/0/-1).  Uses the integer rule: the cosine is larger
    iff the residue is closer to 0 mod q.  No floating point.
    """
    if a.q != b.q:
        raise ValueError(f"conductor mismatch: {a.q} != {b.q}")
    da, db = dist_q(a.a, a.q), dist_q(b.a, b.q)
    if da < db:
        return GT
    if da > db:
        return LT
    return EQ


def cos_diff_exact(a: CosSymbol, b: CosSymbol) -> CycloNumber:
    """cos(2*pi*a/q) - cos(2*pi*b/q) in Q(zeta_q)."""
    if a.q != b.q:
        raise ValueError("conductor mismatch")
    return cos_as_cyclo(a) - cos_as_cyclo(b)


def abs_cos_diff_exact(a: CosSymbol, b: CosSymbol) -> CycloNumber:
    """|cos(2*pi*a/q) - cos(2*pi*b/q)| in Q(zeta_q).

    The absolute value is resolved symbolically by compare_cos; raises if the
    two cosines are equal (the callers need a nonzero factor).
    """
    order = compare_cos(a, b)
    if order == EQ:
        raise ArithmeticError("cosines are equal; absolute difference degenerates")
    diff = cos_diff_exact(a, b)
    return diff if order == GT else -diff


def two_abs_cos_diff_exact(a: CosSymbol, b: CosSymbol) -> CycloNumber:
    """2*|cos(2*pi*a/q) - cos(2*pi*b/q)|, with integer coefficients.

    This is the natural factor shape for the cancellation products; staying
    integral keeps the exact arithmetic cheap.
    """
    order = compare_cos(a, b)
    if order == EQ:
        raise ArithmeticError("cosines are equal; absolute difference degenerates")
    diff = two_cos_as_cyclo(a) - two_cos_as_cyclo(b)
    return diff if order == GT else -diff
