"""Arithmetic in GF(2^w) and polynomials over it.

Field elements are ints whose bit ``j`` is the coefficient of ``x^j`` in the
polynomial basis.  Polynomials over a field are :class:`FieldPoly` values with
coefficients stored low degree first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

# Lexicographically least irreducible polynomial of each degree over GF(2).
IRREDUCIBLE_MODULI = {
    1: 0x2, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1002B, 17: 0x20009, 18: 0x40009, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x100001B,
    25: 0x2000009, 26: 0x400001B, 27: 0x8000027, 28: 0x10000003,
    29: 0x20000005, 30: 0x40000003, 31: 0x80000009, 32: 0x10000008D,
}

NEG_INF = -math.inf


# ---------------------------------------------------------------------------
# GF(2)[x] with polynomials packed into ints


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2_poly_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def gf2_poly_divmod(a: int, m: int) -> tuple[int, int]:
    if m == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = 0
    dm = m.bit_length()
    while a.bit_length() >= dm:
        shift = a.bit_length() - dm
        q |= 1 << shift
        a ^= m << shift
    return q, a


def gf2_poly_mulmod(a: int, b: int, m: int) -> int:
    return gf2_poly_mod(clmul(a, b), m)


def gf2_poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, gf2_poly_mod(a, b)
    return a


def is_irreducible_gf2(f: int) -> bool:
    """Ben-Or test: ``f`` has no factor of degree ``i`` for ``i <= deg/2``.

    Each ``gcd(f, x^(2^i) - x)`` collects every irreducible factor of degree
    dividing ``i``, so this is an exhaustive factor test.
    """
    w = f.bit_length() - 1
    if w < 1:
        return False
    t = 2
    for _ in range(w // 2):
        t = gf2_poly_mulmod(t, t, f)
        if gf2_poly_gcd(f, t ^ 2) != 1:
            return False
    return True


def _verify_table() -> None:
    for w, f in IRREDUCIBLE_MODULI.items():
        if f.bit_length() - 1 != w or not is_irreducible_gf2(f):
            raise RuntimeError(f"modulus table entry for degree {w} is not irreducible")


_verify_table()


# ---------------------------------------------------------------------------
# GF(2^w)


@dataclass(frozen=True)
class ExtField:
    w: int
    modulus: int

    def __post_init__(self):
        if self.modulus.bit_length() - 1 != self.w:
            raise ValueError(f"modulus {self.modulus:#x} does not have degree {self.w}")
        if self.w <= 32 and not is_irreducible_gf2(self.modulus):
            raise ValueError(f"modulus {self.modulus:#x} is reducible")

    @classmethod
    def standard(cls, w: int) -> "ExtField":
        return cls(w, IRREDUCIBLE_MODULI[w])

    @property
    def order(self) -> int:
        return 1 << self.w

    def elements(self) -> range:
        return range(self.order)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        out = 0
        top = 1 << self.w
        mod = self.modulus
        while b:
            if b & 1:
                out ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= mod
        return out

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full multiplication table; only sensible for small ``w``."""
        if self.w > 12:
            raise ValueError("multiplication table too large")
        q = self.order
        tab = np.zeros((q, q), dtype=np.uint16 if self.w > 8 else np.uint8)
        for a in range(q):
            for b in range(a, q):
                tab[a, b] = tab[b, a] = self.mul(a, b)
        return tab

    @cached_property
    def inv_table(self) -> np.ndarray:
        tab = np.zeros(self.order, dtype=np.int64)
        for a in range(1, self.order):
            tab[a] = self.inv(a)
        return tab

    def mul_matrix(self, alpha: int) -> list[int]:
        """Columns of the GF(2)-linear map ``x -> alpha * x``."""
        return [self.mul(alpha, 1 << j) for j in range(self.w)]

    def to_hex(self, a: int) -> str:
        return format(a, "x")


# ---------------------------------------------------------------------------
# Polynomials over GF(2^w)


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class FieldPoly:
    field: ExtField
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        q = self.field.order
        if any(c < 0 or c >= q for c in self.coeffs):
            raise ValueError("coefficient outside the field")

    @classmethod
    def constant(cls, field: ExtField, c: int) -> "FieldPoly":
        return cls(field, (c,))

    @classmethod
    def x(cls, field: ExtField) -> "FieldPoly":
        return cls(field, (0, 1))

    @classmethod
    def zero(cls, field: ExtField) -> "FieldPoly":
        return cls(field, ())

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def _same(self, other: "FieldPoly") -> None:
        if other.field != self.field:
            raise ValueError("polynomials over different fields")

    def __add__(self, other: "FieldPoly") -> "FieldPoly":
        self._same(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] ^= c
        return FieldPoly(self.field, tuple(out))

    __sub__ = __add__

    def __mul__(self, other: "FieldPoly") -> "FieldPoly":
        self._same(other)
        if self.is_zero() or other.is_zero():
            return FieldPoly.zero(self.field)
        f = self.field
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] ^= f.mul(a, b)
        return FieldPoly(f, tuple(out))

    def scale(self, c: int) -> "FieldPoly":
        return FieldPoly(self.field, tuple(self.field.mul(c, a) for a in self.coeffs))

    def divmod(self, other: "FieldPoly") -> tuple["FieldPoly", "FieldPoly"]:
        self._same(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        rem = list(self.coeffs)
        db = len(other.coeffs) - 1
        inv_lead = f.inv(other.lead())
        quot = [0] * max(0, len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            factor = f.mul(c, inv_lead)
            quot[i - db] = factor
            for j, b in enumerate(other.coeffs):
                rem[i - db + j] ^= f.mul(factor, b)
        return FieldPoly(f, tuple(quot)), FieldPoly(f, tuple(rem[:db]))

    def __mod__(self, other: "FieldPoly") -> "FieldPoly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "FieldPoly") -> "FieldPoly":
        return self.divmod(other)[0]

    def monic(self) -> "FieldPoly":
        if self.is_zero():
            return self
        return self.scale(self.field.inv(self.lead()))

    def __call__(self, z: int) -> int:
        """Horner evaluation at ``z``."""
        f = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = f.mul(acc, z) ^ c
        return acc

    def __repr__(self) -> str:
        return f"FieldPoly(GF(2^{self.field.w}), {[hex(c) for c in self.coeffs]})"


def poly_gcd(a: FieldPoly, b: FieldPoly) -> FieldPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_powmod(base: FieldPoly, e: int, modulus: FieldPoly) -> FieldPoly:
    """``base**e mod modulus`` by square-and-multiply, reducing every step."""
    if modulus.is_zero():
        raise ZeroDivisionError("zero modulus")
    if e < 0:
        raise ValueError("negative exponent")
    f = base.field
    result = FieldPoly.constant(f, 1) % modulus
    b = base % modulus
    while e:
        if e & 1:
            result = (result * b) % modulus
        e >>= 1
        if e:
            b = (b * b) % modulus
    return result


def is_irreducible(g: FieldPoly) -> bool:
    """Ben-Or irreducibility test over GF(q), ``q = 2^w``."""
    n = g.degree
    if n < 1:
        return False
    if n == 1:
        return True
    g = g.monic()
    x = FieldPoly.x(g.field)
    q = g.field.order
    t = x
    for _ in range(int(n) // 2):
        t = poly_powmod(t, q, g)
        if poly_gcd(g, t - x).degree > 0:
            return False
    return True


def lift_gf2_poly(field: ExtField, f: int) -> FieldPoly:
    """View a GF(2) polynomial (packed int) as a polynomial over ``field``."""
    return FieldPoly(field, tuple((f >> i) & 1 for i in range(f.bit_length())))


def standard_irreducible(field: ExtField, degree: int) -> FieldPoly:
    """Deterministic irreducible of the given degree over ``field``.

    The GF(2) table modulus is used when it stays irreducible over ``field``
    (always the case when ``gcd(degree, w) == 1``); otherwise the search
    falls through to monic polynomials in increasing coefficient order.
    """
    g = lift_gf2_poly(field, IRREDUCIBLE_MODULI[degree])
    if is_irreducible(g):
        return g
    q = field.order
    for idx in range(q**degree):
        coeffs = [(idx // q**i) % q for i in range(degree)] + [1]
        cand = FieldPoly(field, tuple(coeffs))
        if is_irreducible(cand):
            return cand
    raise RuntimeError("no irreducible polynomial found")  # unreachable
