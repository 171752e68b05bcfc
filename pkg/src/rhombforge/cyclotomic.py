"""Exact arithmetic in the cyclotomic integers Z[zeta] with zeta = exp(2*pi*i/order).

The engine always uses ``order = 4n`` so that every edge direction of a
rhomb tiling with n-fold symmetry, integer or half-integer multiple of
pi/n, is a power of the same root: the unit vector at angle h*pi/(2n) is
``zeta**h``.  Points in the plane are stored as complex elements of the
ring; lengths, areas and eigenvalues are real elements.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import mpmath


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a ring operation."""


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    # b monic (leading coefficient +-1), exact division expected
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] // b[-1]
        q[i - db] = c
        if c:
            for j, y in enumerate(b):
                a[i - db + j] -= c * y
    if any(a[:db]):
        raise ArithmeticError("inexact polynomial division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients (constant term first) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise DomainError(f"cyclotomic order must be positive, got {m}")
    num = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


class _Ring:
    """Per-order tables: the modulus and the reduced form of every zeta power."""

    def __init__(self, order: int) -> None:
        self.order = order
        self.phi = cyclotomic_poly(order)
        self.degree = len(self.phi) - 1
        self.powers = [self._reduce_raw([0] * k + [1]) for k in range(order)]
        zeta = cmath.exp(2j * math.pi / order)
        self.zeta_float = [zeta**k for k in range(self.degree)]

    def _reduce_raw(self, v: list[int]) -> tuple[int, ...]:
        d = self.degree
        phi = self.phi
        v = list(v)
        for i in range(len(v) - 1, d - 1, -1):
            c = v[i]
            if c:
                base = i - d
                for j in range(d):
                    if phi[j]:
                        v[base + j] -= c * phi[j]
                v[i] = 0
        v = v[:d]
        v.extend([0] * (d - len(v)))
        return tuple(v)

    def reduce(self, v: list[int]) -> tuple[int, ...]:
        n = self.order
        if len(v) > n:
            folded = [0] * n
            for i, c in enumerate(v):
                folded[i % n] += c
            v = folded
        return self._reduce_raw(v)


@lru_cache(maxsize=None)
def _ring(order: int) -> _Ring:
    return _Ring(order)


class CycloInt:
    """An element of Z[zeta_order] in canonical reduced form.

    ``coeffs[i]`` is the coefficient of ``zeta**i`` for ``i < phi(order)``.
    Instances are immutable and hashable; equality is exact.
    """

    __slots__ = ("_order", "_coeffs", "_hash")

    def __init__(self, order: int, coeffs: Iterable[int] = ()) -> None:
        if order < 1:
            raise DomainError(f"order must be positive, got {order}")
        ring = _ring(order)
        self._order = order
        self._coeffs = ring.reduce([int(c) for c in coeffs])
        self._hash: int | None = None

    @classmethod
    def _raw(cls, order: int, coeffs: tuple[int, ...]) -> CycloInt:
        obj = object.__new__(cls)
        obj._order = order
        obj._coeffs = coeffs
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, order: int) -> CycloInt:
        return cls._raw(order, (0,) * _ring(order).degree)

    @classmethod
    def one(cls, order: int) -> CycloInt:
        return cls.from_int(order, 1)

    @classmethod
    def from_int(cls, order: int, value: int) -> CycloInt:
        d = _ring(order).degree
        return cls._raw(order, (int(value),) + (0,) * (d - 1))

    @classmethod
    def zeta(cls, order: int, power: int = 1) -> CycloInt:
        """``zeta**power``; negative powers are allowed since zeta is a unit."""
        return cls._raw(order, _ring(order).powers[power % order])

    @classmethod
    def from_powers(cls, order: int, terms: Mapping[int, int]) -> CycloInt:
        """Sum of ``coeff * zeta**power`` over the mapping."""
        v = [0] * order
        for p, c in terms.items():
            v[p % order] += c
        return cls(order, v)

    @property
    def order(self) -> int:
        return self._order

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self._coeffs

    def is_zero(self) -> bool:
        return not any(self._coeffs)

    def __repr__(self) -> str:
        return f"CycloInt({self._order}, {list(self._coeffs)})"

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self._coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "z" if i == 1 else f"z^{i}"
                terms.append(mono if c == 1 else ("-" + mono if c == -1 else f"{c}*{mono}"))
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CycloInt):
            return self._order == other._order and self._coeffs == other._coeffs
        if isinstance(other, int):
            return self._coeffs[0] == other and not any(self._coeffs[1:])
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._order, self._coeffs))
        return self._hash

    def _coerce(self, other: object) -> CycloInt | None:
        if isinstance(other, CycloInt):
            if other._order != self._order:
                raise DomainError(f"ring orders differ: {self._order} vs {other._order}")
            return other
        if isinstance(other, int):
            return CycloInt.from_int(self._order, other)
        return None

    def __add__(self, other: object) -> CycloInt:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloInt._raw(self._order, tuple(a + b for a, b in zip(self._coeffs, o._coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CycloInt:
        return CycloInt._raw(self._order, tuple(-a for a in self._coeffs))

    def __sub__(self, other: object) -> CycloInt:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloInt._raw(self._order, tuple(a - b for a, b in zip(self._coeffs, o._coeffs)))

    def __rsub__(self, other: object) -> CycloInt:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: object) -> CycloInt:
        if isinstance(other, int):
            return CycloInt._raw(self._order, tuple(a * other for a in self._coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloInt._raw(self._order, _ring(self._order).reduce(_poly_mul(list(self._coeffs), list(o._coeffs))))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> CycloInt:
        if exponent < 0:
            raise DomainError("negative powers are not supported")
        result = CycloInt.one(self._order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shift(self, power: int) -> CycloInt:
        """Multiply by ``zeta**power`` (a rotation when the element is a point)."""
        n = self._order
        v = [0] * n
        for i, c in enumerate(self._coeffs):
            if c:
                v[(i + power) % n] += c
        return CycloInt._raw(n, _ring(n).reduce(v))

    def galois(self, j: int) -> CycloInt:
        """Apply the automorphism zeta -> zeta**j."""
        n = self._order
        if math.gcd(j, n) != 1:
            raise DomainError(f"j={j} is not coprime to the ring order {n}")
        v = [0] * n
        for i, c in enumerate(self._coeffs):
            if c:
                v[(i * j) % n] += c
        return CycloInt._raw(n, _ring(n).reduce(v))

    def conjugate(self) -> CycloInt:
        """Complex conjugate, i.e. ``galois(-1)``."""
        return self.galois(-1)

    def is_real(self) -> bool:
        return self == self.conjugate()

    def lift(self, order: int) -> CycloInt:
        """Embed into the ring of a multiple ``order`` of the current order."""
        if order % self._order:
            raise DomainError(f"{order} is not a multiple of {self._order}")
        step = order // self._order
        return CycloInt.from_powers(order, {i * step: c for i, c in enumerate(self._coeffs) if c})

    def complex_value(self) -> complex:
        zf = _ring(self._order).zeta_float
        return sum((c * z for c, z in zip(self._coeffs, zf) if c), 0j)

    def real_value(self) -> float:
        return self.complex_value().real

    def mp_value(self, dps: int = 50) -> mpmath.mpc:
        with mpmath.workdps(dps):
            zeta = mpmath.expjpi(mpmath.mpf(2) / self._order)
            return mpmath.fsum(c * zeta**i for i, c in enumerate(self._coeffs) if c)

    def sign(self) -> int:
        """Sign of a real element, decided exactly for zero and by high precision otherwise."""
        if self.is_zero():
            return 0
        v = self.real_value()
        if abs(v) > 1e-9:
            return 1 if v > 0 else -1
        dps = 50
        while True:
            x = self.mp_value(dps).real
            if abs(x) > mpmath.mpf(10) ** (-(dps - 10)):
                return 1 if x > 0 else -1
            dps *= 2

    def to_json(self) -> list[int]:
        return list(self._coeffs)

    @classmethod
    def from_json(cls, order: int, coeffs: list[int]) -> CycloInt:
        return cls(order, coeffs)


def _half_units(k: object) -> int:
    h = Fraction(k) * 2  # type: ignore[arg-type]
    if h.denominator != 1:
        raise DomainError(f"index {k} is not a multiple of 1/2")
    return int(h)


def make_cos_combo(n: int, c: Mapping[object, int]) -> CycloInt:
    """Build ``c[0] + sum_k 2*c[k]*cos(k*pi/n)`` in the ring of order 4n.

    Keys are angle fractions k (int, Fraction, float or "p/q" strings) with
    ``0 <= k <= n`` and 2k integral.
    """
    if n < 3:
        raise DomainError(f"symmetry order must be >= 3, got {n}")
    order = 4 * n
    terms: dict[int, int] = {}
    for k, coeff in c.items():
        h = _half_units(k)
        if not 0 <= h <= 2 * n:
            raise DomainError(f"index {k} outside [0, {n}]")
        if h == 0:
            terms[0] = terms.get(0, 0) + coeff
        else:
            terms[h] = terms.get(h, 0) + coeff
            terms[-h % order] = terms.get(-h % order, 0) + coeff
    return CycloInt.from_powers(order, terms)


def galois_conjugate(x: CycloInt, j: int) -> CycloInt:
    return x.galois(j)


def real_value(x: CycloInt) -> float:
    return x.real_value()


def unit(n: int, h: int) -> CycloInt:
    """Unit vector at angle ``h * pi / (2n)``."""
    return CycloInt.zeta(4 * n, h)
