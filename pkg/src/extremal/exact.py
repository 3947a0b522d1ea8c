"""Exact rationals, rational intervals and continued fraction extraction.

Integers are Python ints and rationals are :class:`fractions.Fraction`
values; nothing in this module ever rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def floor_div(x: Fraction) -> int:
    return x.numerator // x.denominator


def rational_cf(r, alternate: bool = False) -> list[int]:
    """Partial quotients of ``r``.

    The canonical expansion ends with a quotient >= 2 unless it has a
    single term.  With ``alternate=True`` the other expansion (one term
    longer or shorter) is returned instead.
    """
    r = as_fraction(r)
    p, q = r.numerator, r.denominator
    quotients = []
    while True:
        a, rem = divmod(p, q)
        quotients.append(a)
        if rem == 0:
            break
        p, q = q, rem
    if not alternate:
        return quotients
    return quotients[:-1] + [quotients[-1] - 1, 1]


def cf_value(quotients: Sequence[int]) -> Fraction:
    """Fold ``[a0, a1, ..., as]`` back into a rational."""
    if not quotients:
        raise ValueError("empty continued fraction")
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        if value == 0:
            raise ZeroDivisionError("continued fraction hits 1/0")
        value = a + 1 / value
    return value


def convergents(quotients: Iterable[int]):
    """Yield ``(p_k, q_k)`` for the convergents of ``[a0, a1, ...]``."""
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield p, q


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> RationalInterval:
        return cls(x, x)

    @classmethod
    def spanning(cls, *values) -> RationalInterval:
        values = [as_fraction(v) for v in values]
        return cls(min(values), max(values))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def issubset(self, other: RationalInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersects(self, other: RationalInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        other = _coerce(other)
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        products = [self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi]
        return RationalInterval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> RationalInterval:
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"reciprocal of {self} contains a pole")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return _coerce(other) * self.reciprocal()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RationalInterval(0, max(-self.lo, self.hi))

    def max_with(self, other: RationalInterval) -> RationalInterval:
        return RationalInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def outward(self, den: int = 10 ** 12) -> RationalInterval:
        """Smallest enclosing interval with endpoints on the grid ``1/den``."""
        lo = Fraction(floor_div(self.lo * den), den)
        hi = Fraction(-floor_div(-self.hi * den), den)
        return RationalInterval(lo, hi)

    def to_json(self) -> list[str]:
        return [format_rational(self.lo), format_rational(self.hi)]

    @classmethod
    def from_json(cls, data) -> RationalInterval:
        lo, hi = data
        return cls(as_fraction(lo), as_fraction(hi))

    def __str__(self):
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


def _coerce(x) -> RationalInterval:
    if isinstance(x, RationalInterval):
        return x
    return RationalInterval.point(as_fraction(x))


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def interval_cf_extract(interval: RationalInterval, max_terms: int):
    """Certified leading partial quotients shared by every point of ``interval``.

    Returns ``(quotients, residual)`` where ``residual`` encloses the
    complete quotient left after the emitted terms, i.e. every x in the
    interval equals ``[q0, ..., q_{k-1}, t]`` for some t in ``residual``.
    ``residual`` is None when the interval is a point whose expansion was
    exhausted.  Extraction halts without emitting at any endpoint that is
    exactly an integer.
    """
    lo, hi = interval.lo, interval.hi
    quotients: list[int] = []
    while len(quotients) < max_terms:
        if lo == hi:
            tail = rational_cf(lo)
            room = max_terms - len(quotients)
            quotients.extend(tail[:room])
            if len(tail) <= room:
                return quotients, None
            rest = cf_value(tail[room:])
            return quotients, RationalInterval.point(rest)
        a = floor_div(lo)
        if a != floor_div(hi) or lo == a:
            break
        quotients.append(a)
        lo, hi = 1 / (hi - a), 1 / (lo - a)
    return quotients, RationalInterval(lo, hi)


def integer_root_bounds(n: int, k: int) -> tuple[int, int]:
    """Return ``(r, R)`` with ``r <= n**(1/k) <= R`` and ``R - r <= 1``."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if n < 2:
        return n, n
    # Newton iteration from an overestimate
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    r = x
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r, r if r ** k == n else r + 1


def isqrt_exact(n: int):
    """Integer square root of ``n`` if ``n`` is a perfect square, else None."""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None
