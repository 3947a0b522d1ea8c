"""2x2 integer matrices and the group of primitive non-singular matrices.

The group operation is ``A * B = (AB)^red``: multiply, then divide by
the content.  Results of group operations are sign normalized so that
the first non-zero entry (in the order a, b, c, d) is positive; pass
``canonical=False`` to keep the raw reduced product instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .exact import as_fraction


class NotInGroupError(ValueError):
    """Raised for matrices outside the group (singular or zero)."""


class NonPrimitiveWarning(UserWarning):
    """A non-primitive matrix was reduced before a group operation."""


@dataclass(frozen=True)
class Mat2Z:
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, rows) -> Mat2Z:
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> Mat2Z:
        return cls(1, 0, 0, 1)

    @property
    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def __matmul__(self, other: Mat2Z) -> Mat2Z:
        return Mat2Z(self.a * other.a + self.b * other.c,
                     self.a * other.b + self.b * other.d,
                     self.c * other.a + self.d * other.c,
                     self.c * other.b + self.d * other.d)

    def __neg__(self) -> Mat2Z:
        return Mat2Z(-self.a, -self.b, -self.c, -self.d)

    def scale(self, k: int) -> Mat2Z:
        return Mat2Z(k * self.a, k * self.b, k * self.c, k * self.d)

    def __pow__(self, n: int) -> Mat2Z:
        if n < 0:
            raise ValueError("negative powers are not integral")
        result, base = Mat2Z.identity(), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_json(self) -> dict:
        return {"rows": [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]}

    @classmethod
    def from_json(cls, data) -> Mat2Z:
        rows = data["rows"] if isinstance(data, dict) else data
        return cls.of(rows)

    def __str__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def det(A: Mat2Z) -> int:
    return A.a * A.d - A.b * A.c


def norm(A) -> int:
    """Largest absolute value of the coefficients."""
    return max(abs(x) for x in A.entries)


def transpose(A: Mat2Z) -> Mat2Z:
    return Mat2Z(A.a, A.c, A.b, A.d)


def adjugate(A: Mat2Z) -> Mat2Z:
    return Mat2Z(A.d, -A.b, -A.c, A.a)


def trace(A: Mat2Z) -> int:
    return A.a + A.d


def is_symmetric(A: Mat2Z) -> bool:
    return A.b == A.c


def is_skew_symmetric(A: Mat2Z) -> bool:
    return A.a == 0 and A.d == 0 and A.b == -A.c


def content(A: Mat2Z) -> int:
    if A.is_zero():
        raise NotInGroupError("zero matrix has no content")
    return math.gcd(*A.entries)


def reduce(A: Mat2Z) -> Mat2Z:
    """The primitive matrix ``A / content(A)`` (sign untouched)."""
    g = content(A)
    if g == 1:
        return A
    return Mat2Z(A.a // g, A.b // g, A.c // g, A.d // g)


def canonical_sign(A: Mat2Z) -> Mat2Z:
    """The one of ``A``, ``-A`` whose first non-zero entry is positive."""
    for x in A.entries:
        if x:
            return A if x > 0 else -A
    return A


def same_up_to_sign(A: Mat2Z, B: Mat2Z) -> bool:
    return A == B or A == -B


def is_primitive(A: Mat2Z) -> bool:
    return not A.is_zero() and content(A) == 1


def in_P(A: Mat2Z) -> bool:
    return not A.is_zero() and det(A) != 0 and content(A) == 1


def _group_operand(A: Mat2Z, name: str) -> Mat2Z:
    if A.is_zero() or det(A) == 0:
        raise NotInGroupError(f"{name}={A} is not in the group (singular)")
    if content(A) != 1:
        warnings.warn(f"{name}={A} is not primitive; reduced first",
                      NonPrimitiveWarning, stacklevel=3)
        return reduce(A)
    return A


def star(A: Mat2Z, B: Mat2Z, canonical: bool = True) -> Mat2Z:
    """Group product ``(AB)^red``."""
    A = _group_operand(A, "A")
    B = _group_operand(B, "B")
    product = reduce(A @ B)
    return canonical_sign(product) if canonical else product


def star_all(matrices: Iterable[Mat2Z], canonical: bool = True) -> Mat2Z:
    result = Mat2Z.identity()
    for M in matrices:
        result = star(result, M, canonical=canonical)
    return result


def inverse_in_P(A: Mat2Z, canonical: bool = True) -> Mat2Z:
    A = _group_operand(A, "A")
    inv = reduce(adjugate(A))
    return canonical_sign(inv) if canonical else inv


def conjugate(A: Mat2Z, W: Mat2Z, canonical: bool = True) -> Mat2Z:
    """``A^{-1} * W * A`` in the group."""
    inv = inverse_in_P(A, canonical=False)
    return star(star(inv, W, canonical=False), A, canonical=canonical)


def positive_representative(A: Mat2Z, strict: bool = True):
    """Return whichever of ``A``, ``-A`` has all entries positive.

    With ``strict=False`` non-negative entries suffice.  Returns None if
    neither sign works.
    """
    for M in (A, -A):
        if strict and all(x > 0 for x in M.entries):
            return M
        if not strict and all(x >= 0 for x in M.entries):
            return M
    return None


# --- cones -------------------------------------------------------------

def in_S1(A) -> bool:
    """``a >= max(b, c)`` and ``min(b, c) >= d >= 0`` (real entries allowed)."""
    a, b, c, d = A.entries
    return a >= max(b, c) and min(b, c) >= d >= 0


def in_S(A: Mat2Z) -> bool:
    return in_S1(A) and abs(det(A)) == 1


@dataclass(frozen=True)
class ConeParams:
    r: Fraction

    def __post_init__(self):
        r = as_fraction(self.r)
        if not 0 < r <= 1:
            raise ValueError(f"cone parameter must satisfy 0 < r <= 1, got {r}")
        object.__setattr__(self, "r", r)


def in_Sr(A, p) -> bool:
    """Positive entries, each row-one entry >= r times the row-two entry
    below it, and each column-one entry >= r times the column-two entry."""
    r = p.r if isinstance(p, ConeParams) else ConeParams(p).r
    a, b, c, d = A.entries
    if min(a, b, c, d) <= 0:
        return False
    return a >= r * c and b >= r * d and a >= r * b and c >= r * d


class RealMat2:
    """Minimal 2x2 matrix over Fractions, for cone tests with real entries."""

    def __init__(self, a, b, c, d):
        self.entries = tuple(as_fraction(x) for x in (a, b, c, d))

    def __matmul__(self, other):
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return RealMat2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def transpose(self):
        a, b, c, d = self.entries
        return RealMat2(a, c, b, d)

    def __eq__(self, other):
        return isinstance(other, RealMat2) and self.entries == other.entries

    def __repr__(self):
        return f"RealMat2{tuple(str(x) for x in self.entries)}"
