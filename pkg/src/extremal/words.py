"""Fibonacci words, the atom map to GL2(Z) and the factorization of
GL2(Z) matrices into atoms ``[[a, 1], [1, 0]]``.

Words over the abstract alphabet are ``str`` over ``"ab"``; words over
positive integers are tuples of ints.  Both concatenate with ``+``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Sequence, Union

from .exact import cf_value, rational_cf
from .mat2 import Mat2Z, det, in_S

Word = Union[str, tuple]


def atom(a: int) -> Mat2Z:
    return Mat2Z(a, 1, 1, 0)


class FibWordSeq:
    """The sequence ``w_{i+2} = w_{i+1} w_i`` started from ``w1``, ``w2``."""

    def __init__(self, w1: Word, w2: Word):
        if type(w1) is not type(w2):
            raise TypeError("w1 and w2 must be words of the same kind")
        if isinstance(w1, tuple) and any(x < 1 for x in w1 + w2):
            raise ValueError("integer words take letters >= 1")
        self._terms = [w1, w2]

    @property
    def w1(self) -> Word:
        return self._terms[0]

    @property
    def w2(self) -> Word:
        return self._terms[1]

    def term(self, k: int) -> Word:
        if k < 1:
            raise ValueError("terms are indexed from 1")
        while len(self._terms) < k:
            self._terms.append(self._terms[-1] + self._terms[-2])
        return self._terms[k - 1]

    def length(self, k: int) -> int:
        """``|w_k|`` without building the word."""
        if k < 1:
            raise ValueError("terms are indexed from 1")
        x, y = len(self.w1), len(self.w2)
        if k == 1:
            return x
        for _ in range(k - 2):
            x, y = y, x + y
        return y

    def limit_prefix(self, n: int) -> Word:
        """First ``n`` letters of the limit word."""
        if n == 0:
            return self.w1[:0]
        if not self.w1 and not self.w2:
            raise ValueError("both generators are empty; the limit is empty")
        k = 2
        while self.length(k) < n:
            k += 1
        return self.term(k)[:n]


def fib_word(seq: FibWordSeq, k: int) -> Word:
    return seq.term(k)


_STANDARD = FibWordSeq("b", "a")


def standard_word(k: int) -> str:
    """``w_k`` for the generic sequence ``w1 = b``, ``w2 = a``."""
    return _STANDARD.term(k)


def standard_length(k: int) -> int:
    return _STANDARD.length(k)


def fib_prefix(n: int) -> str:
    """Length-``n`` prefix of the infinite Fibonacci word ``abaababa...``."""
    if n < 0:
        raise ValueError("negative length")
    return _STANDARD.limit_prefix(n)


def iter_fib_letters() -> Iterator[str]:
    """Stream the letters of ``abaababa...`` one at a time."""
    k, emitted = 2, 0
    while True:
        word = standard_word(k)
        yield from word[emitted:]
        emitted = len(word)
        k += 1


def substitute(word: str, w1: Word, w2: Word) -> Word:
    """Replace ``a`` by ``w2`` and ``b`` by ``w1``."""
    out = w1[:0]
    for letter in word:
        out = out + (w2 if letter == "a" else w1)
    return out


def words_commute(u: Word, v: Word) -> bool:
    return u + v == v + u


# --- atoms and the factorization lemma ----------------------------------

def sigma(w: Sequence[int]) -> Mat2Z:
    """Product of the atoms of the letters of ``w`` (identity when empty)."""
    result = Mat2Z.identity()
    for a in w:
        if a < 1:
            raise ValueError(f"letter {a} is not a positive integer")
        result = result @ atom(a)
    return result


def atoms_product(quotients: Sequence[int]) -> Mat2Z:
    result = Mat2Z.identity()
    for a in quotients:
        result = result @ atom(a)
    return result


def factor_gl2(A: Mat2Z) -> list[int]:
    """The unique ``[a0, ..., as]`` (``s >= 1``, ``a1..a_{s-1} >= 1``) whose
    atom product is ``A``.  Requires ``|det A| = 1`` and ``d >= 1``."""
    if A.d < 1:
        raise ValueError(f"factor_gl2 needs d >= 1, got {A}")
    D = det(A)
    if abs(D) != 1:
        raise ValueError(f"factor_gl2 needs |det| = 1, got det {D}")
    # c/d = [as, ..., a1] with s of the parity fixed by det = (-1)^(s+1)
    tail = rational_cf(Fraction(A.c, A.d))
    if (-1) ** (len(tail) + 1) != D:
        tail = rational_cf(Fraction(A.c, A.d), alternate=True)
    a_rest = tail[::-1]          # a1, ..., as
    s = len(a_rest)
    inner = 1 / cf_value(a_rest[:s - 1]) if s > 1 else Fraction(0)
    a0 = round(Fraction(A.b, A.d) - inner)
    quotients = [a0] + a_rest
    if atoms_product(quotients) != A:
        raise ArithmeticError(f"factorization of {A} failed to reconstruct")
    return quotients


def factor_characterization(A: Mat2Z, quotients: Sequence[int]) -> bool:
    """Check ``b/d = [a0..a_{s-1}]``, ``c/d = [as..a1]``, ``det = (-1)^(s+1)``."""
    s = len(quotients) - 1
    if s < 1 or any(a < 1 for a in quotients[1:s]):
        return False
    return (Fraction(A.b, A.d) == cf_value(quotients[:s])
            and Fraction(A.c, A.d) == cf_value(quotients[:0:-1])
            and det(A) == (-1) ** (s + 1))


def sigma_inverse(A: Mat2Z) -> tuple:
    """The positive-integer word mapped to ``A`` by :func:`sigma`."""
    if A == Mat2Z.identity():
        return ()
    if not in_S(A):
        raise ValueError(f"{A} is not in S")
    if A.d == 0:
        # a >= b = c = 1
        return (A.a,)
    if A.d == 1 and det(A) == -1:
        return (A.b - 1, 1, A.c - 1)
    word = tuple(factor_gl2(A))
    if any(a < 1 for a in word):
        raise ArithmeticError(f"non-positive letter while inverting {A}")
    return word


# --- prefix decomposition ------------------------------------------------

class DecompositionError(ValueError):
    """No decomposition with all indices >= ell exists for this split."""


def fib_prefix_decomposition(k: int, split: int, ell: int):
    """Write ``w_k = uv`` (``|u| = split``) as ``u = w_{i1}...w_{is} u0`` and
    ``u0 v = w_{jt}...w_{j1}`` with ``u0`` a prefix of ``w_ell`` and both
    index lists strictly decreasing and ``>= ell``.

    Returns ``(i_indices, u0, j_indices)`` with ``i_indices = (i1, ..., is)``
    and ``j_indices = (j1, ..., jt)``.  Words are those of the generic
    sequence ``w1 = b``, ``w2 = a``.
    """
    if not 2 <= ell <= k:
        raise ValueError("need 2 <= ell <= k")
    total = standard_length(k)
    if not 0 <= split <= total:
        raise ValueError(f"split {split} outside [0, {total}]")
    i_idx, u0_len, j_idx = _decompose(k, split, total - split, ell)
    return tuple(i_idx), standard_word(ell)[:u0_len], tuple(j_idx)


def _decompose(k, u_len, v_len, ell):
    # u is a prefix of w_k, v the matching suffix; only lengths matter
    if u_len <= standard_length(ell):
        return [], u_len, [k]
    if k == ell + 1:
        if v_len == 0:
            return [k], 0, []
        raise DecompositionError(
            f"split ({u_len}, {v_len}) of w_{k} has no decomposition above ell={ell}")
    head = standard_length(k - 1)
    if u_len >= head:
        # u = w_{k-1} u', u' v = w_{k-2}
        i_idx, u0_len, j_idx = _decompose(k - 2, u_len - head, v_len, ell)
        return [k - 1] + i_idx, u0_len, j_idx
    # v = v' w_{k-2}, u v' = w_{k-1}
    tail = standard_length(k - 2)
    i_idx, u0_len, j_idx = _decompose(k - 1, u_len, v_len - tail, ell)
    return i_idx, u0_len, [k - 2] + j_idx


def longest_palindromic_factor(w: Word, max_check: int | None = None) -> int:
    """Length of the longest palindromic factor (Manacher's algorithm)."""
    if max_check is not None:
        w = w[:max_check]
    if not w:
        return 0
    # interleave separators so every palindrome has odd length
    t = [None]
    for x in w:
        t.extend((x, None))
    radius = [0] * len(t)
    center = right = 0
    for i in range(len(t)):
        if i < right:
            radius[i] = min(right - i, radius[2 * center - i])
        while (i - radius[i] - 1 >= 0 and i + radius[i] + 1 < len(t)
               and t[i - radius[i] - 1] == t[i + radius[i] + 1]):
            radius[i] += 1
        if i + radius[i] > right:
            center, right = i, i + radius[i]
    return max(radius)


palindrome_factor_scan = longest_palindromic_factor


def word_to_json(w: Word) -> list[str]:
    return [str(x) for x in w]


def word_from_json(data) -> Word:
    letters = list(data)
    if all(x in ("a", "b") for x in letters):
        return "".join(letters)
    return tuple(int(x) for x in letters)


def parse_word(text: str) -> Word:
    """``"abaab"`` or ``"3"`` / ``"1,2"`` style command line words."""
    text = text.strip()
    if not text:
        return ()
    if set(text) <= {"a", "b"}:
        return text
    try:
        letters = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse word {text!r}") from None
    if any(x < 1 for x in letters):
        raise ValueError(f"word {text!r} has letters below 1")
    return letters
