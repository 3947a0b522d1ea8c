from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal.exact import cf_value
from extremal.mat2 import Mat2Z, det, in_S
from extremal.words import (DecompositionError, FibWordSeq, atom, atoms_product,
                            factor_characterization, factor_gl2, fib_prefix,
                            fib_prefix_decomposition, iter_fib_letters,
                            longest_palindromic_factor, parse_word, sigma, sigma_inverse,
                            standard_length, standard_word, substitute, word_from_json,
                            word_to_json, words_commute)

int_words = st.lists(st.integers(1, 9), max_size=12).map(tuple)


def fibonacci(n):
    # F_0 = F_1 = 1, so that |w_3| = |w_2| + |w_1|
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


# --- words --------------------------------------------------------------------

def test_fib_word_examples():
    assert FibWordSeq("b", "a").term(5) == "abaab"
    assert FibWordSeq((3,), (1, 2)).term(4) == (1, 2, 3, 1, 2)
    assert FibWordSeq("xy", "z").term(1) == "xy"
    assert fib_prefix(8) == "abaababa"
    assert fib_prefix(0) == ""
    assert fib_prefix(13) == "abaababaabaab"
    assert standard_word(7) == standard_word(6) + standard_word(5)


def test_limit_word_of_integer_sequence():
    seq = FibWordSeq((3,), (1, 2))
    assert seq.limit_prefix(8) == (1, 2, 3, 1, 2, 1, 2, 3)


@pytest.mark.parametrize("w1, w2", [("b", "a"), ("ab", "b"), ((3,), (1, 2)), ((1, 1), (2,))])
def test_fib_word_lengths(w1, w2):
    seq = FibWordSeq(w1, w2)
    for k in range(3, 20):
        assert len(seq.term(k)) == seq.length(k)
        assert seq.length(k) == (fibonacci(k - 2) * len(w2) + fibonacci(k - 3) * len(w1))
        assert seq.term(k) == seq.term(k - 1) + seq.term(k - 2)


def test_fib_prefix_is_prefix_closed():
    letters = iter_fib_letters()
    streamed = "".join(next(letters) for _ in range(400))
    for n in range(400):
        assert fib_prefix(n) == streamed[:n]
        assert fib_prefix(n + 1).startswith(fib_prefix(n))


def test_substitute_maps_standard_words():
    seq = FibWordSeq((3,), (1, 2))
    for k in range(1, 12):
        assert substitute(standard_word(k), (3,), (1, 2)) == seq.term(k)


def test_words_commute():
    assert words_commute("ab", "abab")
    assert not words_commute("a", "b")
    assert not words_commute((3,), (1, 2))


def test_word_json_and_parsing():
    assert word_to_json((1, 22)) == ["1", "22"]
    assert word_from_json(["1", "22"]) == (1, 22)
    assert word_from_json(["a", "b"]) == "ab"
    assert parse_word("abaab") == "abaab"
    assert parse_word("1,2") == (1, 2)
    assert parse_word("3") == (3,)
    for bad in ("0", "1,x", "-2"):
        with pytest.raises(ValueError):
            parse_word(bad)


# --- atoms and factorization --------------------------------------------------

def test_sigma_examples():
    assert sigma((1, 2, 1)) == Mat2Z.of([[4, 3], [3, 2]])
    assert sigma(()) == Mat2Z.identity()
    assert sigma((7,)) == atom(7) == Mat2Z.of([[7, 1], [1, 0]])


def test_sigma_inverse_examples():
    assert sigma_inverse(Mat2Z.of([[4, 3], [3, 2]])) == (1, 2, 1)
    assert sigma_inverse(Mat2Z.of([[3, 1], [1, 0]])) == (3,)
    assert sigma_inverse(Mat2Z.of([[5, 2], [3, 1]])) == (1, 1, 2)
    assert sigma((1, 1, 2)) == Mat2Z.of([[5, 2], [3, 1]])
    with pytest.raises(ValueError):
        sigma_inverse(Mat2Z.of([[4, 2], [3, 2]]))


def test_factor_examples():
    assert factor_gl2(Mat2Z.of([[4, 3], [3, 2]])) == [1, 2, 1]
    assert factor_gl2(Mat2Z.of([[1, 0], [2, 1]])) == [0, 2]
    assert factor_gl2(Mat2Z.of([[1, 1], [0, 1]])) == [1, 0]
    with pytest.raises(ValueError):
        factor_gl2(Mat2Z.of([[1, 0], [1, -1]]))     # d < 1
    with pytest.raises(ValueError):
        factor_gl2(Mat2Z.of([[4, 1], [2, 1]]))     # det 2


@settings(max_examples=1000)
@given(int_words)
def test_sigma_round_trip(w):
    A = sigma(w)
    assert abs(det(A)) == 1
    assert A == Mat2Z.identity() or in_S(A)
    assert sigma_inverse(A) == w


@settings(max_examples=300)
@given(int_words, int_words)
def test_sigma_is_morphism(u, v):
    assert sigma(u + v) == sigma(u) @ sigma(v)


@st.composite
def atom_sequences(draw):
    s = draw(st.integers(1, 8))
    middle = draw(st.lists(st.integers(1, 9), min_size=s - 1, max_size=s - 1))
    q = [draw(st.integers(-6, 9))] + middle + [draw(st.integers(-3, 9))]
    return q


@settings(max_examples=500)
@given(atom_sequences())
def test_factor_recovers_atom_products(q):
    A = atoms_product(q)
    if A.d < 1:
        return
    f = factor_gl2(A)
    assert atoms_product(f) == A
    assert f == q
    # the characterization, recomputed from scratch
    s = len(f) - 1
    assert Fraction(A.b, A.d) == cf_value(f[:s])
    assert Fraction(A.c, A.d) == cf_value(list(reversed(f[1:])))
    assert det(A) == (-1) ** (s + 1)
    assert factor_characterization(A, f)


# --- prefix decomposition -----------------------------------------------------

def reconstruct(k, split, ell, result):
    i_idx, u0, j_idx = result
    w = standard_word(k)
    u, v = w[:split], w[split:]
    assert "".join(standard_word(i) for i in i_idx) + u0 == u
    assert u0 + v == "".join(standard_word(j) for j in reversed(j_idx))
    assert standard_word(ell).startswith(u0)
    for seq in (i_idx, j_idx):
        assert all(x >= ell for x in seq)
        assert all(x > y for x, y in zip(seq, seq[1:]))


def test_decomposition_example():
    assert standard_word(5) == "abaab"
    assert fib_prefix_decomposition(5, 2, 2) == ((3,), "", (3, 2))
    assert fib_prefix_decomposition(6, 1, 3) == ((), "a", (6,))


@pytest.mark.parametrize("ell", [2, 3])
@pytest.mark.parametrize("k", range(2, 13))
def test_decomposition_reconstructs(k, ell):
    if ell > k:
        return
    for split in range(standard_length(k) + 1):
        result = fib_prefix_decomposition(k, split, ell)
        reconstruct(k, split, ell, result)
        i_idx, u0, j_idx = result
        u = standard_word(k)[:split]
        if not standard_word(ell).startswith(u) and split < standard_length(k):
            assert i_idx[0] <= k - 1
            assert j_idx[0] <= k - 2


def brute_force_decompositions(k, split, ell):
    """All decompositions, searched over every strictly decreasing index set."""
    w = standard_word(k)
    u, v = w[:split], w[split:]
    indices = range(ell, k + 1)
    found = []
    for s in range(len(indices) + 1):
        for i_set in combinations(indices, s):
            i_idx = sorted(i_set, reverse=True)
            head = "".join(standard_word(i) for i in i_idx)
            if not u.startswith(head):
                continue
            u0 = u[len(head):]
            if not standard_word(ell).startswith(u0):
                continue
            for t in range(len(indices) + 1):
                for j_set in combinations(indices, t):
                    j_idx = sorted(j_set, reverse=True)
                    if "".join(standard_word(j) for j in reversed(j_idx)) == u0 + v:
                        found.append((tuple(i_idx), u0, tuple(j_idx)))
    return found


def test_decomposition_gap_beyond_ell_three():
    # w_5 = abaab split as abaa | b with ell = 4: no decomposition exists at all
    assert brute_force_decompositions(5, 4, 4) == []
    with pytest.raises(DecompositionError):
        fib_prefix_decomposition(5, 4, 4)


@pytest.mark.parametrize("k", range(2, 8))
def test_decomposition_agrees_with_search(k):
    for ell in range(2, k + 1):
        for split in range(standard_length(k) + 1):
            found = brute_force_decompositions(k, split, ell)
            try:
                result = fib_prefix_decomposition(k, split, ell)
            except DecompositionError:
                assert found == []
            else:
                assert result in found


# --- palindromes ----------------------------------------------------------------

def brute_palindrome(w):
    best = 0
    for i in range(len(w)):
        for j in range(i + 1, len(w) + 1):
            if w[i:j] == w[i:j][::-1]:
                best = max(best, j - i)
    return best


def test_palindrome_examples():
    limit = FibWordSeq((3,), (1, 2)).limit_prefix(100)
    assert longest_palindromic_factor(limit) == 3
    assert longest_palindromic_factor("abaaba") == 6
    assert longest_palindromic_factor("a") == 1
    assert longest_palindromic_factor("") == 0
    assert longest_palindromic_factor("abcba", max_check=3) == 1


@settings(max_examples=300)
@given(st.text(alphabet="ab", max_size=40) | st.lists(st.integers(1, 3), max_size=40).map(tuple))
def test_palindrome_matches_brute_force(w):
    assert longest_palindromic_factor(w) == brute_palindrome(w)
