"""Fibonacci sequences ``W_{i+2} = W_{i+1} * W_i`` in the group of
primitive non-singular integer matrices, their symmetry witnesses and
determinant patterns.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import isqrt_exact
from .mat2 import (Mat2Z, NotInGroupError, canonical_sign, content, det,
                   in_P, inverse_in_P, is_skew_symmetric, is_symmetric, norm,
                   reduce, same_up_to_sign, star, transpose)
from .words import fib_prefix, standard_length

log = logging.getLogger(__name__)

SIGN_POLICIES = ("canonical", "raw")


class FibMatrixSeq:
    """Lazily generated Fibonacci sequence in the group.

    ``sign_policy="raw"`` keeps ``W_{i+2} = (W_{i+1} W_i)^red`` exactly;
    ``"canonical"`` flips each new term so its first non-zero entry is
    positive.  ``W1`` and ``W2`` are stored as given.  The term cache is
    append-only.
    """

    def __init__(self, W1: Mat2Z, W2: Mat2Z, sign_policy: str = "canonical",
                 label: str = ""):
        for name, W in (("W1", W1), ("W2", W2)):
            if not in_P(W):
                raise NotInGroupError(f"{name}={W} must be primitive with det != 0")
        if sign_policy not in SIGN_POLICIES:
            raise ValueError(f"unknown sign policy {sign_policy!r}")
        self.W1, self.W2 = W1, W2
        self.sign_policy = sign_policy
        self.label = label
        self._terms = [W1, W2]

    def term(self, k: int) -> Mat2Z:
        if k < 1:
            raise ValueError("terms are indexed from 1")
        canonical = self.sign_policy == "canonical"
        while len(self._terms) < k:
            self._terms.append(star(self._terms[-1], self._terms[-2], canonical=canonical))
        return self._terms[k - 1]

    __getitem__ = term

    def terms(self, k: int) -> list[Mat2Z]:
        self.term(k)
        return self._terms[:k]

    def with_policy(self, sign_policy: str) -> FibMatrixSeq:
        return FibMatrixSeq(self.W1, self.W2, sign_policy, self.label)

    def to_json(self) -> dict:
        return {"W1": self.W1.to_json(), "W2": self.W2.to_json(),
                "sign_policy": self.sign_policy, "label": self.label}

    def __repr__(self):
        return f"FibMatrixSeq(W1={self.W1}, W2={self.W2}, sign_policy={self.sign_policy!r})"


def generate(seq: FibMatrixSeq, k: int) -> Mat2Z:
    return seq.term(k)


def sign_ratio(A: Mat2Z, B: Mat2Z) -> int:
    """``e`` in {1, -1} with ``A = e B``."""
    if A == B:
        return 1
    if A == -B:
        return -1
    raise ValueError(f"{A} and {B} differ by more than a sign")


def is_eventually_bounded(seq: FibMatrixSeq, depth: int = 24) -> bool:
    """Heuristic: the second half of the first ``depth`` terms sets no new
    norm record.  True for periodic sequences."""
    norms = [norm(W) for W in seq.terms(depth)]
    half = depth // 2
    return max(norms[half:]) <= max(norms[:half])


# --- the monoid morphism from {a, b}* ------------------------------------

def morphism_phi(word: str, W1: Mat2Z, W2: Mat2Z, canonical: bool = True) -> Mat2Z:
    """Image of ``word`` under ``b -> W1``, ``a -> W2`` folded with ``*``."""
    images = {"a": W2, "b": W1}
    result = Mat2Z.identity()
    for letter in word:
        try:
            result = star(result, images[letter], canonical=canonical)
        except KeyError:
            raise ValueError(f"letter {letter!r} is not in {{a, b}}") from None
    return result


def phi_of_indices(seq: FibMatrixSeq, indices: Iterable[int]) -> Mat2Z:
    """``Phi(w_{k1} w_{k2} ...)`` computed from the terms ``W_k = Phi(w_k)``."""
    canonical = seq.sign_policy == "canonical"
    result = Mat2Z.identity()
    for k in indices:
        result = star(result, seq.term(k), canonical=canonical)
    return result


# --- admissibility ------------------------------------------------------

@dataclass
class AdmissibilityWitness:
    """Matrix ``N`` with ``W_i N_i`` symmetric, ``N_i = tN`` for odd i and
    ``N`` for even i."""
    N: Mat2Z | None
    kernel_dimension: int
    verified_depth: int
    generators: tuple = ()
    ambiguous: bool = False

    def N_at(self, i: int) -> Mat2Z:
        return transpose(self.N) if i % 2 else self.N

    @property
    def M(self) -> Mat2Z:
        """Inverse of ``N`` in the group."""
        return inverse_in_P(self.N)

    def to_json(self) -> dict:
        return {"N": self.N.to_json() if self.N else None,
                "kernel_dimension": str(self.kernel_dimension),
                "verified_depth": str(self.verified_depth),
                "generators": [g.to_json() for g in self.generators],
                "ambiguous": self.ambiguous}


def _symmetry_row(A: Mat2Z, transposed: bool) -> list[int]:
    # coefficient row of (A N')_{01} - (A N')_{10} in the unknowns (n1, n2, n3, n4)
    a, b, c, d = A.entries
    if transposed:      # N' = tN
        return [-c, -d, a, b]
    return [-c, a, -d, b]


def rational_nullspace(rows: Sequence[Sequence[int]], ncols: int) -> list[list[Fraction]]:
    """Basis of the kernel of an integer matrix, by exact row reduction."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][col]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, col in enumerate(pivots):
            v[col] = -m[row][free]
        basis.append(v)
    return basis


def primitive_integer_vector(v: Sequence[Fraction]) -> list[int]:
    lcm = 1
    for x in v:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in v]
    g = math.gcd(*ints)
    return [x // g for x in ints]


def witness_conditions_hold(N: Mat2Z) -> bool:
    return det(N) != 0 and not is_symmetric(N) and not is_skew_symmetric(N)


def verify_witness(seq: FibMatrixSeq, N: Mat2Z, depth: int):
    """First index ``i <= depth`` with ``W_i N_i`` not symmetric, else None."""
    for i in range(1, depth + 1):
        Ni = transpose(N) if i % 2 else N
        if not is_symmetric(seq.term(i) @ Ni):
            return i
    return None


def solve_admissibility_witness(W1: Mat2Z, W2: Mat2Z, depth: int = 12):
    """Solve ``W1 tN, W2 N, W3 tN`` symmetric over the rationals.

    Returns an :class:`AdmissibilityWitness`, or None when no valid ``N``
    exists (empty kernel, or ``N`` singular, symmetric or skew-symmetric, or
    symmetry failing within ``depth``).  A kernel of dimension >= 2 is
    returned flagged ``ambiguous`` with every basis generator listed.
    """
    seq = FibMatrixSeq(W1, W2, sign_policy="raw")
    W3 = seq.term(3)
    rows = [_symmetry_row(W1, True), _symmetry_row(W2, False), _symmetry_row(W3, True)]
    basis = rational_nullspace(rows, 4)
    generators = tuple(canonical_sign(Mat2Z(*primitive_integer_vector(v))) for v in basis)
    if not generators:
        log.debug("empty kernel for W1=%s, W2=%s", W1, W2)
        return None
    if len(generators) > 1:
        valid = [N for N in generators
                 if witness_conditions_hold(N) and verify_witness(seq, N, depth) is None]
        return AdmissibilityWitness(valid[0] if valid else None, len(generators),
                                    depth if valid else 0, generators, ambiguous=True)
    N = generators[0]
    if not witness_conditions_hold(N):
        log.debug("kernel generator %s is singular, symmetric or skew", N)
        return None
    bad = verify_witness(seq, N, depth)
    if bad is not None:
        log.debug("symmetry fails at i=%d", bad)
        return None
    return AdmissibilityWitness(N, 1, depth, generators)


def rational_eigenvectors(A: Mat2Z) -> list[tuple[int, int]] | None:
    """Rational eigenvectors of ``A`` (one per eigenline), or None when ``A``
    is scalar and every vector is an eigenvector."""
    if A.b == 0 and A.c == 0 and A.a == A.d:
        return None
    tr, D = A.a + A.d, det(A)
    root = isqrt_exact(tr * tr - 4 * D)
    if root is None:
        return []
    vectors = []
    for num in {tr + root, tr - root}:
        lam = Fraction(num, 2)
        # kernel of A - lam I
        p, q, r, s = A.a - lam, Fraction(A.b), Fraction(A.c), A.d - lam
        if p != 0 or q != 0:
            v = (-q, p)
        else:
            v = (-s, r)
        vectors.append(tuple(primitive_integer_vector(v)))
    return vectors


def _is_eigenvector(A: Mat2Z, v) -> bool:
    x, y = v
    ax, ay = A.a * x + A.b * y, A.c * x + A.d * y
    return ax * y - ay * x == 0


def have_common_rational_eigenvector(A: Mat2Z, B: Mat2Z) -> bool:
    va, vb = rational_eigenvectors(A), rational_eigenvectors(B)
    if va is None:
        return vb is None or bool(vb)
    if vb is None:
        return bool(va)
    return any(_is_eigenvector(B, v) for v in va)


def check_lemma_b2_hypotheses(W1: Mat2Z, W2: Mat2Z) -> bool:
    """No common rational eigenvector and ``W1 W2 != +-W2 W1``."""
    if have_common_rational_eigenvector(W1, W2):
        return False
    return not same_up_to_sign(W1 @ W2, W2 @ W1)


def generators_independent(W1: Mat2Z, W2: Mat2Z) -> bool:
    """``W1, W2, W1W2, W2W1`` linearly independent over Q."""
    vectors = [W.entries for W in (W1, W2, W1 @ W2, W2 @ W1)]
    return not rational_nullspace(list(zip(*vectors)), 4)


# --- symmetric companions -----------------------------------------------

def symmetric_companions(seq: FibMatrixSeq, witness: AdmissibilityWitness, k: int) -> Mat2Z:
    """``y_k = W_k N_k`` as an unreduced product."""
    y = seq.term(k) @ witness.N_at(k)
    if not is_symmetric(y):
        raise ValueError(f"witness invalid at k={k}: {y} is not symmetric")
    return y


@dataclass
class RecurrenceCheck:
    ok: bool
    failed_at: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_symmetric_recurrence(seq: FibMatrixSeq, witness: AdmissibilityWitness,
                               indices: Iterable[int]) -> RecurrenceCheck:
    """Check ``y_{i+2} = +- y_{i+1} * M' * y_i`` with ``M' = M`` for odd i
    and ``tM`` for even i, ``M`` the group inverse of ``N``; each ``y`` must
    also be symmetric."""
    M = witness.M
    for i in indices:
        ys = [seq.term(j) @ witness.N_at(j) for j in (i, i + 1, i + 2)]
        for j, y in zip((i, i + 1, i + 2), ys):
            if not is_symmetric(y):
                return RecurrenceCheck(False, i, f"y_{j} not symmetric")
        Mi = M if i % 2 else transpose(M)
        rhs = star(star(reduce(ys[1]), Mi), reduce(ys[0]))
        if not same_up_to_sign(reduce(ys[2]), rhs):
            return RecurrenceCheck(False, i, "recurrence mismatch")
    return RecurrenceCheck(True)


# --- determinant patterns -------------------------------------------------

class HypothesisError(ValueError):
    pass


@dataclass
class DetPatternReport:
    m: int
    prefixes_checked: int
    terms_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"m": str(self.m), "prefixes_checked": str(self.prefixes_checked),
                "terms_checked": str(self.terms_checked), "ok": self.ok,
                "violations": self.violations}


def check_det_hypotheses(W1: Mat2Z, W2: Mat2Z, m: int) -> Mat2Z:
    """Return ``W`` (entries mod |m|) or raise naming the failed hypothesis."""
    if m == 0:
        raise HypothesisError("m must be non-zero")
    for name, A in (("W1", W1), ("W2", W2)):
        if content(A) != 1:
            raise HypothesisError(f"{name} is not primitive")
        if det(A) != m:
            raise HypothesisError(f"det {name} = {det(A)} differs from m = {m}")
    mod = abs(m)
    W = Mat2Z(*(x % mod for x in W1.entries))
    if any((x - y) % mod for x, y in zip(W1.entries, W2.entries)):
        raise HypothesisError("W1 and W2 are not congruent mod m")
    if any(x % mod for x in (W @ W).entries):
        raise HypothesisError("W^2 is not divisible by m")
    return W


def det_pattern_check(W1: Mat2Z, W2: Mat2Z, m: int, kmax: int) -> DetPatternReport:
    """``det Phi(u)`` is 1 for even ``|u|`` and ``m`` for odd ``|u|``: check
    all prefixes of the Fibonacci word up to length ``kmax`` and all
    ``w_k``, ``k <= kmax``."""
    check_det_hypotheses(W1, W2, m)
    report = DetPatternReport(m, kmax, kmax)
    U = Mat2Z.identity()
    for n, letter in enumerate(fib_prefix(kmax), start=1):
        U = star(U, W2 if letter == "a" else W1)
        expected = m if n % 2 else 1
        if det(U) != expected:
            report.violations.append({"prefix_length": str(n), "det": str(det(U)),
                                      "expected": str(expected)})
    seq = FibMatrixSeq(W1, W2)
    for k in range(1, kmax + 1):
        expected = m if standard_length(k) % 2 else 1
        if det(seq.term(k)) != expected:
            report.violations.append({"term": str(k), "det": str(det(seq.term(k))),
                                      "expected": str(expected)})
    return report


# --- the explicit families --------------------------------------------------

@dataclass
class FamilyD:
    m: int
    W1: Mat2Z
    W2: Mat2Z
    N: Mat2Z
    checks: dict

    @property
    def square(self) -> bool:
        return isqrt_exact(abs(self.m)) is not None

    @property
    def flags(self) -> list[str]:
        return ["conjugacy obstruction absent"] if self.square else []

    def sequence(self, sign_policy: str = "canonical") -> FibMatrixSeq:
        return FibMatrixSeq(self.W1, self.W2, sign_policy, label=f"thmD-m{self.m}")


def theorem_d_family(m: int) -> FamilyD:
    """``W1 = [[m, m], [m-1, m]]``, ``W2 = [[2m, m], [2m-1, m]]`` and the
    symmetry witness ``N = [[m, -m], [-2m, 2m-1]]``, with hypothesis checks."""
    if m == 0:
        raise ValueError("m must be non-zero")
    W1 = Mat2Z(m, m, m - 1, m)
    W2 = Mat2Z(2 * m, m, 2 * m - 1, m)
    N = Mat2Z(m, -m, -2 * m, 2 * m - 1)
    seq = FibMatrixSeq(W1, W2, sign_policy="raw")
    try:
        check_det_hypotheses(W1, W2, m)
        det_ok = True
    except HypothesisError:
        det_ok = False
    checks = {
        "primitive": in_P(W1) and in_P(W2) and in_P(N),
        "independent": generators_independent(W1, W2),
        "lemma_b2": check_lemma_b2_hypotheses(W1, W2),
        "witness_conditions": witness_conditions_hold(N),
        "witness_symmetry_depth_12": verify_witness(seq, N, 12) is None,
        "det_hypotheses": det_ok,
    }
    return FamilyD(m, W1, W2, N, checks)


PERIOD6_W1 = Mat2Z(1, 0, 0, 2)
PERIOD6_W2 = Mat2Z(0, 1, 2, 0)


def period6_sequence(sign_policy: str = "canonical") -> FibMatrixSeq:
    return FibMatrixSeq(PERIOD6_W1, PERIOD6_W2, sign_policy, label="period6")


def period6_v_indices(i: int) -> list[int]:
    """Indices of ``v_i = w_{6i+1} ... w_7 w_1``."""
    return [6 * j + 1 for j in range(i, -1, -1)]


def period6_prefix_indices(i: int) -> list[int]:
    """Indices of ``w_{3i+2} ... w_5 w_2``, a prefix of the Fibonacci word
    whose image under the period-6 morphism has determinant ``2^{i+1}``.

    The word ``v_i`` of :func:`period6_v_indices` has the same image
    determinant but is not itself a prefix: ``w_1 = b`` cannot follow
    ``w_7`` there.
    """
    return [3 * j + 2 for j in range(i, -1, -1)]


def norm_growth_ratios(seq: FibMatrixSeq, start: int, stop: int) -> list[Fraction]:
    """``||W_{i+2}|| / (||W_{i+1}|| ||W_i||)`` for ``start <= i <= stop``."""
    return [Fraction(norm(seq.term(i + 2)), norm(seq.term(i + 1)) * norm(seq.term(i)))
            for i in range(start, stop + 1)]
