"""Certified enclosures of the number attached to a Fibonacci sequence of
matrices, and empirical checks of the growth estimates around it.

The number xi is handled through nested rational intervals: once some
sign of ``W_{i0-1}`` is non-negative and some sign of ``W_{i0}`` is
positive, every later term is (up to sign) a positive matrix whose
columns are positive combinations of the previous term's columns, so the
column-ratio intervals ``[c/a, d/b]`` nest.  Their common point is xi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .exact import (RationalInterval, format_rational, integer_root_bounds,
                    interval_cf_extract)
from .mat2 import (Mat2Z, adjugate, conjugate, content, det, in_S, norm,
                   positive_representative, reduce, same_up_to_sign, star,
                   transpose)
from .sequences import (AdmissibilityWitness, FibMatrixSeq,
                        solve_admissibility_witness, verify_witness)
from .words import atoms_product, fib_prefix, standard_length, standard_word

log = logging.getLogger(__name__)

GAMMA = (1 + math.sqrt(5)) / 2
# Fibonacci ratios bracketing 1/gamma: 377/610 < 1/gamma < 610/987
INV_GAMMA_LOWER = Fraction(377, 610)
INV_GAMMA_UPPER = Fraction(610, 987)

DEFAULT_DEPTH_CAP = 22
DEFAULT_TAIL_BOUND = 16


class NoPositiveTailError(ValueError):
    pass


class BracketingError(ArithmeticError):
    """Enclosures failed to nest: the positivity argument is broken."""


def positivity_tail_index(seq: FibMatrixSeq, bound: int = DEFAULT_TAIL_BOUND) -> int:
    """Smallest ``i >= 2`` such that some sign of ``W_{i-1}`` is non-negative
    and some sign of ``W_i`` is positive; all later terms are then positive
    up to sign."""
    for i in range(2, bound + 1):
        if (positive_representative(seq.term(i - 1), strict=False) is not None
                and positive_representative(seq.term(i)) is not None):
            return i
    details = ", ".join(str(seq.term(i)) for i in range(1, min(bound, 8) + 1))
    raise NoPositiveTailError(
        f"no positive tail found up to index {bound}; first terms: {details}")


def column_ratio_interval(W: Mat2Z) -> RationalInterval:
    P = positive_representative(W)
    if P is None:
        raise NoPositiveTailError(f"{W} has no positive sign")
    return RationalInterval.spanning(Fraction(P.c, P.a), Fraction(P.d, P.b))


class Expansion(NamedTuple):
    quotients: list
    depth: int
    complete: bool


class ExtremalNumber:
    """The number attached to an admissible Fibonacci sequence, known
    through its nested enclosures."""

    def __init__(self, seq: FibMatrixSeq, witness: AdmissibilityWitness | None = None,
                 tail_bound: int = DEFAULT_TAIL_BOUND, depth_cap: int = DEFAULT_DEPTH_CAP):
        self.seq = seq
        self._witness = witness
        self.depth_cap = depth_cap
        self.positivity_tail = positivity_tail_index(seq, tail_bound)
        self._enclosures: dict[int, RationalInterval] = {}

    @property
    def witness(self) -> AdmissibilityWitness | None:
        if self._witness is None:
            self._witness = solve_admissibility_witness(self.seq.W1, self.seq.W2)
        return self._witness

    def enclosure(self, k: int) -> RationalInterval:
        return enclose(self, k)

    def __repr__(self):
        return f"ExtremalNumber({self.seq!r}, tail={self.positivity_tail})"


def enclose(x: ExtremalNumber, k: int) -> RationalInterval:
    """Column-ratio interval of ``W_k``, checked to nest inside depth ``k-1``."""
    i0 = x.positivity_tail
    if k < i0:
        raise ValueError(f"depth {k} is before the positivity tail {i0}")
    start = max([d for d in x._enclosures if d <= k], default=i0 - 1)
    prev = x._enclosures.get(start)
    for depth in range(max(start + 1, i0), k + 1):
        current = column_ratio_interval(x.seq.term(depth))
        if prev is not None and not current.issubset(prev):
            raise BracketingError(f"bracketing failed at depth {depth}: "
                                  f"{current} not inside {prev}")
        x._enclosures[depth] = current
        prev = current
    return x._enclosures[k]


def partial_quotients(x: ExtremalNumber, n: int, depth_cap: int | None = None) -> Expansion:
    """First ``n`` certified partial quotients, deepening the enclosure up to
    ``depth_cap``.  ``complete`` is False if the cap was hit first."""
    cap = depth_cap or x.depth_cap
    best: list = []
    depth = x.positivity_tail
    for depth in range(x.positivity_tail, cap + 1):
        quotients, _ = interval_cf_extract(enclose(x, depth), n)
        if len(quotients) < len(best):
            raise BracketingError("certified prefix shrank while deepening")
        best = quotients
        if len(quotients) >= n:
            return Expansion(quotients, depth, True)
    log.warning("depth cap %d reached with %d of %d quotients", cap, len(best), n)
    return Expansion(best, depth, False)


def row_norm_interval(I: RationalInterval, A: Mat2Z) -> RationalInterval:
    """Exact range of ``t -> ||(t, -1) A||`` over ``t`` in ``I``."""
    a, b, c, d = A.entries

    def f(t):
        return max(abs(t * a - c), abs(t * b - d))

    candidates = [I.lo, I.hi]
    for num, den in ((c, a), (d, b), (c - d, a - b), (c + d, a + b)):
        if den:
            t = Fraction(num, den)
            if t in I:
                candidates.append(t)
    return RationalInterval(min(f(t) for t in candidates), max(f(I.lo), f(I.hi)))


def _magnitude(I: RationalInterval) -> RationalInterval:
    return abs(I).max_with(RationalInterval.point(1))


def theta_interval(I: RationalInterval, N: Mat2Z) -> RationalInterval:
    """``L N^{-1} tL`` with ``L = (1, xi) / max(1, |xi|)``, over xi in ``I``."""
    adj = adjugate(N)
    quad = adj.a + (adj.b + adj.c) * I + adj.d * I * I
    return quad / (det(N) * _magnitude(I) * _magnitude(I))


def _report(I: RationalInterval, den: int = 10 ** 15) -> list[str]:
    # reports carry outward-rounded endpoints; exact values stay internal
    return I.outward(den).to_json()


def _decimal(x: Fraction) -> str:
    return format(float(x), ".12g")


def _log_ratio(num: int, den: int):
    if abs(den) <= 1 or num == 0:
        return None
    return math.log(abs(num)) / math.log(abs(den))


@dataclass
class DiagnosticsReport:
    label: str
    depth: int
    records: list
    thresholds: dict
    gamma: float = GAMMA
    theta: RationalInterval | None = None
    bands: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def exponent(self, i: int):
        for r in self.records:
            if r["i"] == i:
                return r["exponent_ratio"]
        raise KeyError(i)

    def to_records(self) -> list[dict]:
        out = []
        for r in self.records:
            out.append({
                "i": str(r["i"]), "norm_digits": str(r["norm_digits"]),
                "exponent_ratio": None if r["exponent_ratio"] is None else repr(r["exponent_ratio"]),
                "approx_product": _report(r["approx_product"]),
                "det": str(r["det"]),
                "growth_ratio": format_rational(r["growth_ratio"]),
            })
        return out

    def summary(self) -> dict:
        return {"label": self.label, "depth": str(self.depth), "gamma": repr(self.gamma),
                "theta": _report(self.theta) if self.theta else None,
                "thresholds": {k: str(v) for k, v in self.thresholds.items()},
                "bands": {k: (_report(v) if isinstance(v, RationalInterval)
                              else _decimal(v) if isinstance(v, Fraction)
                              else v if v is None or isinstance(v, (bool, str))
                              else repr(v))
                          for k, v in self.bands.items()},
                "warnings": self.warnings}


def verify_associated(x: ExtremalNumber, start: int, stop: int, depth: int | None = None,
                      band_ratio_max: Fraction = Fraction(1000)) -> DiagnosticsReport:
    """Per-index records of ``||W_i||`` growth, ``||(xi,-1) W_i|| ||W_i||``
    and ``det W_i`` for ``start <= i <= stop``, with band summaries."""
    if start < x.positivity_tail:
        start = x.positivity_tail
    depth = depth or stop + 2
    I = enclose(x, depth)
    seq = x.seq
    records = []
    for i in range(start, stop + 1):
        W = seq.term(i)
        nW = norm(W)
        records.append({
            "i": i,
            "norm_digits": len(str(nW)),
            "exponent_ratio": _log_ratio(norm(seq.term(i + 1)), nW),
            "approx_product": row_norm_interval(I, W) * nW,
            "det": det(W),
            "growth_ratio": Fraction(norm(seq.term(i + 2)), norm(seq.term(i + 1)) * nW),
        })
    products = [r["approx_product"] for r in records]
    exps = [r["exponent_ratio"] for r in records if r["exponent_ratio"] is not None]
    lo = min(p.lo for p in products)
    hi = max(p.hi for p in products)
    bands = {
        "exponent_ratio_min": min(exps) if exps else None,
        "exponent_ratio_max": max(exps) if exps else None,
        "approx_product": RationalInterval(lo, hi),
        "approx_product_ratio": hi / lo if lo > 0 else None,
        "abs_det_max": str(max(abs(r["det"]) for r in records)),
        "growth_ratio_min": min(r["growth_ratio"] for r in records),
    }
    report = DiagnosticsReport(seq.label, depth, records,
                               {"band_ratio_max": Fraction(band_ratio_max)}, bands=bands)
    ratio = bands["approx_product_ratio"]
    if ratio is None or ratio >= band_ratio_max:
        report.warnings.append(f"approx_product band ratio {ratio} exceeds {band_ratio_max}")
    witness = x.witness
    if witness is not None and witness.N is not None:
        report.theta = theta_interval(I, witness.N)
    return report


# --- the prefix determinant scan -------------------------------------------

@dataclass
class TheoremCScan:
    label: str
    depth: int
    records: list
    det_bounded: bool
    max_abs_det: int
    max_partial_quotient: int | None
    quotients_checked: int
    lower_bound_ok: bool
    split_band: RationalInterval | None
    violations: list = field(default_factory=list)

    def to_records(self) -> list[dict]:
        return [{"i": str(r["i"]), "prefix": r["prefix"], "det": str(r["det"]),
                 "rho": _report(r["rho"]), "lower": _report(r["lower"]),
                 "k": str(r["k"]), "m": str(r["m"])} for r in self.records]

    def summary(self) -> dict:
        return {"label": self.label, "depth": str(self.depth),
                "det_bounded": self.det_bounded, "max_abs_det": str(self.max_abs_det),
                "max_partial_quotient": None if self.max_partial_quotient is None
                else str(self.max_partial_quotient),
                "quotients_checked": str(self.quotients_checked),
                "lower_bound_ok": self.lower_bound_ok,
                "split_band": _report(self.split_band) if self.split_band else None,
                "violations": self.violations}


def _prefix_images(word: str, images: dict) -> list[Mat2Z]:
    out = [Mat2Z.identity()]
    for letter in word:
        out.append(star(out[-1], images[letter]))
    return out


def _suffix_images(word: str, images: dict) -> list[Mat2Z]:
    out = [Mat2Z.identity()]
    for letter in reversed(word):
        out.append(star(images[letter], out[-1]))
    return out[::-1]


def split_norm_band(seq: FibMatrixSeq, kmax: int) -> RationalInterval:
    """Range of ``||UV|| / (||U|| ||V||)`` over all splits ``w_k = uv``, ``k <= kmax``."""
    images = {"a": seq.W2, "b": seq.W1}
    ratios = []
    for k in range(1, kmax + 1):
        w = standard_word(k)
        pre, suf = _prefix_images(w, images), _suffix_images(w, images)
        for j in range(len(w) + 1):
            U, V = pre[j], suf[j]
            ratios.append(Fraction(norm(U @ V), norm(U) * norm(V)))
    return RationalInterval(min(ratios), max(ratios))


lemma_uv_band = split_norm_band


def theorem_c_scan(x: ExtremalNumber, L: int, depth: int | None = None,
                   split_cap: int = 10, n_quotients: int = 100) -> TheoremCScan:
    """Scan the prefixes ``u_i`` (``i <= L``) of the Fibonacci word.

    Records ``det U_i`` and certified intervals for
    ``rho_i = ||(xi,-1)U_i|| ||U_i|| / |det U_i|`` and for twice that
    quantity, which is at least 1 for every real xi.  Also records the
    factorization ``U_i V_i = m_i W_k`` with ``w_k = u_i v_i``.
    """
    seq = x.seq
    images = {"a": seq.W2, "b": seq.W1}
    k_of = []
    k = 2
    for i in range(1, L + 1):
        while standard_length(k) < i:
            k += 1
        k_of.append(k)
    kmax = k_of[-1] if k_of else 2
    if depth is None:
        depth = min(max(kmax + 4, x.positivity_tail + 1), max(x.depth_cap, kmax + 4))
    I = enclose(x, depth)
    suffixes = {kk: _suffix_images(standard_word(kk), images) for kk in set(k_of)}
    records, violations = [], []
    U = Mat2Z.identity()
    lower_ok = True
    for i, letter in enumerate(fib_prefix(L), start=1):
        U = star(U, images[letter])
        D = abs(det(U))
        row = row_norm_interval(I, U)
        rho = row * Fraction(norm(U), D)
        lower = rho * 2
        if lower.lo < 1:
            lower_ok = False
            violations.append({"i": str(i), "lower_bound": _report(lower)})
        kk = k_of[i - 1]
        V = suffixes[kk][i]
        UV = U @ V
        m_i = content(UV)
        if not same_up_to_sign(reduce(UV), seq.term(kk)):
            violations.append({"i": str(i), "factorization": f"U_i V_i != m_i W_{kk}"})
        records.append({"i": i, "prefix": letter, "det": det(U), "rho": rho,
                        "lower": lower, "k": kk, "m": m_i, "det_V": det(V)})
    dets = [abs(r["det"]) for r in records]
    half = len(dets) // 2
    bounded = bool(dets) and max(dets[half:]) <= max(dets[:half] or dets)
    expansion = partial_quotients(x, n_quotients) if n_quotients else None
    return TheoremCScan(
        label=seq.label, depth=depth, records=records, det_bounded=bounded,
        max_abs_det=max(dets) if dets else 0,
        max_partial_quotient=max(expansion.quotients[1:], default=None) if expansion else None,
        quotients_checked=len(expansion.quotients) if expansion else 0,
        lower_bound_ok=lower_ok,
        split_band=split_norm_band(seq, split_cap) if split_cap else None,
        violations=violations)


# --- conjugation ------------------------------------------------------------

def mobius_interval(A: Mat2Z, I: RationalInterval) -> RationalInterval:
    """Image of ``I`` under ``xi -> eta`` with ``(eta, -1)`` proportional to
    ``(xi, -1) A``, i.e. ``eta = (a xi - c) / (d - b xi)``."""
    a, b, c, d = A.entries
    den = d - b * I
    if den.lo <= 0 <= den.hi:
        raise ZeroDivisionError(f"{I} contains the pole of {A}")

    def eta(t):
        return (a * t - c) / (d - b * t)

    return RationalInterval.spanning(eta(I.lo), eta(I.hi))


def conjugate_action(A: Mat2Z, x: ExtremalNumber) -> ExtremalNumber:
    """The number eta with ``(eta, -1)`` proportional to ``(xi, -1) A``,
    attached to the term-wise conjugate sequence ``A^{-1} * W_i * A``."""
    if det(A) == 0:
        raise ValueError("conjugating matrix must be non-singular")
    A = reduce(A)
    seq = x.seq
    new_seq = FibMatrixSeq(conjugate(A, seq.W1), conjugate(A, seq.W2),
                           seq.sign_policy, label=f"{seq.label}^{A}")
    witness = None
    old = x._witness
    if old is not None and old.N is not None:
        inv = adjugate(A)
        N2 = reduce(inv @ old.N @ transpose(inv))
        bad = verify_witness(new_seq.with_policy("raw"), N2, old.verified_depth)
        if bad is not None:
            raise ArithmeticError(f"conjugated witness fails at i={bad}")
        witness = AdmissibilityWitness(N2, 1, old.verified_depth, (N2,))
    return ExtremalNumber(new_seq, witness, depth_cap=x.depth_cap)


def check_conjugation(A: Mat2Z, x: ExtremalNumber, eta: ExtremalNumber, n: int = 60,
                      min_overlap: int = 20) -> dict:
    """Compare eta's enclosure with the Mobius image of xi's, and (for
    unimodular ``A``) check the quotient tails agree."""
    depth = min(x.depth_cap, max(x.positivity_tail, eta.positivity_tail) + 8)
    image = mobius_interval(A, enclose(x, depth))
    own = enclose(eta, max(depth, eta.positivity_tail))
    q_xi = partial_quotients(x, n).quotients
    q_eta = partial_quotients(eta, n).quotients
    result = {"enclosures_agree": image.intersects(own),
              "quotients_xi": q_xi, "quotients_eta": q_eta,
              "unimodular": abs(det(A)) == 1, "serret": None}
    if abs(det(A)) == 1:
        result["serret"] = serret_check(q_xi, q_eta, min_overlap=min_overlap)
    return result


def reciprocal_quotients(x: ExtremalNumber, n: int) -> list[int]:
    """Certified partial quotients of ``1/xi``."""
    for depth in range(x.positivity_tail, x.depth_cap + 1):
        q, _ = interval_cf_extract(enclose(x, depth).reciprocal(), n)
        if len(q) >= n:
            return q
    return q


def find_conjugator_to_S(x: ExtremalNumber, window: Iterable[int],
                         test_indices: Iterable[int] | None = None):
    """First ``U_k = atoms(a_0..a_k)`` built from the quotients of ``1/xi``
    such that every conjugated term ``U_k^{-1} * W_i * U_k`` in the test
    range lies in S up to sign; None if the window is exhausted."""
    window = list(window)
    if not window:
        return None
    if test_indices is None:
        test_indices = range(x.positivity_tail + 6, x.positivity_tail + 10)
    test_indices = list(test_indices)
    quotients = reciprocal_quotients(x, max(window) + 1)
    for k in window:
        if k + 1 > len(quotients):
            break
        U = atoms_product(quotients[:k + 1])
        if all(in_S(C) or in_S(-C)
               for C in (conjugate(U, x.seq.term(i)) for i in test_indices)):
            return U
    return None


# --- Serret tail comparison ---------------------------------------------------

def serret_check(q1: Sequence[int], q2: Sequence[int], min_overlap: int = 5,
                 max_shift: int | None = None):
    """True if dropping some leading terms from each list leaves equal
    tails (compared up to the end of the shorter one), False if no shift
    works, None if no shift leaves ``min_overlap`` terms to compare."""
    q1, q2 = list(q1), list(q2)
    limit1 = len(q1) - min_overlap if max_shift is None else min(max_shift, len(q1) - min_overlap)
    limit2 = len(q2) - min_overlap if max_shift is None else min(max_shift, len(q2) - min_overlap)
    if limit1 < 0 or limit2 < 0:
        return None
    for s1 in range(limit1 + 1):
        for s2 in range(limit2 + 1):
            n = min(len(q1) - s1, len(q2) - s2)
            if n >= min_overlap and q1[s1:s1 + n] == q2[s2:s2 + n]:
                return True
    return False


# --- extremality witness ------------------------------------------------------

@dataclass
class ExtremalityWitness:
    x0: int
    x1: int
    x2: int
    X: int
    quality: RationalInterval
    error: RationalInterval
    source: str
    companion_index: int | None = None
    oracle: dict | None = None

    def to_json(self) -> dict:
        return {"x": [str(self.x0), str(self.x1), str(self.x2)], "X": str(self.X),
                "quality": _report(self.quality), "error": _report(self.error, 10 ** 40),
                "source": self.source,
                "companion_index": None if self.companion_index is None else str(self.companion_index),
                "oracle": self.oracle}


class WitnessError(ValueError):
    pass


def approximation_error(I: RationalInterval, x0: int, x1: int, x2: int) -> RationalInterval:
    """``max(|x0 xi - x1|, |x0 xi^2 - x2|)`` over xi in ``I``."""
    return abs(x0 * I - x1).max_with(abs(x0 * I * I - x2))


def x_power_bounds(X: int) -> RationalInterval:
    """Rational bounds for ``X^{1/gamma}``."""
    lo, _ = integer_root_bounds(X ** INV_GAMMA_LOWER.numerator, INV_GAMMA_LOWER.denominator)
    _, hi = integer_root_bounds(X ** INV_GAMMA_UPPER.numerator, INV_GAMMA_UPPER.denominator)
    return RationalInterval(lo, hi)


def _brute_force(xi: Fraction, X: int):
    best = None
    xi2 = xi * xi
    for x0 in range(1, X + 1):
        x1, x2 = round(x0 * xi), round(x0 * xi2)
        err = max(abs(x0 * xi - x1), abs(x0 * xi2 - x2))
        if best is None or err < best[0]:
            best = (err, x0, x1, x2)
    return best


def extremality_witness(x: ExtremalNumber, X: int, brute_limit: int = 10 ** 4,
                        oracle_factor: int = 100, depth: int | None = None) -> ExtremalityWitness:
    """Integer point ``(x0, x1, x2)`` with ``|x0| <= X`` taken from the
    symmetric companions, with the certified quality
    ``max(|x0 xi - x1|, |x0 xi^2 - x2|) X^{1/gamma}``.

    For ``X <= brute_limit`` an exhaustive search over ``x0 <= X`` is run
    and the companion must be within ``oracle_factor`` of its optimum.
    """
    if X < 1:
        raise ValueError("X must be at least 1")
    witness = x.witness
    if witness is None or witness.N is None:
        raise WitnessError("no admissibility witness for this sequence")
    if depth is None:
        depth = x.positivity_tail + 1
        while norm(x.seq.term(depth)) <= max(X, 100) ** 3 and depth < x.depth_cap:
            depth += 1
    I = enclose(x, depth)
    best = None
    over = 0
    i = 1
    while over < 2:
        y = reduce(x.seq.term(i) @ witness.N_at(i))
        if y.a != 0:
            if abs(y.a) <= X:
                best = (i, y if y.a > 0 else -y)
                over = 0
            else:
                over += 1
        i += 1
        if i > depth:
            break
    powers = x_power_bounds(X)
    oracle = None
    if X <= brute_limit:
        err, b0, b1, b2 = _brute_force(I.midpoint.limit_denominator(10 ** 60), X)
        oracle = {"x": [str(b0), str(b1), str(b2)], "error": format_rational(err)}
    if best is None:
        if oracle is None:
            raise WitnessError(f"X={X} below first companion")
        b0, b1, b2 = (int(s) for s in oracle["x"])
        error = approximation_error(I, b0, b1, b2)
        return ExtremalityWitness(b0, b1, b2, X, error * powers, error, "oracle", None, oracle)
    i, y = best
    error = approximation_error(I, y.a, y.b, y.d)
    if oracle is not None:
        optimum = Fraction(oracle["error"])
        ratio = error.hi / optimum if optimum else None
        oracle["ratio"] = None if ratio is None else _decimal(ratio)
        if ratio is None or ratio > oracle_factor:
            raise WitnessError(f"companion error {error} is more than {oracle_factor} "
                               f"times the exhaustive optimum {optimum}")
    return ExtremalityWitness(y.a, y.b, y.d, X, error * powers, error, "companion", i, oracle)
