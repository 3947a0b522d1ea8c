import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal.exact import RationalInterval, interval_cf_extract, rational_cf
from extremal.lab import (GAMMA, BracketingError, ExtremalNumber, NoPositiveTailError,
                          WitnessError, check_conjugation, column_ratio_interval,
                          conjugate_action, enclose, extremality_witness, find_conjugator_to_S,
                          lemma_uv_band, mobius_interval, partial_quotients,
                          positivity_tail_index, reciprocal_quotients, row_norm_interval,
                          serret_check, split_norm_band, theorem_c_scan, verify_associated,
                          x_power_bounds)
from extremal.mat2 import Mat2Z, det, norm
from extremal.sequences import period6_sequence, theorem_d_family
from extremal.specs import sigma_sequence, xi_sequence
from extremal.words import FibWordSeq, fib_prefix


@pytest.fixture(scope="module")
def m2():
    return ExtremalNumber(theorem_d_family(2).sequence())


@pytest.fixture(scope="module")
def xi12():
    return ExtremalNumber(xi_sequence(1, 2))


def word_quotients(a, b, n):
    return [0] + [a if letter == "a" else b for letter in fib_prefix(n - 1)]


# --- positivity and enclosures -------------------------------------------------

def test_positivity_tail(m2, xi12):
    assert m2.positivity_tail == 2
    assert xi12.positivity_tail == 3
    # first term of an S-sequence with d >= 1
    assert positivity_tail_index(sigma_sequence((3,), (1, 2))) == 2
    with pytest.raises(NoPositiveTailError, match="no positive tail"):
        positivity_tail_index(period6_sequence())


def test_enclosure_examples(m2, xi12):
    W = Mat2Z.of([[4, 3], [3, 2]])
    assert xi12.seq.term(4) == W
    assert column_ratio_interval(W) == RationalInterval(Fraction(2, 3), Fraction(3, 4))
    assert enclose(xi12, 4) == RationalInterval(Fraction(2, 3), Fraction(3, 4))
    I5, I6 = enclose(m2, 5), enclose(m2, 6)
    assert I6.issubset(I5) and I6 != I5


@pytest.mark.parametrize("make", [lambda: theorem_d_family(2).sequence(),
                                  lambda: theorem_d_family(-3).sequence(),
                                  lambda: xi_sequence(1, 2), lambda: xi_sequence(2, 5)])
def test_enclosures_nest_strictly(make):
    x = ExtremalNumber(make())
    intervals = [enclose(x, k) for k in range(x.positivity_tail, 19)]
    for outer, inner in zip(intervals, intervals[1:]):
        assert inner.issubset(outer)
        assert inner.width < outer.width
    for k, I in enumerate(intervals):
        for J in intervals[k:]:
            assert J.issubset(I)


def test_bracketing_failure_detected():
    x = ExtremalNumber(theorem_d_family(2).sequence())
    enclose(x, 6)
    x._enclosures[6] = RationalInterval(Fraction(0), Fraction(1, 10 ** 9))
    with pytest.raises(BracketingError, match="bracketing failed"):
        enclose(x, 7)
    with pytest.raises(ValueError):
        enclose(x, 1)


# --- partial quotients ---------------------------------------------------------------

def test_quotients_match_words(xi12):
    exp = partial_quotients(xi12, 120)
    assert exp.complete
    assert exp.quotients == word_quotients(1, 2, 120)
    other = ExtremalNumber(sigma_sequence((3,), (1, 2)))
    q = partial_quotients(other, 120).quotients
    assert q[:9] == [0, 1, 2, 3, 1, 2, 1, 2, 3]
    assert q == [0] + list(FibWordSeq((3,), (1, 2)).limit_prefix(119))


@pytest.mark.parametrize("a, b", [(2, 1), (1, 3), (4, 2)])
def test_quotients_of_xi_ab(a, b):
    x = ExtremalNumber(xi_sequence(a, b))
    assert partial_quotients(x, 80).quotients == word_quotients(a, b, 80)


def test_m2_quotients(m2):
    exp = partial_quotients(m2, 200)
    assert exp.complete and len(exp.quotients) == 200
    assert exp.quotients[:9] == [0, 1, 4, 2, 4, 1, 1, 1, 2]
    assert max(exp.quotients[1:]) <= 10


def test_quotient_stability(m2):
    previous = []
    for depth in range(2, 18):
        q, _ = interval_cf_extract(enclose(m2, depth), 10 ** 6)
        assert q[:len(previous)] == previous
        previous = q


def test_depth_cap_flags_incomplete():
    x = ExtremalNumber(theorem_d_family(2).sequence(), depth_cap=6)
    exp = partial_quotients(x, 500)
    assert not exp.complete and len(exp.quotients) < 500


def test_quotients_against_decimal_oracle(m2):
    # a float of the midpoint agrees with the first few certified quotients
    I = enclose(m2, 12)
    value = float(I.midpoint)
    q = []
    for _ in range(8):
        a = math.floor(value)
        q.append(a)
        value = 1 / (value - a)
    assert partial_quotients(m2, 8).quotients == q


# --- row norms -----------------------------------------------------------------------------

@settings(max_examples=300)
@given(st.integers(-50, 50), st.integers(1, 50), st.integers(1, 200),
       st.lists(st.integers(-30, 30), min_size=4, max_size=4))
def test_row_norm_interval_exact(num, width, den, entries):
    A = Mat2Z(*entries)
    I = RationalInterval(Fraction(num, den), Fraction(num + width, den))

    def f(t):
        return max(abs(t * A.a - A.c), abs(t * A.b - A.d))

    out = row_norm_interval(I, A)
    samples = [I.lo + (I.hi - I.lo) * Fraction(k, 40) for k in range(41)]
    for t in samples:
        assert f(t) in out
    # a convex piecewise-linear function: max at an endpoint, min at an
    # endpoint or at a kink where a linear piece vanishes or two pieces meet
    assert out.hi == max(f(I.lo), f(I.hi))
    candidates = [I.lo, I.hi]
    for p, q in ((A.a, A.c), (A.b, A.d), (A.a - A.b, A.c - A.d), (A.a + A.b, A.c + A.d)):
        if p != 0 and Fraction(q, p) in I:
            candidates.append(Fraction(q, p))
    assert out.lo == min(f(t) for t in candidates)


# --- diagnostics --------------------------------------------------------------------------

@pytest.mark.parametrize("which", ["m2", "xi12"])
def test_verify_associated(which, request):
    x = request.getfixturevalue(which)
    report = verify_associated(x, 5, 20)
    e10, e20 = report.exponent(10), report.exponent(20)
    assert abs(e20 - GAMMA) < abs(e10 - GAMMA)
    assert 1.55 <= e20 <= 1.70
    assert report.bands["approx_product_ratio"] < 1000
    assert report.thresholds["band_ratio_max"] == 1000
    assert not report.warnings
    assert all(abs(r["det"]) <= 2 for r in report.records if r["i"] >= 10)
    summary = report.summary()
    assert summary["thresholds"] == {"band_ratio_max": "1000"}
    assert report.theta is not None


def test_band_breach_warns_only(m2):
    report = verify_associated(m2, 5, 20, band_ratio_max=Fraction(3, 2))
    assert report.warnings


# --- prefix scan ------------------------------------------------------------------------------

def test_theorem_c_scan_m2(m2):
    scan = theorem_c_scan(m2, 200, n_quotients=200)
    assert scan.lower_bound_ok and not scan.violations
    assert scan.det_bounded and scan.max_abs_det == 2
    for r in scan.records:
        assert r["det"] == (2 if r["i"] % 2 else 1)
        assert r["lower"].lo >= 1
        assert r["m"] >= 1
    assert scan.quotients_checked == 200
    assert scan.split_band.lo > 0


def test_theorem_c_scan_s_sequence(xi12):
    scan = theorem_c_scan(xi12, 144)
    assert all(abs(r["det"]) == 1 for r in scan.records)
    assert scan.lower_bound_ok
    rho = [r["rho"] for r in scan.records]
    assert min(I.lo for I in rho) > 0
    assert max(I.hi for I in rho) / min(I.lo for I in rho) < 100


def test_split_norm_band_positive():
    band = split_norm_band(theorem_d_family(2).sequence(), 8)
    # the max-entry norm satisfies ||UV|| <= 2 ||U|| ||V||
    assert 0 < band.lo <= band.hi <= 2
    assert lemma_uv_band(theorem_d_family(2).sequence(), 8) == band


# --- conjugation -----------------------------------------------------------------------------

def test_conjugation_identity(xi12):
    eta = conjugate_action(Mat2Z.identity(), xi12)
    result = check_conjugation(Mat2Z.identity(), xi12, eta, n=40)
    assert result["quotients_eta"] == result["quotients_xi"]
    assert result["enclosures_agree"] and result["serret"] is True


@pytest.mark.parametrize("which", ["m2", "xi12"])
def test_conjugation_by_swap_is_reciprocal(which, request):
    x = request.getfixturevalue(which)
    A = Mat2Z.of([[0, 1], [1, 0]])
    eta = conjugate_action(A, x)
    result = check_conjugation(A, x, eta, n=40)
    assert result["enclosures_agree"]
    assert result["quotients_eta"][:39] == result["quotients_xi"][1:40]
    assert reciprocal_quotients(x, 20) == result["quotients_xi"][1:21]


def test_unimodular_conjugation_preserves_tail(xi12):
    A = Mat2Z.of([[1, 1], [0, 1]])
    eta = conjugate_action(A, xi12)
    result = check_conjugation(A, xi12, eta)
    assert result["enclosures_agree"] and result["serret"] is True
    for B in (Mat2Z.of([[2, 1], [1, 1]]), Mat2Z.of([[1, 1], [1, 0]])):
        eta = conjugate_action(B, xi12)
        result = check_conjugation(B, xi12, eta)
        assert result["enclosures_agree"] and result["serret"] is True


def test_negative_conjugate_rejected(xi12):
    # eta = xi - 1 < 0 has no positive tail to enclose it
    with pytest.raises(NoPositiveTailError):
        conjugate_action(Mat2Z.of([[1, 0], [1, 1]]), xi12)


def test_non_unimodular_conjugation_recorded(xi12):
    A = Mat2Z.of([[2, 0], [0, 1]])
    eta = conjugate_action(A, xi12)
    result = check_conjugation(A, xi12, eta)
    assert result["enclosures_agree"] and result["serret"] is None


def test_conjugation_rejects_singular(xi12):
    with pytest.raises(ValueError):
        conjugate_action(Mat2Z(1, 2, 2, 4), xi12)


def test_mobius_pole():
    with pytest.raises(ZeroDivisionError):
        mobius_interval(Mat2Z(0, 1, 1, 0), RationalInterval(-1, 1))


def test_find_conjugator(m2, xi12):
    U = find_conjugator_to_S(xi12, range(0, 6))
    assert U is not None and abs(det(U)) == 1
    assert find_conjugator_to_S(m2, range(0, 12)) is None
    assert find_conjugator_to_S(xi12, []) is None


# --- Serret ------------------------------------------------------------------------------------

def test_serret_examples():
    q = word_quotients(1, 2, 60)
    assert serret_check(q, q[1:]) is True
    assert serret_check(q, q) is True
    f12 = word_quotients(1, 2, 300)[1:]
    f21 = word_quotients(2, 1, 300)[1:]
    assert serret_check(f12, f21, min_overlap=100) is False
    assert serret_check([1, 2], [1, 2], min_overlap=5) is None


# --- extremality witness --------------------------------------------------------------------------

def test_witness_at_companion_y4(xi12):
    y4 = xi12.seq.term(4) @ xi12.witness.N_at(4)
    w = extremality_witness(xi12, abs(y4.a))
    assert w.companion_index == 4
    assert (w.x0, w.x1, w.x2) == (y4.a, y4.b, y4.d)


def test_witness_x_equals_one(xi12):
    w = extremality_witness(xi12, 1)
    assert w.x0 == 1
    xi = float(enclose(xi12, 20).midpoint)
    assert w.oracle["x"] == ["1", str(round(xi)), str(round(xi * xi))]


@pytest.mark.parametrize("X", [10, 100, 1000])
def test_witness_against_brute_force(xi12, X):
    w = extremality_witness(xi12, X)
    assert w.source == "companion" and abs(w.x0) <= X
    assert Fraction(w.oracle["error"]) <= w.error.hi
    assert float(w.oracle["ratio"]) <= 100
    # X^(1/gamma) bounds and quality stay finite and positive
    assert 0 < w.quality.lo <= w.quality.hi < 10


def test_witness_below_first_companion(m2):
    with pytest.raises(WitnessError, match="below first companion"):
        extremality_witness(m2, 1, brute_limit=0)


@given(st.integers(1, 10 ** 12))
def test_x_power_bounds(X):
    I = x_power_bounds(X)
    assert I.lo <= X ** (1 / GAMMA) * (1 + 1e-9) and X ** (1 / GAMMA) <= I.hi * (1 + 1e-9)


def test_rational_cf_of_enclosure_endpoints(m2):
    # both endpoints of a deep enclosure share the certified prefix
    I = enclose(m2, 14)
    q, _ = interval_cf_extract(I, 10 ** 6)
    assert rational_cf(I.lo)[:len(q)] == q
    assert rational_cf(I.hi)[:len(q)] == q
    assert norm(m2.seq.term(14)) > 10 ** 100
