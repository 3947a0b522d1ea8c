"""Command line front end.

Every report is deterministic: keys are sorted, numbers are decimal strings
and identical arguments produce identical bytes.  Exit codes: 0 when every
exact invariant holds, 2 for usage errors (including operations that do
not apply to the given sequence), 3 when an exact invariant is violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from fractions import Fraction

from . import __version__
from .exact import RationalInterval
from .lab import (BracketingError, ExtremalNumber, NoPositiveTailError, WitnessError,
                  check_conjugation, conjugate_action, enclose, extremality_witness,
                  partial_quotients, theorem_c_scan, verify_associated)
from .mat2 import (ConeParams, Mat2Z, NotInGroupError, det, in_S, in_S1, in_Sr, norm,
                   reduce, same_up_to_sign, star, transpose)
from .sequences import (HypothesisError, check_det_hypotheses, det_pattern_check,
                        is_eventually_bounded, solve_admissibility_witness, verify_witness)
from .specs import SpecError, load_spec, preset
from .words import (FibWordSeq, factor_characterization, factor_gl2, parse_word, sigma,
                    sigma_inverse)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 2, 3


class UsageError(Exception):
    pass


class Violation(Exception):
    pass


# --- argument helpers -------------------------------------------------------

def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def parse_matrix(text: str) -> Mat2Z:
    """``a,b,c,d`` or JSON ``[[a,b],[c,d]]``."""
    text = text.strip()
    try:
        if text.startswith("["):
            rows = json.loads(text)
            return Mat2Z.of([[int(x) for x in row] for row in rows])
        values = [int(x) for x in text.split(",")]
    except (ValueError, TypeError, json.JSONDecodeError):
        raise UsageError(f"cannot parse matrix {text!r}") from None
    if len(values) != 4:
        raise UsageError(f"matrix needs 4 entries, got {len(values)}")
    return Mat2Z(*values)


def load_sequence(args):
    try:
        if args.spec:
            seq = load_spec(args.spec)
        elif args.preset:
            seq = preset(args.preset)
        else:
            raise UsageError("give --spec FILE or --preset NAME")
    except (SpecError, NotInGroupError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    return seq


def build_number(args) -> ExtremalNumber:
    seq = load_sequence(args)
    try:
        return ExtremalNumber(seq, depth_cap=args.depth_cap)
    except NoPositiveTailError as exc:
        raise UsageError(f"{seq.label or 'sequence'} has no positive tail: {exc}") from None


def _matrix_rows(W: Mat2Z):
    return W.to_json()["rows"]


# --- commands -----------------------------------------------------------------

def cmd_fibword(args):
    try:
        w1, w2 = parse_word(args.w1), parse_word(args.w2)
        seq = FibWordSeq(w1, w2)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if args.term is not None:
        word = seq.term(args.term)
    else:
        if args.prefix > 0 and not (w1 or w2):
            raise UsageError("both words are empty")
        word = seq.limit_prefix(args.prefix)
    text = word if isinstance(word, str) else ",".join(map(str, word))
    if args.format == "json":
        return {"w1": args.w1, "w2": args.w2, "word": text, "length": str(len(word))}, []
    return text, None


def cmd_construct(args):
    seq = load_sequence(args)
    depth = args.depth or 12
    records = []
    for i, W in enumerate(seq.terms(depth), start=1):
        records.append({"i": str(i), "W": json.dumps(_matrix_rows(W)), "det": str(det(W)),
                        "norm_digits": str(len(str(norm(W))))})
    flags = []
    bounded = is_eventually_bounded(seq, max(depth, 24))
    if bounded:
        flags.append("bounded sequence: not extremal-eligible")
    violations = []
    witness = solve_admissibility_witness(seq.W1, seq.W2, depth=depth)
    if witness is not None and witness.N is not None:
        bad = verify_witness(seq.with_policy("raw"), witness.N, depth)
        if bad is not None:
            violations.append(f"W_i N_i not symmetric at i={bad}")
    det_report = None
    m = det(seq.W1)
    if det(seq.W2) == m and abs(m) > 1:
        try:
            check_det_hypotheses(seq.W1, seq.W2, m)
        except HypothesisError:
            pass
        else:
            det_report = det_pattern_check(seq.W1, seq.W2, m, depth)
            violations.extend(det_report.violations)
    summary = {"label": seq.label, "sequence": seq.to_json(), "depth": str(depth),
               "dets": [r["det"] for r in records],
               "unimodular": all(abs(int(r["det"])) == 1 for r in records),
               "bounded": bounded, "flags": flags,
               "witness": witness.to_json() if witness else None,
               "det_pattern": det_report.to_json() if det_report else None,
               "violations": violations}
    if violations:
        raise Violation(summary, records)
    return summary, records


def cmd_expand(args):
    x = build_number(args)
    try:
        expansion = partial_quotients(x, args.n)
        I = enclose(x, expansion.depth)
    except BracketingError as exc:
        raise Violation({"label": x.seq.label, "violations": [str(exc)]}, [])
    q = expansion.quotients
    summary = {"label": x.seq.label, "n": str(args.n), "depth": str(expansion.depth),
               "complete": expansion.complete, "certified": str(len(q)),
               "positivity_tail": str(x.positivity_tail),
               "max_partial_quotient": str(max(q[1:])) if len(q) > 1 else None,
               "quotients": [str(a) for a in q],
               "enclosure": I.outward(10 ** 30).to_json()}
    records = [{"k": str(k), "a": str(a)} for k, a in enumerate(q)]
    return summary, records


def cmd_verify(args):
    x = build_number(args)
    try:
        report = verify_associated(x, args.start, args.stop, depth=args.depth,
                                   band_ratio_max=Fraction(args.band_ratio_max))
    except BracketingError as exc:
        raise Violation({"label": x.seq.label, "violations": [str(exc)]}, [])
    return report.summary(), report.to_records()


def cmd_scan_det(args):
    x = build_number(args)
    try:
        scan = theorem_c_scan(x, args.prefix_len, depth=args.depth,
                              n_quotients=args.quotients)
    except BracketingError as exc:
        raise Violation({"label": x.seq.label, "violations": [str(exc)]}, [])
    summary, records = scan.summary(), scan.to_records()
    if scan.violations:
        raise Violation(summary, records)
    return summary, records


def cmd_factor(args):
    A = parse_matrix(args.matrix)
    try:
        quotients = factor_gl2(A)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = {"matrix": _matrix_rows(A), "det": str(det(A)),
               "quotients": [str(a) for a in quotients],
               "characterization": factor_characterization(A, quotients),
               "in_S": in_S(A), "sigma_inverse": None}
    if in_S(A):
        summary["sigma_inverse"] = [str(a) for a in sigma_inverse(A)]
    if not summary["characterization"]:
        raise Violation(summary, [])
    return summary, []


def cmd_conjugate(args):
    x = build_number(args)
    A = parse_matrix(args.matrix)
    if det(A) == 0:
        raise UsageError("conjugating matrix must be non-singular")
    x._witness = x.witness
    try:
        eta = conjugate_action(A, x)
        result = check_conjugation(reduce(A), x, eta, n=args.n)
    except NoPositiveTailError as exc:
        raise UsageError(f"conjugate sequence has no positive tail: {exc}") from None
    except (BracketingError, ArithmeticError) as exc:
        raise Violation({"label": x.seq.label, "violations": [str(exc)]}, [])
    summary = {"label": x.seq.label, "matrix": _matrix_rows(A),
               "conjugate": eta.seq.to_json(),
               "enclosures_agree": result["enclosures_agree"],
               "unimodular": result["unimodular"], "serret": result["serret"],
               "quotients_xi": [str(a) for a in result["quotients_xi"]],
               "quotients_eta": [str(a) for a in result["quotients_eta"]]}
    if not result["enclosures_agree"] or result["serret"] is False:
        raise Violation(summary, [])
    return summary, []


def cmd_witness(args):
    x = build_number(args)
    try:
        w = extremality_witness(x, args.X)
    except WitnessError as exc:
        raise Violation({"label": x.seq.label, "violations": [str(exc)]}, [])
    return {"label": x.seq.label, **w.to_json()}, []


def cmd_check(args):
    """Randomized property checks driven by ``--seed``."""
    rng = random.Random(args.seed)
    failures = []
    cone = ConeParams(Fraction(1, 2))
    counts = {"sigma_roundtrip": 0, "factor": 0, "star_assoc": 0, "s_half_norm": 0,
              "s1_closure": 0}
    for _ in range(args.count):
        w = tuple(rng.randint(1, 9) for _ in range(rng.randint(0, 12)))
        if sigma_inverse(sigma(w)) != w:
            failures.append({"check": "sigma_roundtrip", "word": list(map(str, w))})
        counts["sigma_roundtrip"] += 1

        q = [rng.randint(0, 9)] + [rng.randint(1, 9) for _ in range(rng.randint(1, 8))]
        A = sigma(q[1:]) if q[0] == 0 else sigma(q)
        if A.d >= 1:
            f = factor_gl2(A)
            if not factor_characterization(A, f):
                failures.append({"check": "factor", "matrix": _matrix_rows(A)})
            counts["factor"] += 1

        mats = [_random_group_element(rng) for _ in range(3)]
        P, Q, R = mats
        if not same_up_to_sign(star(star(P, Q), R), star(P, star(Q, R))):
            failures.append({"check": "star_assoc"})
        counts["star_assoc"] += 1

        B, C = _random_cone_element(rng, cone), _random_cone_element(rng, cone)
        if not 2 * norm(B @ C) > norm(B) * norm(C):
            failures.append({"check": "s_half_norm", "A": _matrix_rows(B),
                             "B": _matrix_rows(C)})
        counts["s_half_norm"] += 1
        D, E = _random_s1_element(rng), _random_s1_element(rng)
        if not (in_S1(D @ E) and in_S1(transpose(D))):
            failures.append({"check": "s1_closure", "A": _matrix_rows(D),
                             "B": _matrix_rows(E)})
        counts["s1_closure"] += 1
    summary = {"seed": str(args.seed), "count": str(args.count),
               "checks": {k: str(v) for k, v in counts.items()},
               "failures": failures}
    if failures:
        raise Violation(summary, [])
    return summary, []


def _random_group_element(rng) -> Mat2Z:
    while True:
        A = Mat2Z(*(rng.randint(-20, 20) for _ in range(4)))
        if det(A) != 0:
            return reduce(A)


def _random_s1_element(rng) -> Mat2Z:
    d = rng.randint(0, 30)
    b, c = rng.randint(d, 60), rng.randint(d, 60)
    return Mat2Z(rng.randint(max(b, c), 120), b, c, d)


def _random_cone_element(rng, cone: ConeParams) -> Mat2Z:
    # rejection sampling with b, c >= r d and a >= r max(b, c)
    r = cone.r
    while True:
        d = rng.randint(1, 30)
        b = rng.randint(-(-d * r.numerator // r.denominator), 60)
        c = rng.randint(-(-d * r.numerator // r.denominator), 60)
        low = max(b, c) * r
        a = rng.randint(-(-low.numerator // low.denominator), 120)
        A = Mat2Z(a, b, c, d)
        if in_Sr(A, cone):
            return A


# --- output -------------------------------------------------------------------

def render(summary, records, fmt: str) -> str:
    if records is None:
        return f"{summary}\n" if summary else ""
    if fmt == "csv":
        buf = io.StringIO()
        if records:
            fields = list(records[0])
            writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            for r in records:
                writer.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()
    # JSON lines: the summary first, then one line per record
    lines = [{"type": "summary", **summary}] + [{"type": "record", **r} for r in records]
    return "".join(json.dumps(line, sort_keys=True, default=_json_default) + "\n"
                   for line in lines)


def _cell(v):
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, RationalInterval):
        return obj.to_json()
    if isinstance(obj, Mat2Z):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--depth", type=positive_int, metavar="K")
    common.add_argument("--depth-cap", type=positive_int, default=40, metavar="K",
                        help="deepest term used for enclosures")
    common.add_argument("-v", "--verbose", action="store_true")

    seqopts = argparse.ArgumentParser(add_help=False)
    src = seqopts.add_mutually_exclusive_group()
    src.add_argument("--spec", metavar="FILE", help="sequence spec JSON")
    src.add_argument("--preset", metavar="NAME",
                     help="thmD:<m>, xi:<a>,<b>, sigma:<w1>/<w2> or period6")

    parser = argparse.ArgumentParser(prog="extremal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fibword", parents=[common], help="Fibonacci word prefixes and terms")
    p.set_defaults(func=cmd_fibword, format=None)
    p.add_argument("--w1", required=True, help="word over ab or comma separated integers")
    p.add_argument("--w2", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--prefix", type=nonnegative_int, metavar="N")
    g.add_argument("--term", type=positive_int, metavar="K")

    p = sub.add_parser("construct", parents=[common, seqopts], help="sequence summary")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("expand", parents=[common, seqopts], help="certified partial quotients")
    p.set_defaults(func=cmd_expand)
    p.add_argument("-n", type=positive_int, default=100)

    p = sub.add_parser("verify", parents=[common, seqopts], help="growth and band diagnostics")
    p.set_defaults(func=cmd_verify)
    p.add_argument("--start", type=positive_int, default=5)
    p.add_argument("--stop", type=positive_int, default=20)
    p.add_argument("--band-ratio-max", default="1000")

    p = sub.add_parser("scan-det", parents=[common, seqopts], help="prefix determinant scan")
    p.set_defaults(func=cmd_scan_det)
    p.add_argument("--prefix-len", type=positive_int, default=200, metavar="L")
    p.add_argument("--quotients", type=nonnegative_int, default=200)

    p = sub.add_parser("factor", parents=[common], help="atom factorization of a GL2(Z) matrix")
    p.set_defaults(func=cmd_factor)
    p.add_argument("--matrix", required=True, help="a,b,c,d")

    p = sub.add_parser("conjugate", parents=[common, seqopts], help="conjugate a sequence")
    p.set_defaults(func=cmd_conjugate)
    p.add_argument("--matrix", required=True, help="a,b,c,d")
    p.add_argument("-n", type=positive_int, default=60)

    p = sub.add_parser("witness", parents=[common, seqopts], help="extremality witness")
    p.set_defaults(func=cmd_witness)
    p.add_argument("-X", type=positive_int, required=True)

    p = sub.add_parser("check", parents=[common], help="seeded randomized property checks")
    p.set_defaults(func=cmd_check)
    p.add_argument("--count", type=positive_int, default=200)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fmt = args.format or "json"
    try:
        if args.command == "verify" and args.depth is not None and args.depth < args.stop + 2:
            raise UsageError("--depth must be at least --stop + 2")
        summary, records = args.func(args)
    except UsageError as exc:
        print(f"extremal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Violation as exc:
        summary, records = exc.args
        emit(render(summary, records, fmt), args.out)
        print("extremal: exact invariant violated", file=sys.stderr)
        return EXIT_VIOLATION
    emit(render(summary, records, fmt), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
