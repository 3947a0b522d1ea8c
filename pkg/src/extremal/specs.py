"""Sequence spec files and named presets.

A spec file is JSON::

    {"W1": {"rows": [["2", "2"], ["1", "2"]]},
     "W2": {"rows": [["4", "2"], ["3", "2"]]},
     "sign_policy": "canonical", "label": "thmD-m2"}

Instead of ``W1``/``W2`` a spec may give ``"sigma": {"w1": [...], "w2": [...]}``
(positive-integer words mapped through the atoms) or
``"family": {"name": "thmD", "m": "2"}`` / ``{"name": "period6"}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .mat2 import Mat2Z
from .sequences import FibMatrixSeq, period6_sequence, theorem_d_family
from .words import parse_word, sigma


class SpecError(ValueError):
    pass


def sigma_sequence(w1, w2, sign_policy="canonical", label="") -> FibMatrixSeq:
    label = label or "sigma:{}/{}".format(",".join(map(str, w1)), ",".join(map(str, w2)))
    return FibMatrixSeq(sigma(w1), sigma(w2), sign_policy, label)


def xi_sequence(a: int, b: int, sign_policy="canonical") -> FibMatrixSeq:
    """Sequence for ``[0, f_{a,b}]``: ``w1 = (b)``, ``w2 = (a)``."""
    return sigma_sequence((b,), (a,), sign_policy, label=f"xi:{a},{b}")


def sequence_from_spec(data: dict) -> FibMatrixSeq:
    policy = data.get("sign_policy", "canonical")
    label = data.get("label", "")
    if "W1" in data and "W2" in data:
        return FibMatrixSeq(Mat2Z.from_json(data["W1"]), Mat2Z.from_json(data["W2"]),
                            policy, label)
    if "sigma" in data:
        words = data["sigma"]
        w1 = tuple(int(x) for x in words["w1"])
        w2 = tuple(int(x) for x in words["w2"])
        return sigma_sequence(w1, w2, policy, label)
    if "family" in data:
        fam = data["family"]
        name = fam.get("name")
        if name == "thmD":
            seq = theorem_d_family(int(fam["m"])).sequence(policy)
        elif name == "period6":
            seq = period6_sequence(policy)
        else:
            raise SpecError(f"unknown family {name!r}")
        if label:
            seq.label = label
        return seq
    raise SpecError("spec needs W1/W2, sigma or family")


def load_spec(path) -> FibMatrixSeq:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    return sequence_from_spec(data)


def preset(name: str) -> FibMatrixSeq:
    """``thmD:<m>``, ``xi:<a>,<b>``, ``sigma:<w1>/<w2>`` or ``period6``."""
    kind, _, arg = name.partition(":")
    try:
        if kind == "thmD":
            return theorem_d_family(int(arg)).sequence()
        if kind == "xi":
            a, b = (int(t) for t in arg.split(","))
            return xi_sequence(a, b)
        if kind == "sigma":
            w1, w2 = arg.split("/")
            return sigma_sequence(parse_word(w1), parse_word(w2))
        if kind == "period6":
            return period6_sequence()
    except (ValueError, TypeError) as exc:
        raise SpecError(f"bad preset {name!r}: {exc}") from exc
    raise SpecError(f"unknown preset {name!r}")
