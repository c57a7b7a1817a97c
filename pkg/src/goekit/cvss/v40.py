"""CVSS v4.0 base (CVSS-B) scoring via the MacroVector procedure.

The published MacroVector tables (270 expert-assigned scores, the
highest-severity vector per equivalence class and the class depths) are
vendored in ``data/cvss40_macrovectors.json`` and verified against the
checksum embedded in the file at load time.

Only the base metric group drives the score. Threat and environmental
metrics present on a vector are ignored here, which matches the CVSS-B
nomenclature: unspecified threat metrics default to the worst case
(E:A) and unspecified requirements to H.
"""

from __future__ import annotations

import hashlib
import json
import math
from functools import lru_cache
from importlib import resources
from typing import Mapping

from .vector import CvssScore, CvssV40Vector

_DATA_RESOURCE = "cvss40_macrovectors.json"

# Ordinal position of each metric value within its severity scale; used
# for severity distances inside a MacroVector. Lower is more severe.
_LEVELS: Mapping[str, Mapping[str, int]] = {
    "AV": {"N": 0, "A": 1, "L": 2, "P": 3},
    "PR": {"N": 0, "L": 1, "H": 2},
    "UI": {"N": 0, "P": 1, "A": 2},
    "AC": {"L": 0, "H": 1},
    "AT": {"N": 0, "P": 1},
    "VC": {"H": 0, "L": 1, "N": 2},
    "VI": {"H": 0, "L": 1, "N": 2},
    "VA": {"H": 0, "L": 1, "N": 2},
    "SC": {"H": 1, "L": 2, "N": 3},
    "SI": {"S": 0, "H": 1, "L": 2, "N": 3},
    "SA": {"S": 0, "H": 1, "L": 2, "N": 3},
    "CR": {"H": 0, "M": 1, "L": 2},
    "IR": {"H": 0, "M": 1, "L": 2},
    "AR": {"H": 0, "M": 1, "L": 2},
}

# CVSS-B defaults for the non-base metrics the procedure consults.
_DEFAULTS = {"E": "A", "CR": "H", "IR": "H", "AR": "H"}


class MacroVectorDataError(Exception):
    """The vendored table file is missing, malformed or corrupted."""


@lru_cache(maxsize=1)
def load_tables() -> dict:
    """Load and checksum-verify the vendored MacroVector tables."""
    try:
        raw = (
            resources.files(__package__).joinpath("data", _DATA_RESOURCE).read_text()
        )
    except OSError as exc:
        raise MacroVectorDataError(f"cannot read {_DATA_RESOURCE}: {exc}") from exc
    doc = json.loads(raw)
    if doc.get("format_version") != 1:
        raise MacroVectorDataError(
            f"unsupported table format {doc.get('format_version')!r}"
        )
    tables = {
        key: doc[key] for key in ("macrovector_scores", "max_composed", "max_severity")
    }
    blob = json.dumps(tables, sort_keys=True, separators=(",", ":")).encode()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != doc["sha256"]:
        raise MacroVectorDataError(
            f"table checksum mismatch: expected {doc['sha256']}, got {digest}"
        )
    if len(tables["macrovector_scores"]) != 270:
        raise MacroVectorDataError(
            f"expected 270 MacroVector scores, got {len(tables['macrovector_scores'])}"
        )
    return tables


def _metric(vector: CvssV40Vector, name: str) -> str:
    if name in _DEFAULTS:
        return _DEFAULTS[name]
    return vector[name]


def macrovector(vector: CvssV40Vector) -> str:
    """Six-digit equivalence class of a vector (EQ1..EQ6)."""
    av, pr, ui = vector["AV"], vector["PR"], vector["UI"]
    if av == "N" and pr == "N" and ui == "N":
        eq1 = 0
    elif av != "P" and (av == "N" or pr == "N" or ui == "N"):
        eq1 = 1
    else:
        eq1 = 2

    eq2 = 0 if (vector["AC"] == "L" and vector["AT"] == "N") else 1

    vc, vi, va = vector["VC"], vector["VI"], vector["VA"]
    if vc == "H" and vi == "H":
        eq3 = 0
    elif vc == "H" or vi == "H" or va == "H":
        eq3 = 1
    else:
        eq3 = 2

    # EQ4 level 0 needs MSI:S/MSA:S, which base-only scoring never sets.
    eq4 = 1 if "H" in (vector["SC"], vector["SI"], vector["SA"]) else 2

    eq5 = {"A": 0, "P": 1, "U": 2}[_metric(vector, "E")]

    # With CR/IR/AR defaulting to H, EQ6 is 0 iff any vulnerable-system
    # impact is H.
    eq6 = 0 if "H" in (vc, vi, va) else 1

    return f"{eq1}{eq2}{eq3}{eq4}{eq5}{eq6}"


def _parse_max_vector(composed: str) -> dict[str, str]:
    parts = [p for p in composed.split("/") if p]
    return dict(part.split(":", 1) for part in parts)


def _severity_distances(
    vector: CvssV40Vector, max_vector: Mapping[str, str]
) -> dict[str, int] | None:
    """Per-metric distances from a candidate class maximum.

    Returns None when any distance is negative, i.e. the candidate is
    not actually at-or-above the scored vector.
    """
    distances: dict[str, int] = {}
    for name, levels in _LEVELS.items():
        distance = levels[_metric(vector, name)] - levels[max_vector[name]]
        if distance < 0:
            return None
        distances[name] = distance
    return distances


def score_v40(vector: CvssV40Vector) -> CvssScore:
    """CVSS-B score: MacroVector lookup plus severity-distance interpolation."""
    tables = load_tables()
    lookup: Mapping[str, float] = tables["macrovector_scores"]
    max_composed = tables["max_composed"]
    max_severity = tables["max_severity"]

    if all(vector[m] == "N" for m in ("VC", "VI", "VA", "SC", "SI", "SA")):
        return CvssScore.of(0.0)

    mv = macrovector(vector)
    value = lookup[mv]
    eq1, eq2, eq3, eq4, eq5, eq6 = (int(c) for c in mv)

    def lower(**bump: int) -> float | None:
        digits = {
            "eq1": eq1, "eq2": eq2, "eq3": eq3, "eq4": eq4, "eq5": eq5, "eq6": eq6,
        }
        digits.update({k: digits[k] + v for k, v in bump.items()})
        key = "".join(
            str(digits[k]) for k in ("eq1", "eq2", "eq3", "eq4", "eq5", "eq6")
        )
        return lookup.get(key)

    lower_eq1 = lower(eq1=1)
    lower_eq2 = lower(eq2=1)
    if eq3 == 1 and eq6 == 1:
        lower_eq3eq6 = lower(eq3=1)
    elif eq3 == 0 and eq6 == 1:
        lower_eq3eq6 = lower(eq3=1)
    elif eq3 == 1 and eq6 == 0:
        lower_eq3eq6 = lower(eq6=1)
    elif eq3 == 0 and eq6 == 0:
        candidates = [lower(eq6=1), lower(eq3=1)]
        defined = [c for c in candidates if c is not None]
        lower_eq3eq6 = max(defined) if defined else None
    else:
        lower_eq3eq6 = lower(eq3=1, eq6=1)
    lower_eq4 = lower(eq4=1)
    lower_eq5 = lower(eq5=1)

    # Find the highest-severity vector of this class that dominates the
    # scored vector, then measure how far inside the class it sits.
    distances: dict[str, int] | None = None
    for c1 in max_composed["eq1"][str(eq1)]:
        for c2 in max_composed["eq2"][str(eq2)]:
            for c36 in max_composed["eq3eq6"][str(eq3)][str(eq6)]:
                for c4 in max_composed["eq4"][str(eq4)]:
                    for c5 in max_composed["eq5"][str(eq5)]:
                        max_vector = _parse_max_vector(c1 + c2 + c36 + c4 + c5)
                        distances = _severity_distances(vector, max_vector)
                        if distances is not None:
                            break
                    if distances is not None:
                        break
                if distances is not None:
                    break
            if distances is not None:
                break
        if distances is not None:
            break
    assert distances is not None, "no dominating class maximum found"

    dist_eq1 = distances["AV"] + distances["PR"] + distances["UI"]
    dist_eq2 = distances["AC"] + distances["AT"]
    dist_eq3eq6 = (
        distances["VC"] + distances["VI"] + distances["VA"]
        + distances["CR"] + distances["IR"] + distances["AR"]
    )
    dist_eq4 = distances["SC"] + distances["SI"] + distances["SA"]

    n_lower = 0
    mean_sum = 0.0
    for available, distance, depth in (
        (lower_eq1, dist_eq1, max_severity["eq1"][str(eq1)]),
        (lower_eq2, dist_eq2, max_severity["eq2"][str(eq2)]),
        (lower_eq3eq6, dist_eq3eq6, max_severity["eq3eq6"][str(eq3)][str(eq6)]),
        (lower_eq4, dist_eq4, max_severity["eq4"][str(eq4)]),
        (lower_eq5, 0, max_severity["eq5"][str(eq5)]),
    ):
        if available is None:
            continue
        n_lower += 1
        mean_sum += (value - available) * (distance / depth)

    if n_lower:
        value -= mean_sum / n_lower
    value = min(max(value, 0.0), 10.0)
    # Round half up at one decimal with the reference calculator's 1e-6
    # epsilon, which absorbs binary-float noise in the mean distance.
    return CvssScore.of(math.floor(10 * (value + 1e-6) + 0.5) / 10)
