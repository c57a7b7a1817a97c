"""CVSS v3.1 base score equations."""

from __future__ import annotations

import math

from .vector import CvssScore, CvssV31Vector

_AV = {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2}
_AC = {"L": 0.77, "H": 0.44}
_PR_UNCHANGED = {"N": 0.85, "L": 0.62, "H": 0.27}
_PR_CHANGED = {"N": 0.85, "L": 0.68, "H": 0.5}
_UI = {"N": 0.85, "R": 0.62}
_CIA = {"H": 0.56, "L": 0.22, "N": 0.0}


def roundup(value: float) -> float:
    """Smallest number with one decimal place >= value.

    Works on a 1e-5-scaled integer to dodge binary-float artifacts, as
    the v3.1 specification prescribes.
    """
    scaled = int(round(value * 100000))
    if scaled % 10000 == 0:
        return scaled / 100000.0
    return (math.floor(scaled / 10000) + 1) / 10.0


def score_v31(vector: CvssV31Vector) -> CvssScore:
    """Base score per the v3.1 equations (scope-aware, roundup rounding)."""
    changed = vector["S"] == "C"
    iss = 1.0 - (1.0 - _CIA[vector["C"]]) * (1.0 - _CIA[vector["I"]]) * (
        1.0 - _CIA[vector["A"]]
    )
    if changed:
        impact = 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02) ** 15
    else:
        impact = 6.42 * iss
    pr = (_PR_CHANGED if changed else _PR_UNCHANGED)[vector["PR"]]
    exploitability = 8.22 * _AV[vector["AV"]] * _AC[vector["AC"]] * pr * _UI[vector["UI"]]
    if impact <= 0:
        return CvssScore.of(0.0)
    if changed:
        value = roundup(min(1.08 * (impact + exploitability), 10.0))
    else:
        value = roundup(min(impact + exploitability, 10.0))
    return CvssScore.of(value)
