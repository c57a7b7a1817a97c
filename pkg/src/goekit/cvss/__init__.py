"""CVSS v3.1 and v4.0 vector parsing and base-score computation."""

from .v31 import score_v31
from .v40 import MacroVectorDataError, macrovector, score_v40
from .vector import (
    CvssError,
    CvssScore,
    CvssSyntaxError,
    CvssV31Vector,
    CvssV40Vector,
    DuplicateMetric,
    MissingMetric,
    OutOfRange,
    Severity,
    UnknownMetric,
    UnsupportedVersion,
    parse_cvss,
    severity_band,
)

__all__ = [
    "CvssError",
    "CvssScore",
    "CvssSyntaxError",
    "CvssV31Vector",
    "CvssV40Vector",
    "DuplicateMetric",
    "MacroVectorDataError",
    "MissingMetric",
    "OutOfRange",
    "Severity",
    "UnknownMetric",
    "UnsupportedVersion",
    "macrovector",
    "parse_cvss",
    "score_v31",
    "score_v40",
    "severity_band",
]


def score(vector_text: str) -> CvssScore:
    """Parse and score a vector string of either supported version."""
    vector = parse_cvss(vector_text)
    if isinstance(vector, CvssV31Vector):
        return score_v31(vector)
    return score_v40(vector)
