"""CVSS v3.1 and v4.0 vector string parsing.

Both grammars are slash-separated ``METRIC:VALUE`` pairs behind a
``CVSS:<version>`` prefix. The base metric group is validated strictly
(all metrics present exactly once, values from the legal sets); metrics
from the other groups are preserved in input order but not interpreted.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping, Union


class CvssError(Exception):
    """Base class for CVSS parsing and scoring errors."""


class CvssSyntaxError(CvssError):
    """Malformed vector string; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownMetric(CvssError):
    pass


class DuplicateMetric(CvssError):
    pass


class MissingMetric(CvssError):
    pass


class UnsupportedVersion(CvssError):
    pass


class OutOfRange(CvssError):
    pass


class Severity(str, enum.Enum):
    NONE = "None"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


def severity_band(value: float) -> Severity:
    """Qualitative rating band for a score in [0.0, 10.0]."""
    if not 0.0 <= value <= 10.0:
        raise OutOfRange(f"score {value!r} outside [0.0, 10.0]")
    if value == 0.0:
        return Severity.NONE
    if value < 4.0:
        return Severity.LOW
    if value < 7.0:
        return Severity.MEDIUM
    if value < 9.0:
        return Severity.HIGH
    return Severity.CRITICAL


@dataclass(frozen=True)
class CvssScore:
    """Base score with one decimal place plus its severity band."""

    value: float
    severity: Severity

    @classmethod
    def of(cls, value: float) -> "CvssScore":
        return cls(value, severity_band(value))


V31_BASE_METRICS: Mapping[str, str] = {
    "AV": "NALP",
    "AC": "LH",
    "PR": "NLH",
    "UI": "NR",
    "S": "UC",
    "C": "HLN",
    "I": "HLN",
    "A": "HLN",
}

V31_OTHER_METRICS: Mapping[str, tuple[str, ...]] = {
    "E": ("X", "H", "F", "P", "U"),
    "RL": ("X", "U", "W", "T", "O"),
    "RC": ("X", "C", "R", "U"),
    "CR": ("X", "H", "M", "L"),
    "IR": ("X", "H", "M", "L"),
    "AR": ("X", "H", "M", "L"),
    "MAV": ("X", "N", "A", "L", "P"),
    "MAC": ("X", "L", "H"),
    "MPR": ("X", "N", "L", "H"),
    "MUI": ("X", "N", "R"),
    "MS": ("X", "U", "C"),
    "MC": ("X", "N", "L", "H"),
    "MI": ("X", "N", "L", "H"),
    "MA": ("X", "N", "L", "H"),
}

V40_BASE_METRICS: Mapping[str, str] = {
    "AV": "NALP",
    "AC": "LH",
    "AT": "NP",
    "PR": "NLH",
    "UI": "NPA",
    "VC": "HLN",
    "VI": "HLN",
    "VA": "HLN",
    "SC": "HLN",
    "SI": "HLN",
    "SA": "HLN",
}

V40_OTHER_METRICS: Mapping[str, tuple[str, ...]] = {
    "E": ("X", "A", "P", "U"),
    "CR": ("X", "H", "M", "L"),
    "IR": ("X", "H", "M", "L"),
    "AR": ("X", "H", "M", "L"),
    "MAV": ("X", "N", "A", "L", "P"),
    "MAC": ("X", "L", "H"),
    "MAT": ("X", "N", "P"),
    "MPR": ("X", "N", "L", "H"),
    "MUI": ("X", "N", "P", "A"),
    "MVC": ("X", "H", "L", "N"),
    "MVI": ("X", "H", "L", "N"),
    "MVA": ("X", "H", "L", "N"),
    "MSC": ("X", "H", "L", "N"),
    "MSI": ("X", "S", "H", "L", "N"),
    "MSA": ("X", "S", "H", "L", "N"),
    "S": ("X", "N", "P"),
    "AU": ("X", "N", "Y"),
    "R": ("X", "A", "U", "I"),
    "V": ("X", "D", "C"),
    "RE": ("X", "L", "M", "H"),
    "U": ("X", "Clear", "Green", "Amber", "Red"),
}


@dataclass(frozen=True)
class _BaseVector:
    """Common shape of a parsed vector of either version."""

    metrics: Mapping[str, str]
    extensions: tuple[tuple[str, str], ...]
    raw: str

    VERSION = ""
    BASE_METRICS: Mapping[str, str] = field(default_factory=dict)

    def __getitem__(self, metric: str) -> str:
        return self.metrics[metric]

    def canonical(self) -> str:
        """Re-serialize with base metrics in specification order.

        Non-base metrics follow, in the order they appeared in the input.
        """
        parts = [f"CVSS:{self.VERSION}"]
        parts += [f"{name}:{self.metrics[name]}" for name in type(self).BASE_METRICS]
        parts += [f"{name}:{value}" for name, value in self.extensions]
        return "/".join(parts)


@dataclass(frozen=True)
class CvssV31Vector(_BaseVector):
    VERSION = "3.1"
    BASE_METRICS = V31_BASE_METRICS


@dataclass(frozen=True)
class CvssV40Vector(_BaseVector):
    VERSION = "4.0"
    BASE_METRICS = V40_BASE_METRICS


_SEGMENT_RE = re.compile(r"([A-Za-z]+):([A-Za-z]+)$")


def _parse_metrics(
    text: str,
    offset: int,
    base: Mapping[str, str],
    other: Mapping[str, tuple[str, ...]],
) -> tuple[dict[str, str], tuple[tuple[str, str], ...]]:
    metrics: dict[str, str] = {}
    extensions: list[tuple[str, str]] = []
    seen: set[str] = set()
    while offset < len(text):
        if text[offset] != "/":
            raise CvssSyntaxError("expected '/'", offset)
        offset += 1
        end = text.find("/", offset)
        if end < 0:
            end = len(text)
        segment = text[offset:end]
        match = _SEGMENT_RE.match(segment)
        if match is None:
            raise CvssSyntaxError(f"expected 'METRIC:VALUE', got {segment!r}", offset)
        name, value = match.groups()
        if name in seen:
            raise DuplicateMetric(f"metric {name} given more than once")
        seen.add(name)
        if name in base:
            if value not in base[name]:
                raise UnknownMetric(f"illegal value {value!r} for metric {name}")
            metrics[name] = value
        elif name in other:
            if value not in other[name]:
                raise UnknownMetric(f"illegal value {value!r} for metric {name}")
            extensions.append((name, value))
        else:
            raise UnknownMetric(f"unknown metric {name!r}")
        offset = end
    missing = [name for name in base if name not in metrics]
    if missing:
        raise MissingMetric(f"missing base metric(s): {', '.join(missing)}")
    return metrics, tuple(extensions)


def parse_cvss(text: str) -> Union[CvssV31Vector, CvssV40Vector]:
    """Parse a CVSS vector string, dispatching on the version prefix.

    Only v3.1 and v4.0 are supported; anything else fails closed with
    :class:`UnsupportedVersion`.
    """
    if not text.startswith("CVSS:"):
        raise CvssSyntaxError("expected 'CVSS:' prefix", 0)
    version = text[5:].split("/", 1)[0]
    offset = 5 + len(version)
    if version == "3.1":
        metrics, extensions = _parse_metrics(
            text, offset, V31_BASE_METRICS, V31_OTHER_METRICS
        )
        return CvssV31Vector(metrics=metrics, extensions=extensions, raw=text)
    if version == "4.0":
        metrics, extensions = _parse_metrics(
            text, offset, V40_BASE_METRICS, V40_OTHER_METRICS
        )
        return CvssV40Vector(metrics=metrics, extensions=extensions, raw=text)
    raise UnsupportedVersion(f"unsupported CVSS version {version!r}")
