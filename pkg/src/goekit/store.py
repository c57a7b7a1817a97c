"""Append-only assessment store and the remediation ranking.

Layout: one JSON document per revision at ``<root>/<CVE-ID>/<revision>.json``
(six-digit, monotonically increasing per CVE). Saves append, never
overwrite; a lock file at ``<root>/.lock`` serializes writers. Sessions
journaled by the HTTP service live under ``<root>/sessions/``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

from filelock import FileLock

from .cvss import CvssScore, Severity
from .goe import (
    Answer,
    Criterion,
    GoeAssessment,
    KillChainStep,
    StepAssessment,
    StepSubVector,
    overall_goe,
    serialize_goe,
)
from .nvd import CveRecord, Source

SCHEMA_VERSION = 1


class StoreError(Exception):
    pass


class ConsistencyError(StoreError):
    """Record's stored derived data disagrees with its steps."""


class StorageError(StoreError):
    pass


@dataclass(frozen=True)
class AssessmentRecord:
    """Persisted outcome: assessment plus CVE snapshot and CVSS scores."""

    assessment: GoeAssessment
    overall: Optional[int]
    cve: Optional[CveRecord] = None
    cvss_scores: tuple[tuple[str, CvssScore], ...] = ()  # (version, score)
    schema_version: int = SCHEMA_VERSION
    revision: Optional[int] = None

    @property
    def cve_id(self) -> str:
        return self.assessment.cve_id

    def best_cvss(self) -> Optional[CvssScore]:
        """Best-available base score: v4.0 preferred, else v3.1."""
        scores = dict(self.cvss_scores)
        for version in ("4.0", "3.1"):
            if version in scores:
                return scores[version]
        return None


@dataclass(frozen=True)
class PriorityEntry:
    cve_id: str
    goe: Optional[int]
    cvss: Optional[float]
    rank: int


def rank_key(goe: Optional[int], cvss: Optional[float], cve_id: str):
    """Total order: GOE ascending (Undefined last), CVSS descending
    (absent last), then CVE id."""
    return (
        goe if goe is not None else math.inf,
        -cvss if cvss is not None else math.inf,
        cve_id,
    )


def rank(records: Sequence[AssessmentRecord]) -> list[PriorityEntry]:
    """Deterministic remediation priority over a set of records."""
    keyed = sorted(
        records,
        key=lambda r: rank_key(
            r.overall, (r.best_cvss().value if r.best_cvss() else None), r.cve_id
        ),
    )
    return [
        PriorityEntry(
            cve_id=record.cve_id,
            goe=record.overall,
            cvss=record.best_cvss().value if record.best_cvss() else None,
            rank=position + 1,
        )
        for position, record in enumerate(keyed)
    ]


# --- JSON codec -----------------------------------------------------------


def _step_to_json(step: StepAssessment) -> dict:
    return {
        "step": step.step.name.title(),
        "skipped": step.skipped,
        "sub_vector": None
        if step.sub_vector is None
        else {
            "AT": step.sub_vector.at.value,
            "TAI": step.sub_vector.tai.value,
            "G": step.sub_vector.g.value,
        },
        "rationale": {c.value: text for c, text in step.rationale.items()},
    }


def _step_from_json(data: dict, index: int) -> StepAssessment:
    sub = data.get("sub_vector")
    return StepAssessment(
        step=KillChainStep(index + 1),
        sub_vector=None
        if sub is None
        else StepSubVector(Answer(sub["AT"]), Answer(sub["TAI"]), Answer(sub["G"])),
        rationale={
            Criterion(code): text for code, text in data.get("rationale", {}).items()
        },
    )


def record_to_json(record: AssessmentRecord) -> dict:
    assessment = record.assessment
    return {
        "schema_version": record.schema_version,
        "revision": record.revision,
        "cve_id": assessment.cve_id,
        "analyst": assessment.analyst,
        "created_at": assessment.created_at.isoformat()
        if assessment.created_at
        else None,
        "updated_at": assessment.updated_at.isoformat()
        if assessment.updated_at
        else None,
        "steps": [_step_to_json(s) for s in assessment.steps],
        "overall": record.overall,
        "goe_string": serialize_goe(assessment),
        "cvss_scores": [
            {"version": version, "score": score.value, "severity": score.severity.value}
            for version, score in record.cvss_scores
        ],
        "cve": None
        if record.cve is None
        else {
            "cve_id": record.cve.cve_id,
            "description": record.cve.description,
            "references": list(record.cve.references),
            "cvss_vectors": [list(pair) for pair in record.cve.cvss_vectors],
            "source": record.cve.source.value,
            "fetched_at": record.cve.fetched_at.isoformat()
            if record.cve.fetched_at
            else None,
        },
    }


def record_from_json(data: dict) -> AssessmentRecord:
    if data.get("schema_version", 0) > SCHEMA_VERSION:
        raise StorageError(
            f"record schema {data.get('schema_version')} is newer than "
            f"supported {SCHEMA_VERSION}"
        )
    try:
        assessment = GoeAssessment(
            cve_id=data["cve_id"],
            steps=tuple(
                _step_from_json(s, i) for i, s in enumerate(data["steps"])
            ),
            analyst=data.get("analyst", ""),
            created_at=datetime.fromisoformat(data["created_at"])
            if data.get("created_at")
            else None,
            updated_at=datetime.fromisoformat(data["updated_at"])
            if data.get("updated_at")
            else None,
        )
        cve_data = data.get("cve")
        cve = (
            CveRecord(
                cve_id=cve_data["cve_id"],
                description=cve_data.get("description", ""),
                references=tuple(cve_data.get("references", [])),
                cvss_vectors=tuple(
                    (v, s) for v, s in cve_data.get("cvss_vectors", [])
                ),
                source=Source(cve_data.get("source", "Manual")),
                fetched_at=datetime.fromisoformat(cve_data["fetched_at"])
                if cve_data.get("fetched_at")
                else None,
            )
            if cve_data
            else None
        )
        cvss_scores = tuple(
            (
                entry["version"],
                CvssScore(entry["score"], Severity(entry["severity"])),
            )
            for entry in data.get("cvss_scores", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StorageError(f"malformed record document: {exc}") from exc
    return AssessmentRecord(
        assessment=assessment,
        overall=data.get("overall"),
        cve=cve,
        cvss_scores=cvss_scores,
        schema_version=data.get("schema_version", SCHEMA_VERSION),
        revision=data.get("revision"),
    )


# --- Store ----------------------------------------------------------------

_REVISION_RE = re.compile(r"^(\d{6})\.json$")


class AssessmentStore:
    """Directory-backed append-only store with per-CVE revision history."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".lock"))

    def _cve_dir(self, cve_id: str) -> Path:
        return self.root / cve_id

    def revisions(self, cve_id: str) -> list[int]:
        directory = self._cve_dir(cve_id)
        if not directory.is_dir():
            return []
        found = []
        for entry in directory.iterdir():
            match = _REVISION_RE.match(entry.name)
            if match:
                found.append(int(match.group(1)))
        return sorted(found)

    def save(self, record: AssessmentRecord) -> int:
        """Append a new revision; returns its id. Never overwrites."""
        recomputed = overall_goe(record.assessment)
        if record.overall != recomputed:
            raise ConsistencyError(
                f"stored overall {record.overall!r} != recomputed {recomputed!r}"
            )
        with self._lock:
            directory = self._cve_dir(record.cve_id)
            directory.mkdir(parents=True, exist_ok=True)
            existing = self.revisions(record.cve_id)
            revision = (existing[-1] + 1) if existing else 1
            document = record_to_json(replace(record, revision=revision))
            path = directory / f"{revision:06d}.json"
            tmp = path.with_suffix(".tmp")
            try:
                with tmp.open("w") as handle:
                    json.dump(document, handle, indent=1)
                    handle.flush()
                tmp.replace(path)
            except OSError as exc:
                raise StorageError(f"cannot write {path}: {exc}") from exc
        return revision

    def load(self, cve_id: str, revision: Optional[int] = None) -> AssessmentRecord:
        revisions = self.revisions(cve_id)
        if not revisions:
            raise StorageError(f"no revisions stored for {cve_id}")
        if revision is None:
            revision = revisions[-1]
        if revision not in revisions:
            raise StorageError(f"no revision {revision} for {cve_id}")
        path = self._cve_dir(cve_id) / f"{revision:06d}.json"
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc
        return record_from_json(data)

    def _iter_latest(self, skip_errors: bool = False) -> Iterable[AssessmentRecord]:
        """Latest revision per (cve_id, analyst), in id order.

        With ``skip_errors`` unreadable documents are counted, not raised;
        see :meth:`query_with_warnings`.
        """
        self._warnings = 0
        for directory in sorted(self.root.iterdir()):
            if not directory.is_dir() or directory.name == "sessions":
                continue
            per_analyst: dict[str, AssessmentRecord] = {}
            for revision in self.revisions(directory.name):
                try:
                    record = self.load(directory.name, revision)
                except StoreError:
                    if not skip_errors:
                        raise
                    self._warnings += 1
                    continue
                per_analyst[record.assessment.analyst] = record
            yield from (per_analyst[key] for key in sorted(per_analyst))

    def query(
        self,
        cve_id: Optional[str] = None,
        analyst: Optional[str] = None,
        goe_min: Optional[int] = None,
        goe_max: Optional[int] = None,
        since: Optional[datetime] = None,
        until: Optional[datetime] = None,
        skip_errors: bool = False,
    ) -> list[AssessmentRecord]:
        """Latest revisions matching the filter.

        GOE range filters exclude Undefined; date filters compare against
        ``updated_at``.
        """
        results = []
        for record in self._iter_latest(skip_errors=skip_errors):
            if cve_id is not None and record.cve_id != cve_id:
                continue
            if analyst is not None and record.assessment.analyst != analyst:
                continue
            if (goe_min is not None or goe_max is not None) and record.overall is None:
                continue
            if goe_min is not None and record.overall < goe_min:
                continue
            if goe_max is not None and record.overall > goe_max:
                continue
            stamp = record.assessment.updated_at
            if since is not None and (stamp is None or stamp < since):
                continue
            if until is not None and (stamp is None or stamp > until):
                continue
            results.append(record)
        return results

    @property
    def warnings(self) -> int:
        """Documents skipped by the last ``skip_errors`` query."""
        return getattr(self, "_warnings", 0)

    def export_report(self) -> dict:
        """Single merged report of all latest records plus their ranking."""
        records = self.query(skip_errors=True)
        return {
            "schema_version": SCHEMA_VERSION,
            "records": [record_to_json(r) for r in records],
            "ranking": [
                {
                    "cve_id": e.cve_id,
                    "goe": e.goe,
                    "cvss": e.cvss,
                    "rank": e.rank,
                }
                for e in rank(records)
            ],
            "warnings": self.warnings,
        }
