"""Assessment sessions: journaled state plus the traversal rules.

A session holds one in-progress walkthrough of the four steps for one
CVE. Every mutation is applied under a per-session lock and journaled
to ``<store>/sessions/<id>.json`` so a restart loses nothing.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from ..goe import (
    Answer,
    Criterion,
    DEFAULT_PROMPTS,
    GoeAssessment,
    KillChainStep,
    StepAssessment,
    TraversalState,
    TraversalStatus,
    traverse,
)


class SessionError(Exception):
    pass


class UnknownSession(SessionError):
    pass


class ConflictError(SessionError):
    """State-machine violation (wrong criterion, answer after leaf, …)."""


@dataclass
class StepSlot:
    """Mutable per-step state inside a session."""

    answers: list[Answer] = field(default_factory=list)
    skipped: bool = False
    rationale: dict[Criterion, str] = field(default_factory=dict)

    def traversal(self, step: KillChainStep) -> TraversalState:
        return traverse(step, self.answers)


@dataclass
class Session:
    session_id: str
    cve_id: str
    analyst: str
    created_at: datetime
    steps: list[StepSlot]
    finalized_revision: Optional[int] = None

    @property
    def finalized(self) -> bool:
        return self.finalized_revision is not None

    def slot(self, step_number: int) -> StepSlot:
        if not 1 <= step_number <= 4:
            raise UnknownSession(f"no kill-chain step {step_number}")
        return self.steps[step_number - 1]

    def complete(self) -> bool:
        """True when every step reached a leaf or is skipped."""
        return all(
            slot.skipped
            or slot.traversal(KillChainStep(i + 1)).status
            is TraversalStatus.LEAF_REACHED
            for i, slot in enumerate(self.steps)
        )

    def to_assessment(self, updated_at: datetime) -> GoeAssessment:
        assessments = []
        for i, slot in enumerate(self.steps):
            step = KillChainStep(i + 1)
            leaf = None if slot.skipped else slot.traversal(step).leaf
            assessments.append(
                StepAssessment(step, leaf, rationale=dict(slot.rationale))
            )
        return GoeAssessment(
            cve_id=self.cve_id,
            steps=tuple(assessments),
            analyst=self.analyst,
            created_at=self.created_at,
            updated_at=updated_at,
        )


def _session_to_json(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "cve_id": session.cve_id,
        "analyst": session.analyst,
        "created_at": session.created_at.isoformat(),
        "finalized_revision": session.finalized_revision,
        "steps": [
            {
                "answers": [a.value for a in slot.answers],
                "skipped": slot.skipped,
                "rationale": {c.value: t for c, t in slot.rationale.items()},
            }
            for slot in session.steps
        ],
    }


def _session_from_json(data: dict) -> Session:
    return Session(
        session_id=data["session_id"],
        cve_id=data["cve_id"],
        analyst=data.get("analyst", ""),
        created_at=datetime.fromisoformat(data["created_at"]),
        finalized_revision=data.get("finalized_revision"),
        steps=[
            StepSlot(
                answers=[Answer(a) for a in slot["answers"]],
                skipped=slot["skipped"],
                rationale={
                    Criterion(c): t for c, t in slot.get("rationale", {}).items()
                },
            )
            for slot in data["steps"]
        ],
    )


class SessionManager:
    """In-memory session table with a JSON journal per session."""

    def __init__(
        self,
        journal_dir: Path | str,
        now: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
    ) -> None:
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self._now = now
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._table_lock = threading.Lock()
        self._recover()

    def _recover(self) -> None:
        for path in sorted(self.journal_dir.glob("*.json")):
            try:
                session = _session_from_json(json.loads(path.read_text()))
            except (json.JSONDecodeError, KeyError, ValueError):
                continue
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def _journal(self, session: Session) -> None:
        path = self.journal_dir / f"{session.session_id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(_session_to_json(session)))
        tmp.replace(path)

    def create(self, cve_id: str, analyst: str) -> Session:
        session = Session(
            session_id=secrets.token_urlsafe(16),
            cve_id=cve_id,
            analyst=analyst,
            created_at=self._now(),
            steps=[StepSlot() for _ in range(4)],
        )
        with self._table_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        self._journal(session)
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"unknown session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.Lock:
        try:
            return self._locks[session_id]
        except KeyError:
            raise UnknownSession(f"unknown session {session_id!r}") from None

    def answer(
        self,
        session_id: str,
        step_number: int,
        criterion: Criterion,
        value: Answer,
        rationale: str,
    ) -> Session:
        """Apply one answer; the client must echo the awaited criterion."""
        with self.lock(session_id):
            session = self.get(session_id)
            slot = session.slot(step_number)
            if session.finalized:
                raise ConflictError("session is finalized")
            if slot.skipped:
                raise ConflictError(f"step {step_number} is skipped")
            state = slot.traversal(KillChainStep(step_number))
            awaited = state.awaiting
            if awaited is None:
                raise ConflictError(
                    f"step {step_number} already reached leaf {state.leaf}"
                )
            if criterion is not awaited:
                raise ConflictError(
                    f"step {step_number} awaits {awaited.value}, "
                    f"got {criterion.value}"
                )
            slot.answers.append(value)
            if rationale:
                slot.rationale[criterion] = rationale
            self._journal(session)
            return session

    def skip(self, session_id: str, step_number: int) -> Session:
        """Mark a step skipped; rejected once its leaf is reached.

        A mid-traversal skip discards the partial answers for that step.
        """
        with self.lock(session_id):
            session = self.get(session_id)
            slot = session.slot(step_number)
            if session.finalized:
                raise ConflictError("session is finalized")
            if slot.skipped:
                raise ConflictError(f"step {step_number} is already skipped")
            state = slot.traversal(KillChainStep(step_number))
            if state.status is TraversalStatus.LEAF_REACHED:
                raise ConflictError(
                    f"step {step_number} is already answered to a leaf"
                )
            slot.answers.clear()
            slot.rationale.clear()
            slot.skipped = True
            self._journal(session)
            return session

    def mark_finalized(self, session_id: str, revision: int) -> None:
        session = self.get(session_id)
        session.finalized_revision = revision
        self._journal(session)
