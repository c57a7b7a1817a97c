"""FastAPI application exposing the assessment workbench API."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles

from .. import cvss, nvd
from ..goe import (
    Answer,
    Criterion,
    DEFAULT_PROMPTS,
    KillChainStep,
    TraversalStatus,
    overall_goe,
    serialize_goe,
)
from ..nvd import CveRecord, NvdClient
from ..store import AssessmentRecord, AssessmentStore, rank
from . import schemas
from .sessions import ConflictError, Session, SessionManager, UnknownSession

API_PREFIX = "/api/v1"


@dataclass
class ServiceConfig:
    store_path: Path
    nvd_cache_dir: Optional[Path] = None
    nvd_api_key: Optional[str] = None
    nvd_base_url: str = nvd.DEFAULT_BASE_URL
    offline: bool = False
    fixture_paths: tuple[Path, ...] = ()
    bearer_token: Optional[str] = None
    static_dir: Optional[Path] = None
    now: Callable[[], datetime] = field(
        default=lambda: datetime.now(timezone.utc)
    )


def _score_vectors(record: CveRecord) -> list[schemas.CvssScoreView]:
    views = []
    for version, text in record.cvss_vectors:
        try:
            result = cvss.score(text)
        except cvss.CvssError:
            continue
        views.append(
            schemas.CvssScoreView(
                version=version,
                vector=text,
                score=result.value,
                severity=result.severity.value,
            )
        )
    return views


def _step_view(session: Session, step_number: int) -> schemas.StepView:
    slot = session.steps[step_number - 1]
    step = KillChainStep(step_number)
    if slot.skipped:
        return schemas.StepView(
            step=step_number,
            name=step.name.title(),
            status="Skipped",
            answered=[],
            skipped=True,
        )
    state = slot.traversal(step)
    leaf = state.leaf
    return schemas.StepView(
        step=step_number,
        name=step.name.title(),
        status=state.status.value,
        answered=[(c.value, a.value) for c, a in state.answered],
        awaiting=state.awaiting.value if state.awaiting else None,
        prompt=DEFAULT_PROMPTS[state.awaiting] if state.awaiting else None,
        leaf=None
        if leaf is None
        else schemas.SubVectorView(
            at=leaf.at.value, tai=leaf.tai.value, g=leaf.g.value, score=leaf.score
        ),
    )


def _session_view(session: Session) -> schemas.SessionView:
    return schemas.SessionView(
        session_id=session.session_id,
        cve_id=session.cve_id,
        analyst=session.analyst,
        created_at=session.created_at.isoformat(),
        status="Finalized" if session.finalized else "InProgress",
        steps=[_step_view(session, n) for n in range(1, 5)],
    )


def _record_view(record: AssessmentRecord) -> schemas.RecordView:
    assessment = record.assessment
    steps = []
    for assessment_step in assessment.steps:
        leaf = assessment_step.sub_vector
        steps.append(
            schemas.StepView(
                step=assessment_step.step.value,
                name=assessment_step.step.name.title(),
                status="Skipped" if leaf is None else "LeafReached",
                answered=[],
                skipped=leaf is None,
                leaf=None
                if leaf is None
                else schemas.SubVectorView(
                    at=leaf.at.value,
                    tai=leaf.tai.value,
                    g=leaf.g.value,
                    score=leaf.score,
                ),
            )
        )
    return schemas.RecordView(
        cve_id=record.cve_id,
        analyst=assessment.analyst,
        revision=record.revision or 0,
        overall=record.overall,
        goe_string=serialize_goe(assessment),
        steps=steps,
        cvss_scores=[
            schemas.CvssScoreView(
                version=version,
                vector=(record.cve.vector_for(version) if record.cve else "") or "",
                score=score.value,
                severity=score.severity.value,
            )
            for version, score in record.cvss_scores
        ],
        created_at=assessment.created_at.isoformat()
        if assessment.created_at
        else None,
        updated_at=assessment.updated_at.isoformat()
        if assessment.updated_at
        else None,
    )


def create_app(config: ServiceConfig) -> FastAPI:
    store = AssessmentStore(config.store_path)
    cache_dir = config.nvd_cache_dir or (Path(config.store_path) / "nvdcache")
    client = NvdClient(
        cache_dir=cache_dir,
        api_key=config.nvd_api_key,
        base_url=config.nvd_base_url,
        offline=config.offline,
        now=config.now,
    )
    for fixture in config.fixture_paths:
        client.load_fixture(fixture)
    sessions = SessionManager(
        Path(config.store_path) / "sessions", now=config.now
    )

    app = FastAPI(title="GOE analyst workbench", version="1.0")
    app.state.store = store
    app.state.nvd = client
    app.state.sessions = sessions

    def check_auth(request: Request) -> None:
        if config.bearer_token is None:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {config.bearer_token}":
            raise HTTPException(status_code=401, detail="missing or bad token")

    auth = Depends(check_auth)

    def resolve_cve(cve_id: str) -> CveRecord:
        try:
            canonical = nvd.canonical_cve_id(cve_id)
        except nvd.InvalidId as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            return client.fetch_cve(canonical)
        except nvd.NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (nvd.NetworkError, nvd.RateLimited) as exc:
            raise HTTPException(
                status_code=503,
                detail=f"NVD unavailable: {exc}. Import a fixture or retry "
                "later for offline use.",
            ) from exc
        except nvd.MalformedResponse as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    def get_session(session_id: str) -> Session:
        try:
            return sessions.get(session_id)
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post(
        f"{API_PREFIX}/sessions",
        response_model=schemas.SessionView,
        status_code=201,
        dependencies=[auth],
    )
    def create_session(body: schemas.CreateSessionRequest) -> schemas.SessionView:
        record = resolve_cve(body.cve_id)
        session = sessions.create(record.cve_id, body.analyst)
        return _session_view(session)

    @app.get(
        f"{API_PREFIX}/sessions/{{session_id}}",
        response_model=schemas.SessionView,
        dependencies=[auth],
    )
    def read_session(session_id: str) -> schemas.SessionView:
        return _session_view(get_session(session_id))

    @app.post(
        f"{API_PREFIX}/sessions/{{session_id}}/steps/{{step_number}}/answer",
        response_model=schemas.AnswerResponse,
        dependencies=[auth],
    )
    def answer_step(
        session_id: str, step_number: int, body: schemas.AnswerRequest
    ) -> schemas.AnswerResponse:
        get_session(session_id)
        try:
            session = sessions.answer(
                session_id,
                step_number,
                Criterion(body.criterion),
                Answer(body.value),
                body.rationale,
            )
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        view = _step_view(session, step_number)
        return schemas.AnswerResponse(
            session_id=session_id, step=view, next_prompt=view.prompt
        )

    @app.post(
        f"{API_PREFIX}/sessions/{{session_id}}/steps/{{step_number}}/skip",
        response_model=schemas.AnswerResponse,
        dependencies=[auth],
    )
    def skip_step(session_id: str, step_number: int) -> schemas.AnswerResponse:
        get_session(session_id)
        try:
            session = sessions.skip(session_id, step_number)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return schemas.AnswerResponse(
            session_id=session_id, step=_step_view(session, step_number)
        )

    @app.post(
        f"{API_PREFIX}/sessions/{{session_id}}/finalize",
        response_model=schemas.RecordView,
        dependencies=[auth],
    )
    def finalize_session(session_id: str) -> schemas.RecordView:
        get_session(session_id)
        with sessions.lock(session_id):
            session = sessions.get(session_id)
            if session.finalized:
                record = store.load(session.cve_id, session.finalized_revision)
                return _record_view(record)
            if not session.complete():
                pending = [
                    n
                    for n in range(1, 5)
                    if not session.steps[n - 1].skipped
                    and session.steps[n - 1]
                    .traversal(KillChainStep(n))
                    .status
                    is not TraversalStatus.LEAF_REACHED
                ]
                raise HTTPException(
                    status_code=409,
                    detail=f"steps {pending} are still mid-traversal",
                )
            assessment = session.to_assessment(updated_at=config.now())
            cve = client.fetch_cve(session.cve_id)
            scores = []
            for version, text in cve.cvss_vectors:
                try:
                    scores.append((version, cvss.score(text)))
                except cvss.CvssError:
                    continue
            record = AssessmentRecord(
                assessment=assessment,
                overall=overall_goe(assessment),
                cve=cve,
                cvss_scores=tuple(scores),
            )
            revision = store.save(record)
            sessions.mark_finalized(session_id, revision)
            return _record_view(store.load(session.cve_id, revision))

    @app.get(
        f"{API_PREFIX}/cves/{{cve_id}}",
        response_model=schemas.CveView,
        dependencies=[auth],
    )
    def read_cve(cve_id: str) -> schemas.CveView:
        record = resolve_cve(cve_id)
        return schemas.CveView(
            cve_id=record.cve_id,
            description=record.description,
            references=list(record.references),
            cvss_vectors=list(record.cvss_vectors),
            cvss_scores=_score_vectors(record),
            source=record.source.value,
            fetched_at=record.fetched_at.isoformat() if record.fetched_at else None,
        )

    @app.get(
        f"{API_PREFIX}/rank",
        response_model=list[schemas.RankEntryView],
        dependencies=[auth],
    )
    def read_rank() -> list[schemas.RankEntryView]:
        records = store.query(skip_errors=True)
        return [
            schemas.RankEntryView(
                cve_id=e.cve_id, goe=e.goe, cvss=e.cvss, rank=e.rank
            )
            for e in rank(records)
        ]

    @app.get(
        f"{API_PREFIX}/assessments",
        response_model=list[schemas.RecordView],
        dependencies=[auth],
    )
    def read_assessments(
        cve_id: Optional[str] = None,
        analyst: Optional[str] = None,
        goe_min: Optional[int] = None,
        goe_max: Optional[int] = None,
    ) -> list[schemas.RecordView]:
        records = store.query(
            cve_id=cve_id,
            analyst=analyst,
            goe_min=goe_min,
            goe_max=goe_max,
            skip_errors=True,
        )
        return [_record_view(r) for r in records]

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount(
            "/", StaticFiles(directory=config.static_dir, html=True), name="ui"
        )

    return app
