"""Request/response models for the HTTP API (v1)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    cve_id: str
    analyst: str = ""


class AnswerRequest(BaseModel):
    criterion: Literal["AT", "TAI", "G"]
    value: Literal["N", "H"]
    rationale: str = ""


class SubVectorView(BaseModel):
    at: Literal["N", "H"]
    tai: Literal["N", "H"]
    g: Literal["N", "H"]
    score: int = Field(ge=0, le=3)


class StepView(BaseModel):
    step: int = Field(ge=1, le=4)
    name: str
    status: str
    answered: list[tuple[str, str]]
    awaiting: Optional[str] = None
    prompt: Optional[str] = None
    skipped: bool = False
    leaf: Optional[SubVectorView] = None


class SessionView(BaseModel):
    session_id: str
    cve_id: str
    analyst: str
    created_at: str
    status: Literal["InProgress", "Finalized"]
    steps: list[StepView]


class AnswerResponse(BaseModel):
    session_id: str
    step: StepView
    next_prompt: Optional[str] = None


class CvssScoreView(BaseModel):
    version: str
    vector: str
    score: float
    severity: str


class CveView(BaseModel):
    cve_id: str
    description: str
    references: list[str]
    cvss_vectors: list[tuple[str, str]]
    cvss_scores: list[CvssScoreView]
    source: str
    fetched_at: Optional[str] = None


class RecordView(BaseModel):
    cve_id: str
    analyst: str
    revision: int
    overall: Optional[int]
    goe_string: str
    steps: list[StepView]
    cvss_scores: list[CvssScoreView]
    created_at: Optional[str] = None
    updated_at: Optional[str] = None


class RankEntryView(BaseModel):
    cve_id: str
    goe: Optional[int]
    cvss: Optional[float]
    rank: int


class ErrorDetail(BaseModel):
    detail: str
