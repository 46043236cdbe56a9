"""Request and response models for the HTTP interface."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    query: str = ""
    config: Optional[dict[str, Any]] = None  # retrieval/rerank/dialogue overrides only


class ActionRequest(BaseModel):
    kind: str
    topic_id: str = ""
    scheme_id: str = ""
    text: str = ""


class AncestorRow(BaseModel):
    id: str
    d: int
    decay: float
    sim: float
    contribution: float


class SiblingRow(BaseModel):
    id: str
    sim: float


class CandidateModel(BaseModel):
    topic_id: str
    scheme_id: str
    pref_label: str
    explanation: str
    breadcrumb: list[str]
    base_sim: float
    ancestor_bonus: float
    sibling_bonus: float
    final_score: float
    ancestors: list[AncestorRow]
    siblings: list[SiblingRow]


class AgentTurnModel(BaseModel):
    round: int
    phase: str
    question: str
    notice: str = ""
    candidates: list[CandidateModel]


class CreateSessionResponse(BaseModel):
    session_id: str
    turn: AgentTurnModel


class ProvenanceRow(BaseModel):
    round: int
    action: str
    phase: str


class ResolvedEntityModel(BaseModel):
    topic_id: str
    scheme_id: str
    pref_label: str
    confidence: float
    provenance: list[ProvenanceRow]


class ResolutionResponse(BaseModel):
    session_id: str
    entities: list[ResolvedEntityModel]


class SchemeModel(BaseModel):
    id: str
    name: str
    kind: str
    field_tags: list[str]
    topic_count: int


class SchemeListResponse(BaseModel):
    schemes: list[SchemeModel]


class TopicViewModel(BaseModel):
    id: str
    scheme_id: str
    pref_label: str
    alt_labels: list[str]
    definition: str
    broader: list[str]
    narrower: list[str]
    breadcrumb: list[str]


class HealthResponse(BaseModel):
    status: str
    schemes_loaded: int
    sessions_active: int


class ErrorBody(BaseModel):
    code: str
    message: str


class StepResponse(AgentTurnModel):
    session_id: str = Field(default="")
