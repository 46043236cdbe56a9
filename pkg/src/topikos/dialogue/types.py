"""Session state for the multi-round dialogue.

Everything here serializes to plain dicts with stable ordering, so two
sessions produced from identical inputs compare byte-for-byte after
``json.dumps(session.to_dict(), sort_keys=True)``.  Round history is the
source of truth: a session is always reconstructible by replaying its
query and action sequence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..embedding import EmbeddingVector
from ..errors import SchemaViolation


class Phase(enum.Enum):
    BROAD_EXPLORATION = "broad_exploration"
    SPECIALIZED_DRILLDOWN = "specialized_drilldown"
    FINALIZED = "finalized"


class ActionKind(enum.Enum):
    CONFIRM = "confirm"
    REJECT = "reject"
    REFINE = "refine"
    BROADEN = "broaden"
    NARROW = "narrow"
    EXPLORE_SIBLINGS = "explore_siblings"
    DONE = "done"


_TOPIC_ACTIONS = {
    ActionKind.CONFIRM,
    ActionKind.REJECT,
    ActionKind.BROADEN,
    ActionKind.NARROW,
    ActionKind.EXPLORE_SIBLINGS,
}


@dataclass(frozen=True)
class UserAction:
    kind: ActionKind
    topic_id: str = ""
    scheme_id: str = ""
    text: str = ""

    def __post_init__(self):
        if self.kind in _TOPIC_ACTIONS and not self.topic_id:
            raise SchemaViolation(f"action {self.kind.value!r} requires topic_id")
        if self.kind is ActionKind.REFINE and not self.text.strip():
            raise SchemaViolation("refine requires non-empty text")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "topic_id": self.topic_id,
            "scheme_id": self.scheme_id,
            "text": self.text,
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "UserAction":
        try:
            kind = ActionKind(raw.get("kind", ""))
        except ValueError:
            raise SchemaViolation(f"unknown action kind {raw.get('kind')!r}") from None
        return UserAction(
            kind=kind,
            topic_id=str(raw.get("topic_id", "") or ""),
            scheme_id=str(raw.get("scheme_id", "") or ""),
            text=str(raw.get("text", "") or ""),
        )


@dataclass
class ShownCandidate:
    """A reranked candidate as presented to the user, with its explanation."""

    topic_id: str
    scheme_id: str
    pref_label: str
    explanation: str
    breadcrumb: list[str]
    base_sim: float
    ancestor_bonus: float
    sibling_bonus: float
    final_score: float
    ancestors: list[dict[str, Any]]  # {id, d, decay, sim, contribution}
    siblings: list[dict[str, Any]]  # {id, sim}

    def to_dict(self) -> dict[str, Any]:
        return {
            "topic_id": self.topic_id,
            "scheme_id": self.scheme_id,
            "pref_label": self.pref_label,
            "explanation": self.explanation,
            "breadcrumb": list(self.breadcrumb),
            "base_sim": self.base_sim,
            "ancestor_bonus": self.ancestor_bonus,
            "sibling_bonus": self.sibling_bonus,
            "final_score": self.final_score,
            "ancestors": [dict(a) for a in self.ancestors],
            "siblings": [dict(s) for s in self.siblings],
        }


@dataclass
class AgentTurn:
    round: int
    phase: Phase
    question: str
    candidates: list[ShownCandidate] = field(default_factory=list)
    notice: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "round": self.round,
            "phase": self.phase.value,
            "question": self.question,
            "notice": self.notice,
            "candidates": [c.to_dict() for c in self.candidates],
        }

    def digest(self) -> dict[str, Any]:
        """Compact audit form for the event log."""
        return {
            "round": self.round,
            "phase": self.phase.value,
            "question": self.question,
            "candidates": [
                {"scheme_id": c.scheme_id, "topic_id": c.topic_id, "final_score": c.final_score}
                for c in self.candidates
            ],
        }


@dataclass
class Round:
    """One user action and the agent turn that answered it.

    The opening turn (round 0) precedes any action and lives on the
    session directly, so ``len(rounds)`` equals the number of steps.
    """

    index: int
    action: UserAction
    turn: AgentTurn

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "action": self.action.to_dict(),
            "turn": self.turn.to_dict(),
        }


@dataclass
class QueryContext:
    original_query: str
    original_vec: EmbeddingVector
    effective_vec: EmbeddingVector
    blend_lambda: float
    refinements: list[str] = field(default_factory=list)
    confirmed_vecs: list[EmbeddingVector] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "original_query": self.original_query,
            "refinements": list(self.refinements),
            "lambda": self.blend_lambda,
            "original_vec": self.original_vec.tolist(),
            "confirmed_vecs": [v.tolist() for v in self.confirmed_vecs],
            "effective_vec": self.effective_vec.tolist(),
        }


@dataclass
class DialogueSession:
    session_id: str
    phase: Phase
    context: QueryContext
    config: dict[str, Any]  # full parameter snapshot at creation
    rng_seed: int
    opening_turn: AgentTurn | None = None
    rounds: list[Round] = field(default_factory=list)
    confirmed_topics: list[tuple[str, str]] = field(default_factory=list)  # (scheme_id, topic_id)
    active_scheme_ids: list[str] = field(default_factory=list)
    # scope: per-scheme eligible topic ids; None entry means the whole scheme
    scope: dict[str, list[str] | None] | None = None
    scope_desc: str = ""
    stringent: bool = False
    excluded: set[tuple[str, str]] = field(default_factory=set)
    shown: set[tuple[str, str]] = field(default_factory=set)
    warnings: list[str] = field(default_factory=list)

    def turns(self) -> list[AgentTurn]:
        """Every agent turn in order, opening turn first."""
        out = [self.opening_turn] if self.opening_turn else []
        out.extend(r.turn for r in self.rounds)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "phase": self.phase.value,
            "context": self.context.to_dict(),
            "config": self.config,
            "rng_seed": self.rng_seed,
            "opening_turn": self.opening_turn.to_dict() if self.opening_turn else None,
            "rounds": [r.to_dict() for r in self.rounds],
            "confirmed_topics": [list(pair) for pair in self.confirmed_topics],
            "active_scheme_ids": list(self.active_scheme_ids),
            "scope": {k: (sorted(v) if v is not None else None) for k, v in sorted(self.scope.items())}
            if self.scope is not None
            else None,
            "scope_desc": self.scope_desc,
            "stringent": self.stringent,
            "excluded": sorted(list(pair) for pair in self.excluded),
            "shown": sorted(list(pair) for pair in self.shown),
            "warnings": list(self.warnings),
        }


@dataclass
class ResolvedEntity:
    topic_id: str
    scheme_id: str
    pref_label: str
    confidence: float
    provenance: list[tuple[int, str, str]]  # (round index, action kind, phase)

    def to_dict(self) -> dict[str, Any]:
        return {
            "topic_id": self.topic_id,
            "scheme_id": self.scheme_id,
            "pref_label": self.pref_label,
            "confidence": self.confidence,
            "provenance": [
                {"round": r, "action": a, "phase": p} for r, a, p in self.provenance
            ],
        }


def vector_from_list(values: list[float]) -> EmbeddingVector:
    arr = np.asarray(values, dtype=np.float64)
    return EmbeddingVector(values=arr, dim=arr.shape[0])
