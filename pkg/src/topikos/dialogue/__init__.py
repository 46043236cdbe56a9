from .types import (
    ActionKind,
    AgentTurn,
    DialogueSession,
    Phase,
    QueryContext,
    ResolvedEntity,
    Round,
    ShownCandidate,
    UserAction,
)
from .engine import accumulate_context, finalize, replay_session, start_session, step
from .explain import make_explainer, socratic_question, template_explanation

__all__ = [
    "ActionKind",
    "AgentTurn",
    "DialogueSession",
    "Phase",
    "QueryContext",
    "ResolvedEntity",
    "Round",
    "ShownCandidate",
    "UserAction",
    "accumulate_context",
    "finalize",
    "replay_session",
    "start_session",
    "step",
    "make_explainer",
    "socratic_question",
    "template_explanation",
]
