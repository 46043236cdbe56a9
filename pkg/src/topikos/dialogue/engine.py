"""The multi-round Socratic state machine.

Phase one explores every loaded multi-field scheme.  Confirming a topic
that has a crosswalk moves the session into a specialized drill-down
over the linked single-field scheme(s); confirming one without a
crosswalk keeps the session in the multi-field scheme under stringent
filtering (descendants of the confirmed topic, a sharper sampling
temperature, and a minimum score threshold).  Broaden, narrow and
explore-siblings are navigation verbs layered on top of the same
machinery: they re-scope retrieval without changing phase; they are an
extension beyond the two-phase core.

Determinism: given the same query, action sequence, parameter snapshot
and seed, every turn is identical.  Sampling seeds are derived per
(session seed, round, scheme), so replaying a session reproduces it
exactly without shared generator state.
"""

from __future__ import annotations

import numpy as np

from ..config import AppConfig, config_from_dict
from ..embedding import EmbeddingVector, normalized
from ..errors import (
    EmptyQuery,
    NoMultiFieldScheme,
    NotFinalized,
    SessionFinalized,
    UnknownActionTarget,
)
from ..kos.model import ancestors_with_distance, breadcrumb_labels, descendants, siblings
from ..registry import Registry
from ..retrieval import (
    RetrievalParams,
    derive_seed,
    initial_search,
    rerank,
    score_breakdown,
)
from .explain import make_explainer, socratic_question
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

DEFAULT_SESSION_ID = "local"


def start_session(
    query: str,
    registry: Registry,
    config: AppConfig,
    session_id: str = DEFAULT_SESSION_ID,
) -> tuple[DialogueSession, AgentTurn]:
    """Open a session in broad exploration over all multi-field schemes."""
    if not query.strip():
        raise EmptyQuery("query must be non-empty")
    multi = registry.multi_field_ids
    if not multi:
        raise NoMultiFieldScheme("no multi-field scheme loaded")

    original = registry.provider.embed(query)
    context = QueryContext(
        original_query=query,
        original_vec=original,
        effective_vec=original,
        blend_lambda=config.dialogue.context_lambda,
    )
    session = DialogueSession(
        session_id=session_id,
        phase=Phase.BROAD_EXPLORATION,
        context=context,
        config=config.to_dict(),
        rng_seed=config.retrieval.seed,
        active_scheme_ids=multi,
    )
    turn = _emit_turn(session, registry, config, notice="")
    return session, turn


def step(
    session: DialogueSession,
    action: UserAction,
    registry: Registry,
    config: AppConfig | None = None,
) -> tuple[DialogueSession, AgentTurn]:
    """Apply one user action and produce the next agent turn.

    The session's own parameter snapshot governs unless an explicit
    config is passed (replay passes none).
    """
    if session.phase is Phase.FINALIZED:
        raise SessionFinalized(f"session {session.session_id} is finalized")
    cfg = config if config is not None else config_from_dict(session.config)

    notice = ""
    kind = action.kind
    if kind is ActionKind.DONE:
        session.phase = Phase.FINALIZED
        turn = AgentTurn(
            round=len(session.rounds) + 1,
            phase=session.phase,
            question=f"Session finalized with {len(session.confirmed_topics)} confirmed topic(s).",
        )
        session.rounds.append(Round(index=turn.round, action=action, turn=turn))
        return session, turn

    if kind is ActionKind.REFINE:
        session.context.refinements.append(action.text)
        session.context = accumulate_context(session.context, registry.provider)
    elif kind is ActionKind.REJECT:
        pair = _resolve_target(session, action)
        session.excluded.add(pair)
    elif kind is ActionKind.CONFIRM:
        pair = _resolve_target(session, action)
        notice = _apply_confirm(session, pair, registry, cfg)
    elif kind is ActionKind.BROADEN:
        pair = _resolve_target(session, action)
        notice = _apply_broaden(session, pair, registry)
    elif kind is ActionKind.NARROW:
        pair = _resolve_target(session, action)
        notice = _apply_narrow(session, pair, registry)
    elif kind is ActionKind.EXPLORE_SIBLINGS:
        pair = _resolve_target(session, action)
        notice = _apply_siblings(session, pair, registry)

    turn = _emit_turn(session, registry, cfg, notice=notice, action=action)
    return session, turn


def accumulate_context(context: QueryContext, provider) -> QueryContext:
    """Blend the original query with confirmations and refinements.

    effective = normalize((1-lambda) * original + lambda * mean(vs)) where
    vs are the confirmed-topic vectors plus the refinement embeddings.
    With nothing accumulated the original vector is returned unchanged.
    """
    extra = [v.values for v in context.confirmed_vecs]
    extra.extend(provider.embed(text).values for text in context.refinements)
    if not extra or context.blend_lambda == 0.0:
        context.effective_vec = context.original_vec
        return context
    mean = np.mean(np.stack(extra), axis=0)
    lam = context.blend_lambda
    blended = (1.0 - lam) * context.original_vec.values + lam * mean
    if float(np.linalg.norm(blended)) == 0.0:
        context.effective_vec = context.original_vec
        return context
    context.effective_vec = EmbeddingVector(
        values=normalized(blended), dim=context.original_vec.dim
    )
    return context


def finalize(session: DialogueSession) -> list[ResolvedEntity]:
    """One entity per confirmed topic, most recently confirmed first.

    Everything is reconstructed from the round history, so a replayed
    session finalizes identically.
    """
    if session.phase is not Phase.FINALIZED:
        raise NotFinalized(f"session {session.session_id} is not finalized")

    entities: list[ResolvedEntity] = []
    for rnd in session.rounds:
        if rnd.action.kind is not ActionKind.CONFIRM:
            continue
        pair = _target_pair_of(session, rnd)
        shown = _latest_shown(session, pair, before_round=rnd.index)
        provenance = [
            (r.index, r.action.kind.value, r.turn.phase.value)
            for r in session.rounds
            if r.index <= rnd.index
        ]
        entities.append(
            ResolvedEntity(
                topic_id=pair[1],
                scheme_id=pair[0],
                pref_label=shown.pref_label if shown else pair[1],
                confidence=shown.final_score if shown else 0.0,
                provenance=provenance,
            )
        )
    entities.reverse()
    return entities


def replay_session(
    session_id: str,
    query: str,
    config_dict: dict,
    actions: list[UserAction],
    registry: Registry,
) -> DialogueSession:
    """Rebuild a session from its creation record and action sequence."""
    config = config_from_dict(config_dict)
    session, _ = start_session(query, registry, config, session_id=session_id)
    for action in actions:
        step(session, action, registry, config)
    return session


# --- internals ------------------------------------------------------------


def _resolve_target(session: DialogueSession, action: UserAction) -> tuple[str, str]:
    """Map an action's topic reference onto a previously shown topic."""
    if action.scheme_id:
        pair = (action.scheme_id, action.topic_id)
        if pair not in session.shown:
            raise UnknownActionTarget(
                f"topic {action.topic_id!r} in scheme {action.scheme_id!r} was never shown"
            )
        return pair
    matches = sorted(pair for pair in session.shown if pair[1] == action.topic_id)
    if not matches:
        raise UnknownActionTarget(f"topic {action.topic_id!r} was never shown")
    if len(matches) > 1:
        # Ambiguous across schemes: prefer the most recently shown.
        for turn in reversed(session.turns()):
            for cand in turn.candidates:
                if cand.topic_id == action.topic_id:
                    return (cand.scheme_id, cand.topic_id)
    return matches[0]


def _apply_confirm(
    session: DialogueSession, pair: tuple[str, str], registry: Registry, cfg: AppConfig
) -> str:
    scheme_id, topic_id = pair
    session.confirmed_topics.append(pair)
    session.context.confirmed_vecs.append(registry.index(scheme_id).entries[topic_id])
    session.context = accumulate_context(session.context, registry.provider)
    label = registry.graph(scheme_id).nodes[topic_id].pref_label

    if session.phase is not Phase.BROAD_EXPLORATION:
        return f"Confirmed '{label}'."

    links = registry.links_from(scheme_id, topic_id)
    if links:
        scope: dict[str, list[str] | None] = {}
        for link in links:
            target_graph = registry.graph(link.to_scheme)
            if link.entry_topics:
                ids: set[str] = set()
                for entry in link.entry_topics:
                    ids.add(entry)
                    ids.update(descendants(target_graph, entry))
                existing = scope.get(link.to_scheme)
                scope[link.to_scheme] = sorted(ids | set(existing or []))
            else:
                scope[link.to_scheme] = None
        session.phase = Phase.SPECIALIZED_DRILLDOWN
        session.active_scheme_ids = sorted(scope)
        session.scope = scope
        session.stringent = False
        names = ", ".join(registry.graph(s).scheme.name for s in session.active_scheme_ids)
        session.scope_desc = f"the specialized scheme(s): {names}"
        return f"Confirmed '{label}'. Drilling down into {names}."

    graph = registry.graph(scheme_id)
    scope_ids = descendants(graph, topic_id)
    session.active_scheme_ids = [scheme_id]
    session.scope = {scheme_id: scope_ids}
    session.stringent = True
    session.scope_desc = f"topics narrower than '{label}'"
    return f"Confirmed '{label}'. No specialized scheme covers it; filtering strictly within its subtree."


def _apply_broaden(session: DialogueSession, pair: tuple[str, str], registry: Registry) -> str:
    scheme_id, topic_id = pair
    graph = registry.graph(scheme_id)
    label = graph.nodes[topic_id].pref_label
    scope_ids: set[str] = set()
    for ancestor_id, _ in ancestors_with_distance(graph, topic_id):
        scope_ids.add(ancestor_id)
        scope_ids.update(graph.nodes[ancestor_id].narrower)
    scope_ids.discard(topic_id)
    session.active_scheme_ids = [scheme_id]
    session.scope = {scheme_id: sorted(scope_ids)}
    session.scope_desc = f"topics broader than or adjacent to '{label}'"
    return f"Broadening from '{label}'."


def _apply_narrow(session: DialogueSession, pair: tuple[str, str], registry: Registry) -> str:
    scheme_id, topic_id = pair
    graph = registry.graph(scheme_id)
    label = graph.nodes[topic_id].pref_label
    session.active_scheme_ids = [scheme_id]
    session.scope = {scheme_id: descendants(graph, topic_id)}
    session.scope_desc = f"topics narrower than '{label}'"
    return f"Narrowing into '{label}'."


def _apply_siblings(session: DialogueSession, pair: tuple[str, str], registry: Registry) -> str:
    scheme_id, topic_id = pair
    graph = registry.graph(scheme_id)
    label = graph.nodes[topic_id].pref_label
    session.active_scheme_ids = [scheme_id]
    session.scope = {scheme_id: siblings(graph, topic_id)}
    session.scope_desc = f"siblings of '{label}'"
    return f"Exploring siblings of '{label}'."


def _current_tau(session: DialogueSession, cfg: AppConfig) -> float:
    if session.stringent:
        return cfg.retrieval.stringent_tau
    if session.phase is Phase.SPECIALIZED_DRILLDOWN:
        return cfg.retrieval.phase2_tau
    return cfg.retrieval.phase1_tau


def _emit_turn(
    session: DialogueSession,
    registry: Registry,
    cfg: AppConfig,
    notice: str,
    action: UserAction | None = None,
) -> AgentTurn:
    round_index = 0 if action is None else len(session.rounds) + 1
    shown = _run_retrieval(session, registry, cfg, round_index)
    question = socratic_question(shown, session.phase.value, session.scope_desc)
    turn = AgentTurn(
        round=round_index,
        phase=session.phase,
        question=question,
        candidates=shown,
        notice=notice,
    )
    if action is None:
        session.opening_turn = turn
    else:
        session.rounds.append(Round(index=round_index, action=action, turn=turn))
    for cand in shown:
        session.shown.add((cand.scheme_id, cand.topic_id))
    return turn


def _run_retrieval(
    session: DialogueSession, registry: Registry, cfg: AppConfig, round_index: int
) -> list[ShownCandidate]:
    rerank_params = cfg.rerank
    tau = _current_tau(session, cfg)
    explainer = make_explainer(cfg.explainer)
    query_vec = session.context.effective_vec

    merged = []
    for scheme_id in session.active_scheme_ids:
        index = registry.index(scheme_id)
        if session.scope is not None and scheme_id not in session.scope:
            continue
        scoped = session.scope.get(scheme_id) if session.scope is not None else None
        eligible = set(scoped) if scoped is not None else set(index.entries)
        eligible -= {t for s, t in session.excluded if s == scheme_id}
        eligible -= {t for s, t in session.confirmed_topics if s == scheme_id}
        if not eligible:
            continue
        params = RetrievalParams(
            k=cfg.retrieval.k,
            tau=tau,
            seed=derive_seed(session.rng_seed, round_index, scheme_id),
            restrict_to=frozenset(eligible) if len(eligible) < len(index.entries) else None,
        )
        candidates = initial_search(index, query_vec, params)
        candidates = rerank(registry.graph(scheme_id), index, query_vec, candidates, rerank_params)
        merged.extend(candidates)

    merged.sort(key=lambda c: (-c.final_score, c.topic_id, c.scheme_id))
    if session.stringent:
        threshold = cfg.dialogue.stringent_threshold
        merged = [c for c in merged if c.final_score >= threshold]
    merged = merged[: cfg.retrieval.display]

    shown: list[ShownCandidate] = []
    for cand in merged:
        graph = registry.graph(cand.scheme_id)
        node = graph.nodes[cand.topic_id]
        breakdown = score_breakdown(cand, rerank_params)
        shown.append(
            ShownCandidate(
                topic_id=cand.topic_id,
                scheme_id=cand.scheme_id,
                pref_label=node.pref_label,
                explanation=explainer.explain(
                    node, graph, session.context.original_query, warn=session.warnings.append
                ),
                breadcrumb=breadcrumb_labels(graph, cand.topic_id),
                base_sim=cand.base_sim,
                ancestor_bonus=cand.ancestor_bonus,
                sibling_bonus=cand.sibling_bonus,
                final_score=cand.final_score,
                ancestors=[
                    {
                        "id": row.ancestor_id,
                        "d": row.distance,
                        "decay": row.decay,
                        "sim": row.sim,
                        "contribution": row.contribution,
                    }
                    for row in breakdown.ancestors
                ],
                siblings=[{"id": sid, "sim": sim} for sid, sim in breakdown.sibling_top],
            )
        )
    return shown


def _target_pair_of(session: DialogueSession, rnd: Round) -> tuple[str, str]:
    """The (scheme, topic) a confirm action in this round referred to."""
    action = rnd.action
    if action.scheme_id:
        return (action.scheme_id, action.topic_id)
    for turn in reversed(_turns_before(session, rnd.index)):
        for cand in turn.candidates:
            if cand.topic_id == action.topic_id:
                return (cand.scheme_id, cand.topic_id)
    return ("", action.topic_id)


def _turns_before(session: DialogueSession, round_index: int) -> list[AgentTurn]:
    return [t for t in session.turns() if t.round < round_index]


def _latest_shown(
    session: DialogueSession, pair: tuple[str, str], before_round: int
) -> ShownCandidate | None:
    for turn in reversed(_turns_before(session, before_round)):
        for cand in turn.candidates:
            if (cand.scheme_id, cand.topic_id) == pair:
                return cand
    return None
