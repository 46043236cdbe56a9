"""HTTP session service over the dialogue engine.

Sessions are event-sourced: the in-memory state is a cache, the log is
the truth.  On startup every persisted session is replayed through the
engine, so a restarted service answers reads identically.  Requests to
one session are serialized by a per-session lock; distinct sessions
proceed in parallel against the shared read-only registry.
"""

from __future__ import annotations

import copy
import logging
import secrets
import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import AppConfig, merge_overrides
from ..dialogue import engine
from ..dialogue.types import ActionKind, AgentTurn, DialogueSession, UserAction
from ..errors import ConfigError, EmptyQuery, TopikosError, UnknownSession, UnknownTopic
from ..kos.model import breadcrumb_labels
from ..registry import Registry, load_registry
from . import events as ev
from .events import EventStore
from .schemas import CreateSessionRequest, ActionRequest

logger = logging.getLogger(__name__)

_STATUS_BY_CODE = {
    "empty_query": 400,
    "unknown_session": 404,
    "unknown_scheme": 404,
    "unknown_topic": 404,
    "session_finalized": 409,
    "not_finalized": 409,
    "unknown_action_target": 422,
    "schema_violation": 422,
    "empty_text": 422,
    "config_error": 422,
    "no_multi_field_scheme": 503,
    "remote_unavailable": 503,
    "remote_bad_response": 502,
}

_OVERRIDABLE_SECTIONS = {"retrieval", "rerank", "dialogue"}


class SessionManager:
    """Owns live sessions, their locks, and the event log."""

    def __init__(self, registry: Registry, store: EventStore, config: AppConfig):
        self.registry = registry
        self.store = store
        self.config = config
        self.sessions: dict[str, DialogueSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._manager_lock = threading.Lock()
        self._replay_all()

    def _replay_all(self) -> None:
        for session_id in self.store.session_ids():
            try:
                self.sessions[session_id] = self._replay(session_id)
            except Exception:
                logger.exception("failed to replay session %s", session_id)

    def _replay(self, session_id: str) -> DialogueSession:
        log = self.store.read(session_id)
        if not log or log[0].kind != ev.KIND_CREATED:
            raise UnknownSession(session_id)
        created = log[0].payload
        actions = [
            UserAction.from_dict(e.payload["action"])
            for e in log
            if e.kind == ev.KIND_STEPPED
        ]
        return engine.replay_session(
            session_id=session_id,
            query=created["query"],
            config_dict=created["config"],
            actions=actions,
            registry=self.registry,
        )

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._manager_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session(self, session_id: str) -> DialogueSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def create(self, query: str, overrides: dict[str, Any] | None) -> tuple[DialogueSession, AgentTurn]:
        config = self.config
        if overrides:
            bad = set(overrides) - _OVERRIDABLE_SECTIONS
            if bad:
                raise ConfigError(f"only {sorted(_OVERRIDABLE_SECTIONS)} may be overridden, got {sorted(bad)}")
            config = merge_overrides(config, overrides)
        session_id = secrets.token_urlsafe(16)  # 128-bit random, URL-safe
        session, turn = engine.start_session(query, self.registry, config, session_id=session_id)
        self.store.append(
            session_id,
            [
                (ev.KIND_CREATED, {"query": query, "config": session.config, "seed": session.rng_seed}),
                (ev.KIND_TURN_EMITTED, {"turn": turn.digest()}),
            ],
        )
        with self._manager_lock:
            self.sessions[session_id] = session
            self._locks.setdefault(session_id, threading.Lock())
        return session, turn

    def step(self, session_id: str, action: UserAction) -> AgentTurn:
        with self._lock_for(session_id):
            session = self._session(session_id)
            # Step a copy: a failed step must leave state and log untouched.
            candidate = copy.deepcopy(session)
            candidate, turn = engine.step(candidate, action, self.registry)
            batch = [
                (ev.KIND_STEPPED, {"action": action.to_dict()}),
                (ev.KIND_TURN_EMITTED, {"turn": turn.digest()}),
            ]
            if action.kind is ActionKind.DONE:
                batch.append((ev.KIND_FINALIZED, {"confirmed": len(candidate.confirmed_topics)}))
            self.store.append(session_id, batch)
            self.sessions[session_id] = candidate
            return turn

    def view(self, session_id: str) -> dict[str, Any]:
        with self._lock_for(session_id):
            return self._session(session_id).to_dict()

    def resolution(self, session_id: str) -> list[dict[str, Any]]:
        with self._lock_for(session_id):
            session = self._session(session_id)
            return [entity.to_dict() for entity in engine.finalize(session)]


def create_app(config: AppConfig, registry: Registry | None = None) -> FastAPI:
    app = FastAPI(title="topikos", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = registry if registry is not None else load_registry(config)
    manager = SessionManager(registry, EventStore(config.data_dir), config)
    app.state.manager = manager

    @app.exception_handler(TopikosError)
    def topikos_error_handler(request: Request, exc: TopikosError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "validation_error", "message": str(exc.errors()[:1])},
        )

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "schemes_loaded": len(registry.graphs),
            "sessions_active": len(manager.sessions),
        }

    @app.get("/v1/schemes")
    def list_schemes():
        return {
            "schemes": [
                {
                    "id": graph.scheme.id,
                    "name": graph.scheme.name,
                    "kind": graph.scheme.kind.value,
                    "field_tags": graph.scheme.field_tags,
                    "topic_count": len(graph.nodes),
                }
                for _, graph in sorted(registry.graphs.items())
            ]
        }

    @app.get("/v1/schemes/{scheme_id}/topics/{topic_id:path}")
    def topic_lookup(scheme_id: str, topic_id: str):
        graph = registry.graph(scheme_id)
        node = graph.nodes.get(topic_id)
        if node is None:
            raise UnknownTopic(topic_id, scheme_id)
        return {
            "id": node.id,
            "scheme_id": node.scheme_id,
            "pref_label": node.pref_label,
            "alt_labels": node.alt_labels,
            "definition": node.definition,
            "broader": node.broader,
            "narrower": node.narrower,
            "breadcrumb": breadcrumb_labels(graph, node.id)[:-1],
        }

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        if not body.query.strip():
            raise EmptyQuery("query must be non-empty")
        session, turn = manager.create(body.query, body.config)
        return {"session_id": session.session_id, "turn": turn.to_dict()}

    @app.post("/v1/sessions/{session_id}/steps")
    def post_step(session_id: str, body: ActionRequest):
        action = UserAction.from_dict(body.model_dump())
        turn = manager.step(session_id, action)
        return {"session_id": session_id, **turn.to_dict()}

    @app.post("/v1/sessions/{session_id}/finalize")
    def finalize_session(session_id: str):
        turn = manager.step(session_id, UserAction(kind=ActionKind.DONE))
        return {"session_id": session_id, **turn.to_dict()}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return manager.view(session_id)

    @app.get("/v1/sessions/{session_id}/resolution")
    def get_resolution(session_id: str):
        return {"session_id": session_id, "entities": manager.resolution(session_id)}

    return app
