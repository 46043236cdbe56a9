"""Operator command line: ingest, index, chat, resolve, serve.

Exit codes are fixed for scripting: 0 success, 1 operational error
(unreadable input, provider failure, engine error), 2 validation
findings.  All structured output is newline-delimited JSON, one record
per line in batch mode.  ``chat`` and ``resolve`` run the engine
in-process by default; ``chat --server`` attaches to a running service
over HTTP instead.
"""

from __future__ import annotations

import json
import os
import sys
from typing import Any

import click
import httpx

from .config import AppConfig, load_config
from .dialogue import engine
from .dialogue.types import ActionKind, UserAction
from .errors import (
    CycleDetected,
    DanglingReference,
    MissingPrefLabel,
    TopikosError,
)
from .kos.canonical import parse_canonical, serialize_canonical
from .kos.skos import parse_skos_ntriples
from .kos.validate import validate
from .registry import load_registry
from .retrieval import build_index, save_index

ENV_CONFIG = "TOPIKOS_CONFIG"

_INTEGRITY_ERRORS = (CycleDetected, DanglingReference, MissingPrefLabel)


@click.group()
def main():
    """Topic resolution over knowledge organization systems."""


def _load_app_config(config_path: str | None, overrides: dict[str, Any] | None = None) -> AppConfig:
    path = config_path or os.environ.get(ENV_CONFIG)
    return load_config(path, overrides=overrides)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["skos", "canonical"]), default="skos")
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(input_path: str, fmt: str, out_path: str):
    """Parse a taxonomy, validate it, and write the canonical document."""
    try:
        with open(input_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    try:
        graph = parse_skos_ntriples(text) if fmt == "skos" else parse_canonical(text)
    except _INTEGRITY_ERRORS as exc:
        click.echo(f"finding: {exc.code}: {exc.message}")
        sys.exit(2)
    except TopikosError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(1)
    report = validate(graph)
    for finding in report.findings:
        click.echo(f"finding: {finding.kind}: {finding.message}")
    if not report.ok:
        sys.exit(2)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_canonical(graph))
    click.echo(f"ok: {len(graph.nodes)} topics, {len(graph.roots)} roots -> {out_path}")


@main.command()
@click.argument("canonical_path", type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--provider", type=click.Choice(["local", "remote"]), default="local")
@click.option("--dim", type=int, default=256)
@click.option("--endpoint", default="")
@click.option("--model", "model_name", default="")
def index(canonical_path: str, out_path: str, provider: str, dim: int, endpoint: str, model_name: str):
    """Embed every topic of a canonical document into an index snapshot."""
    from .embedding import ProviderConfig, ProviderKind, make_provider

    try:
        with open(canonical_path, encoding="utf-8") as fh:
            graph = parse_canonical(fh.read())
        provider_config = ProviderConfig(
            kind=ProviderKind(provider), dim=dim, endpoint=endpoint, model_name=model_name
        )
        topic_index = build_index(graph, make_provider(provider_config))
        save_index(topic_index, out_path)
    except (TopikosError, OSError, ValueError) as exc:
        code = getattr(exc, "code", "error")
        click.echo(f"error: {code}: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {len(topic_index.entries)} topics, dim {topic_index.dim} -> {out_path}")


class LocalDriver:
    """Runs the engine in-process; same turn shape as the HTTP API."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.registry = load_registry(config)
        self.session = None

    def start(self, query: str) -> dict[str, Any]:
        self.session, turn = engine.start_session(query, self.registry, self.config)
        return turn.to_dict()

    def step(self, action: UserAction) -> dict[str, Any]:
        self.session, turn = engine.step(self.session, action, self.registry, self.config)
        return turn.to_dict()

    def resolution(self) -> list[dict[str, Any]]:
        return [entity.to_dict() for entity in engine.finalize(self.session)]


class HttpDriver:
    """Drives a remote service through its public endpoints."""

    def __init__(self, base_url: str):
        self.client = httpx.Client(base_url=base_url, timeout=30.0)
        self.session_id = ""

    def _check(self, response: httpx.Response) -> dict[str, Any]:
        body = response.json()
        if response.status_code >= 400:
            raise TopikosError(f"{body.get('code', response.status_code)}: {body.get('message', '')}")
        return body

    def start(self, query: str) -> dict[str, Any]:
        body = self._check(self.client.post("/v1/sessions", json={"query": query}))
        self.session_id = body["session_id"]
        return body["turn"]

    def step(self, action: UserAction) -> dict[str, Any]:
        if action.kind is ActionKind.DONE:
            return self._check(self.client.post(f"/v1/sessions/{self.session_id}/finalize"))
        return self._check(
            self.client.post(f"/v1/sessions/{self.session_id}/steps", json=action.to_dict())
        )

    def resolution(self) -> list[dict[str, Any]]:
        body = self._check(self.client.get(f"/v1/sessions/{self.session_id}/resolution"))
        return body["entities"]


_PHASE_TITLES = {
    "broad_exploration": "Broad exploration",
    "specialized_drilldown": "Specialized drill-down",
    "finalized": "Finalized",
}


def _render_turn(turn: dict[str, Any]) -> None:
    title = _PHASE_TITLES.get(turn["phase"], turn["phase"])
    click.echo(f"-- {title} · round {turn['round']} --")
    if turn.get("notice"):
        click.echo(turn["notice"])
    for i, cand in enumerate(turn["candidates"], start=1):
        click.echo(f"[{i}] {cand['final_score']:.4f}  {cand['pref_label']}  ({cand['scheme_id']})")
        click.echo(f"     {' > '.join(cand['breadcrumb'])}")
        click.echo(
            f"     base {cand['base_sim']:.4f}"
            f" + ancestors {cand['ancestor_bonus']:.4f}"
            f" + siblings {cand['sibling_bonus']:.4f}"
        )
        click.echo(f"     {cand['explanation']}")
    click.echo(f"Q: {turn['question']}")


def _parse_command(line: str, candidates: list[dict[str, Any]]) -> UserAction | None:
    """One chat command -> action; None means re-prompt (no round consumed)."""
    parts = line.strip().split(maxsplit=1)
    if not parts:
        return None
    verb = parts[0].lower()
    if verb == "done":
        return UserAction(kind=ActionKind.DONE)
    if verb in ("f", "refine"):
        if len(parts) < 2 or not parts[1].strip():
            click.echo("usage: f <text>")
            return None
        return UserAction(kind=ActionKind.REFINE, text=parts[1].strip())
    kinds = {
        "c": ActionKind.CONFIRM,
        "r": ActionKind.REJECT,
        "b": ActionKind.BROADEN,
        "n": ActionKind.NARROW,
        "s": ActionKind.EXPLORE_SIBLINGS,
    }
    if verb in kinds and len(parts) == 2:
        try:
            pick = int(parts[1])
        except ValueError:
            click.echo(f"not a number: {parts[1]!r}")
            return None
        if not (1 <= pick <= len(candidates)):
            click.echo(f"no candidate [{pick}]")
            return None
        chosen = candidates[pick - 1]
        return UserAction(
            kind=kinds[verb], topic_id=chosen["topic_id"], scheme_id=chosen["scheme_id"]
        )
    click.echo("commands: c N (confirm), r N (reject), f TEXT (refine), b N (broaden), n N (narrow), s N (siblings), done")
    return None


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--server", "server_url", default="", help="attach to a running service instead")
@click.option("--seed", type=int, default=None)
def chat(config_path: str | None, server_url: str, seed: int | None):
    """Interactive dialogue in the terminal."""
    try:
        if server_url:
            driver: Any = HttpDriver(server_url)
        else:
            overrides = {"retrieval": {"seed": seed}} if seed is not None else None
            driver = LocalDriver(_load_app_config(config_path, overrides))
    except (TopikosError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    query = click.prompt("Query", prompt_suffix="> ")
    try:
        turn = driver.start(query)
    except TopikosError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    _render_turn(turn)

    while True:
        try:
            line = click.prompt("", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, click.Abort):
            line = "done"
        action = _parse_command(line, turn["candidates"])
        if action is None:
            continue
        try:
            turn = driver.step(action)
        except TopikosError as exc:
            click.echo(f"error: {exc}")
            continue
        _render_turn(turn)
        if action.kind is ActionKind.DONE:
            entities = driver.resolution()
            if not entities:
                click.echo("no entities resolved")
            else:
                click.echo("Resolved entities:")
                for entity in entities:
                    click.echo(
                        f"  {entity['scheme_id']} :: {entity['topic_id']}"
                        f"  {entity['pref_label']}  confidence {entity['confidence']:.4f}"
                    )
            return


@main.command()
@click.argument("query", required=False)
@click.option("--batch", "batch_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--k", type=int, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--auto-confirm-top", is_flag=True, default=False)
def resolve(query, batch_path, config_path, k, tau, alpha, beta, gamma, seed, auto_confirm_top):
    """Non-interactive resolution; NDJSON records on stdout."""
    if not query and not batch_path:
        click.echo("error: provide a query or --batch FILE", err=True)
        sys.exit(1)
    overrides: dict[str, Any] = {"retrieval": {}, "rerank": {}}
    if k is not None:
        overrides["retrieval"]["k"] = k
    if tau is not None:
        overrides["retrieval"]["phase1_tau"] = tau
    if seed is not None:
        overrides["retrieval"]["seed"] = seed
    if alpha is not None:
        overrides["rerank"]["alpha"] = alpha
    if beta is not None:
        overrides["rerank"]["beta"] = beta
    if gamma is not None:
        overrides["rerank"]["gamma"] = gamma
    overrides = {key: val for key, val in overrides.items() if val}

    try:
        config = _load_app_config(config_path, overrides)
        registry = load_registry(config)
    except (TopikosError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    if batch_path:
        try:
            with open(batch_path, encoding="utf-8") as fh:
                queries = [line.strip() for line in fh if line.strip()]
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    else:
        queries = [query]

    for q in queries:
        try:
            session, turn = engine.start_session(q, registry, config)
            record = {"query": q, "phase": turn.phase.value, "candidates": [c.to_dict() for c in turn.candidates]}
            click.echo(json.dumps(record, sort_keys=True))
            if auto_confirm_top and turn.candidates:
                top = turn.candidates[0]
                action = UserAction(kind=ActionKind.CONFIRM, topic_id=top.topic_id, scheme_id=top.scheme_id)
                session, _ = engine.step(session, action, registry, config)
                session, _ = engine.step(session, UserAction(kind=ActionKind.DONE), registry, config)
                for entity in engine.finalize(session):
                    click.echo(json.dumps({"query": q, "entity": entity.to_dict()}, sort_keys=True))
        except TopikosError as exc:
            if batch_path:
                click.echo(json.dumps({"query": q, "error": {"code": exc.code, "message": exc.message}}, sort_keys=True))
            else:
                click.echo(f"error: {exc.code}: {exc.message}", err=True)
                sys.exit(1)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--listen", default=None, help="host:port, overrides config")
def serve(config_path: str | None, listen: str | None):
    """Run the HTTP session service."""
    import uvicorn

    from .service.app import create_app

    try:
        overrides = {"listen": listen} if listen else None
        config = _load_app_config(config_path, overrides)
        app = create_app(config)
    except (TopikosError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    host, _, port = config.listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")


if __name__ == "__main__":
    main()
