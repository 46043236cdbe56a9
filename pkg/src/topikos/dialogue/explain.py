"""Candidate explanations and the agent's questions.

The deterministic template explainer needs no network: it combines the
label, the hierarchy breadcrumb and the first sentence of the definition.
A remote explainer can be configured; any failure there falls back to
the template and records a warning, so explanation never fails.
"""

from __future__ import annotations

import logging
from typing import Callable

import httpx

from ..config import ExplainerConfig
from ..kos.model import KosGraph, TopicNode, breadcrumb_labels

logger = logging.getLogger(__name__)

WarnSink = Callable[[str], None]


def first_sentence(text: str) -> str:
    """Everything up to and including the first period, or the whole text."""
    stripped = text.strip()
    dot = stripped.find(".")
    return stripped[: dot + 1] if dot != -1 else stripped


def template_explanation(node: TopicNode, graph: KosGraph) -> str:
    path = " > ".join(breadcrumb_labels(graph, node.id))
    gist = first_sentence(node.definition) if node.definition.strip() else "(no definition)"
    return f"{node.pref_label} — path: {path} — {gist}"


class TemplateExplainer:
    def explain(self, node: TopicNode, graph: KosGraph, query: str, warn: WarnSink | None = None) -> str:
        return template_explanation(node, graph)


class RemoteExplainer:
    """POSTs topic fields and the ancestor path to a text endpoint.

    Wire contract: request ``{"topic": {"id", "pref_label", "definition"},
    "ancestor_labels": [...], "query": "..."}``, response
    ``{"explanation": "..."}``.  Total fallback to the template.
    """

    def __init__(self, config: ExplainerConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    def explain(self, node: TopicNode, graph: KosGraph, query: str, warn: WarnSink | None = None) -> str:
        labels = breadcrumb_labels(graph, node.id)
        try:
            response = self._client.post(
                self.config.endpoint,
                json={
                    "topic": {"id": node.id, "pref_label": node.pref_label, "definition": node.definition},
                    "ancestor_labels": labels[:-1],
                    "query": query,
                },
            )
            if response.status_code // 100 != 2:
                raise httpx.HTTPStatusError("bad status", request=response.request, response=response)
            text = response.json().get("explanation", "")
            if not isinstance(text, str) or not text.strip():
                raise ValueError("empty explanation")
            return text
        except (httpx.HTTPError, ValueError, KeyError, TypeError) as exc:
            message = f"explainer_fallback: {node.id}: {exc.__class__.__name__}"
            logger.warning(message)
            if warn is not None:
                warn(message)
            return template_explanation(node, graph)


def make_explainer(config: ExplainerConfig, transport: httpx.BaseTransport | None = None):
    if config.kind == "remote":
        return RemoteExplainer(config, transport=transport)
    return TemplateExplainer()


def socratic_question(candidates, phase_label: str, scope_desc: str) -> str:
    """A question derived from the candidate structure, never a stock prompt.

    With two or more candidates the question contrasts the top two by
    their root areas; with one it asks for confirmation; with none it
    explains the empty scope and asks for a new direction.
    """
    if not candidates:
        where = scope_desc or "the current scope"
        return (
            f"No topics matched within {where}. "
            "Could you describe your topic differently, or should we broaden the search?"
        )
    if len(candidates) == 1:
        only = candidates[0]
        area = only.breadcrumb[0] if only.breadcrumb else only.pref_label
        return (
            f"Only one topic fits here: '{only.pref_label}' under {area}. "
            "Does it capture what you mean, or should we look elsewhere?"
        )
    first_c, second_c = candidates[0], candidates[1]
    root1 = first_c.breadcrumb[0] if first_c.breadcrumb else first_c.pref_label
    root2 = second_c.breadcrumb[0] if second_c.breadcrumb else second_c.pref_label
    if root1 != root2:
        return (
            f"Your description sits between '{first_c.pref_label}' under {root1} and "
            f"'{second_c.pref_label}' under {root2}. Which area is closer to your intent?"
        )
    return (
        f"Within {root1}, is your focus closer to '{first_c.pref_label}' "
        f"or to '{second_c.pref_label}'?"
    )
