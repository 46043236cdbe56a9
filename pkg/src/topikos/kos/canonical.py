"""Native JSON taxonomy format and the scheme-link document.

This is the strict house format: unknown fields are rejected, required
fields must be present, and parse/serialize round-trip exactly.  Topic
documents look like::

    {
      "scheme": {"id": "...", "name": "...", "kind": "multi_field", "field_tags": []},
      "topics": [
        {"id": "...", "pref_label": "...", "alt_labels": [], "definition": "", "broader": []}
      ]
    }
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import SchemaViolation
from .model import Kind, KosGraph, KosScheme, SchemeLink, TopicNode, assemble_graph

_SCHEME_FIELDS = {"id", "name", "kind", "field_tags"}
_TOPIC_FIELDS = {"id", "pref_label", "alt_labels", "definition", "broader"}
_LINK_FIELDS = {"from_scheme", "from_topic", "to_scheme", "entry_topics"}


def parse_canonical(text: str) -> KosGraph:
    """Parse a canonical taxonomy document.

    Raises SchemaViolation on structural problems, DanglingReference or
    CycleDetected on graph problems.
    """
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise SchemaViolation("document root must be an object")
    _reject_unknown(doc, {"scheme", "topics"}, "document")
    scheme_obj = _require(doc, "scheme", dict, "document")
    topics_obj = _require(doc, "topics", list, "document")

    _reject_unknown(scheme_obj, _SCHEME_FIELDS, "scheme")
    scheme_id = _require_str(scheme_obj, "id", "scheme")
    name = _require_str(scheme_obj, "name", "scheme")
    kind_raw = _require_str(scheme_obj, "kind", "scheme")
    try:
        kind = Kind(kind_raw)
    except ValueError:
        raise SchemaViolation(f"scheme: unknown kind {kind_raw!r}") from None
    field_tags = _str_list(scheme_obj.get("field_tags", []), "scheme.field_tags")
    if kind is Kind.SINGLE_FIELD and not field_tags:
        raise SchemaViolation("single_field scheme requires at least one field_tag")
    scheme = KosScheme(id=scheme_id, name=name, kind=kind, field_tags=field_tags)

    nodes: dict[str, TopicNode] = {}
    for i, raw in enumerate(topics_obj):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"topics[{i}] must be an object")
        _reject_unknown(raw, _TOPIC_FIELDS, f"topics[{i}]")
        topic_id = _require_str(raw, "id", f"topics[{i}]")
        if topic_id in nodes:
            raise SchemaViolation(f"duplicate topic id {topic_id!r}")
        nodes[topic_id] = TopicNode(
            id=topic_id,
            scheme_id=scheme_id,
            pref_label=_require_str(raw, "pref_label", f"topics[{i}]"),
            alt_labels=_str_list(raw.get("alt_labels", []), f"topics[{i}].alt_labels"),
            definition=_opt_str(raw.get("definition", ""), f"topics[{i}].definition"),
            broader=_str_list(raw.get("broader", []), f"topics[{i}].broader"),
        )
    return assemble_graph(scheme, nodes)


def serialize_canonical(graph: KosGraph) -> str:
    """Serialize to the canonical document; stable bytes for equal graphs."""
    doc = {
        "scheme": {
            "id": graph.scheme.id,
            "name": graph.scheme.name,
            "kind": graph.scheme.kind.value,
            "field_tags": list(graph.scheme.field_tags),
        },
        "topics": [
            {
                "id": node.id,
                "pref_label": node.pref_label,
                "alt_labels": list(node.alt_labels),
                "definition": node.definition,
                "broader": list(node.broader),
            }
            for node in (graph.nodes[tid] for tid in sorted(graph.nodes))
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_scheme_links(text: str) -> list[SchemeLink]:
    """Parse a scheme-link document: a JSON list of crosswalk objects."""
    doc = _load_json(text)
    if not isinstance(doc, list):
        raise SchemaViolation("link document root must be a list")
    links: list[SchemeLink] = []
    for i, raw in enumerate(doc):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"links[{i}] must be an object")
        _reject_unknown(raw, _LINK_FIELDS, f"links[{i}]")
        links.append(
            SchemeLink(
                from_scheme=_require_str(raw, "from_scheme", f"links[{i}]"),
                from_topic=_require_str(raw, "from_topic", f"links[{i}]"),
                to_scheme=_require_str(raw, "to_scheme", f"links[{i}]"),
                entry_topics=tuple(_str_list(raw.get("entry_topics", []), f"links[{i}].entry_topics")),
            )
        )
    return links


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from None


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaViolation(f"{where}: unknown field(s) {sorted(unknown)}")


def _require(obj: dict, key: str, typ: type, where: str) -> Any:
    if key not in obj:
        raise SchemaViolation(f"{where}: missing required field {key!r}")
    value = obj[key]
    if not isinstance(value, typ):
        raise SchemaViolation(f"{where}.{key}: wrong type")
    return value


def _require_str(obj: dict, key: str, where: str) -> str:
    value = _require(obj, key, str, where)
    if not value:
        raise SchemaViolation(f"{where}.{key}: must be non-empty")
    return value


def _opt_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(f"{where}: must be a string")
    return value


def _str_list(value: Any, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"{where}: must be a list of strings")
    return list(value)
