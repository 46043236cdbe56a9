"""Loaded schemes, their indexes, and the crosswalks between them.

The registry is read-only during serving: it is built once from a data
directory (``schemes/*.json`` canonical documents plus an optional
``links.json``) and then shared across sessions and threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .config import AppConfig
from .embedding import make_provider
from .errors import ConfigError, UnknownScheme
from .kos.canonical import parse_canonical, parse_scheme_links
from .kos.model import Kind, KosGraph, SchemeLink
from .kos.validate import validate
from .retrieval import TopicIndex, build_index


@dataclass
class Registry:
    graphs: dict[str, KosGraph]
    indexes: dict[str, TopicIndex]
    links: list[SchemeLink]
    provider: object
    _links_by_source: dict[tuple[str, str], list[SchemeLink]] = field(default_factory=dict)

    def __post_init__(self):
        for link in self.links:
            self._links_by_source.setdefault((link.from_scheme, link.from_topic), []).append(link)

    @property
    def multi_field_ids(self) -> list[str]:
        return sorted(s for s, g in self.graphs.items() if g.scheme.kind is Kind.MULTI_FIELD)

    @property
    def single_field_ids(self) -> list[str]:
        return sorted(s for s, g in self.graphs.items() if g.scheme.kind is Kind.SINGLE_FIELD)

    def graph(self, scheme_id: str) -> KosGraph:
        try:
            return self.graphs[scheme_id]
        except KeyError:
            raise UnknownScheme(scheme_id) from None

    def index(self, scheme_id: str) -> TopicIndex:
        try:
            return self.indexes[scheme_id]
        except KeyError:
            raise UnknownScheme(scheme_id) from None

    def links_from(self, scheme_id: str, topic_id: str) -> list[SchemeLink]:
        return list(self._links_by_source.get((scheme_id, topic_id), []))


def load_registry(config: AppConfig) -> Registry:
    """Load and index every scheme under the configured data directory.

    Every graph must validate with zero findings; every link must resolve
    from a multi-field graph into a single-field graph.
    """
    schemes_dir = os.path.join(config.data_dir, "schemes")
    if not os.path.isdir(schemes_dir):
        raise ConfigError(f"schemes directory not found: {schemes_dir}")

    provider = make_provider(config.provider)
    graphs: dict[str, KosGraph] = {}
    indexes: dict[str, TopicIndex] = {}
    for name in sorted(os.listdir(schemes_dir)):
        if not name.endswith(".json"):
            continue
        path = os.path.join(schemes_dir, name)
        with open(path, encoding="utf-8") as fh:
            graph = parse_canonical(fh.read())
        report = validate(graph)
        if not report.ok:
            details = "; ".join(f.message for f in report.findings)
            raise ConfigError(f"{name}: validation findings: {details}")
        if graph.scheme.id in graphs:
            raise ConfigError(f"duplicate scheme id {graph.scheme.id!r} in {name}")
        graphs[graph.scheme.id] = graph
        indexes[graph.scheme.id] = build_index(graph, provider)

    links: list[SchemeLink] = []
    links_path = os.path.join(config.data_dir, "links.json")
    if os.path.exists(links_path):
        with open(links_path, encoding="utf-8") as fh:
            links = parse_scheme_links(fh.read())
        for link in links:
            _check_link(link, graphs)

    return Registry(graphs=graphs, indexes=indexes, links=links, provider=provider)


def _check_link(link: SchemeLink, graphs: dict[str, KosGraph]) -> None:
    source = graphs.get(link.from_scheme)
    if source is None or source.scheme.kind is not Kind.MULTI_FIELD:
        raise ConfigError(f"link source {link.from_scheme!r} is not a loaded multi-field scheme")
    if link.from_topic not in source.nodes:
        raise ConfigError(f"link source topic {link.from_topic!r} not in {link.from_scheme!r}")
    target = graphs.get(link.to_scheme)
    if target is None or target.scheme.kind is not Kind.SINGLE_FIELD:
        raise ConfigError(f"link target {link.to_scheme!r} is not a loaded single-field scheme")
    for entry in link.entry_topics:
        if entry not in target.nodes:
            raise ConfigError(f"link entry topic {entry!r} not in {link.to_scheme!r}")
