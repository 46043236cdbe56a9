"""Topic concepts and the polyhierarchical graphs that contain them.

A ``KosGraph`` is immutable after assembly: parsers build node drafts and
hand them to :func:`assemble_graph`, which derives the narrower edges,
rejects dangling references and cycles, and computes the roots.  All
list-valued outputs are sorted so identical inputs always produce
identical graphs.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from ..errors import CycleDetected, DanglingReference, UnknownTopic


class Kind(enum.Enum):
    """Which dialogue phase may query a scheme."""

    MULTI_FIELD = "multi_field"
    SINGLE_FIELD = "single_field"


@dataclass
class TopicNode:
    id: str
    scheme_id: str
    pref_label: str
    alt_labels: list[str] = field(default_factory=list)
    definition: str = ""
    broader: list[str] = field(default_factory=list)
    narrower: list[str] = field(default_factory=list)


@dataclass
class KosScheme:
    id: str
    name: str
    kind: Kind
    field_tags: list[str] = field(default_factory=list)


@dataclass
class KosGraph:
    scheme: KosScheme
    nodes: dict[str, TopicNode]
    roots: list[str]


@dataclass(frozen=True)
class SchemeLink:
    """Crosswalk from a multi-field topic into a single-field scheme.

    Empty ``entry_topics`` means the whole target scheme is in scope.
    """

    from_scheme: str
    from_topic: str
    to_scheme: str
    entry_topics: tuple[str, ...] = ()


def assemble_graph(scheme: KosScheme, nodes: dict[str, TopicNode]) -> KosGraph:
    """Finish a graph from parsed nodes: derive edges, check integrity.

    ``nodes`` carry declared ``broader`` (and possibly partial ``narrower``)
    edges; both directions are rebuilt here so the bidirectional invariant
    holds by construction.  Raises DanglingReference or CycleDetected.
    """
    for node in nodes.values():
        for parent in node.broader:
            if parent not in nodes:
                raise DanglingReference(parent, node.id)
        for child in node.narrower:
            if child not in nodes:
                raise DanglingReference(child, node.id)

    # Merge declared narrower edges into broader, then rederive narrower.
    broader: dict[str, set[str]] = {nid: set(n.broader) for nid, n in nodes.items()}
    for nid, node in nodes.items():
        for child in node.narrower:
            broader[child].add(nid)

    cycle = _find_cycle(broader)
    if cycle is not None:
        raise CycleDetected(cycle)

    narrower: dict[str, set[str]] = {nid: set() for nid in nodes}
    for nid, parents in broader.items():
        for parent in parents:
            narrower[parent].add(nid)

    for nid, node in nodes.items():
        node.broader = sorted(broader[nid])
        node.narrower = sorted(narrower[nid])

    roots = sorted(nid for nid, parents in broader.items() if not parents)
    return KosGraph(scheme=scheme, nodes=nodes, roots=roots)


def _find_cycle(broader: dict[str, set[str]]) -> list[str] | None:
    """Return one cycle path like [A, B, A], or None if acyclic."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in broader}

    for start in sorted(broader):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(broader[start])))]
        path = [start]
        color[start] = GREY
        while stack:
            node, parents = stack[-1]
            advanced = False
            for parent in parents:
                if color[parent] == GREY:
                    i = path.index(parent)
                    return path[i:] + [parent]
                if color[parent] == WHITE:
                    color[parent] = GREY
                    path.append(parent)
                    stack.append((parent, iter(sorted(broader[parent]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def get_node(graph: KosGraph, topic_id: str) -> TopicNode:
    try:
        return graph.nodes[topic_id]
    except KeyError:
        raise UnknownTopic(topic_id, graph.scheme.id) from None


def ancestors_with_distance(graph: KosGraph, topic_id: str) -> list[tuple[str, int]]:
    """All distinct ancestors with their shortest broader-path distance.

    d=1 for an immediate parent.  Each ancestor appears once, at its
    shortest distance; output is ordered by ascending d, then id.
    """
    node = get_node(graph, topic_id)
    dist: dict[str, int] = {}
    queue: deque[tuple[str, int]] = deque((p, 1) for p in node.broader)
    while queue:
        current, d = queue.popleft()
        if current in dist:
            continue
        dist[current] = d
        for parent in graph.nodes[current].broader:
            if parent not in dist:
                queue.append((parent, d + 1))
    return sorted(dist.items(), key=lambda item: (item[1], item[0]))


def siblings(graph: KosGraph, topic_id: str) -> list[str]:
    """Topics sharing at least one immediate parent, excluding the topic."""
    node = get_node(graph, topic_id)
    out: set[str] = set()
    for parent in node.broader:
        out.update(graph.nodes[parent].narrower)
    out.discard(topic_id)
    return sorted(out)


def descendants(graph: KosGraph, topic_id: str) -> list[str]:
    """Strict descendants (narrower closure), lexicographically ordered."""
    get_node(graph, topic_id)
    seen: set[str] = set()
    queue = deque(graph.nodes[topic_id].narrower)
    while queue:
        current = queue.popleft()
        if current in seen:
            continue
        seen.add(current)
        queue.extend(graph.nodes[current].narrower)
    return sorted(seen)


def breadcrumb_labels(graph: KosGraph, topic_id: str) -> list[str]:
    """Ancestor labels root-most first, then the topic's own label.

    Ordering: descending distance, id tie-break, so on trees this is the
    exact root-to-topic path and on polyhierarchies it is deterministic.
    """
    chain = ancestors_with_distance(graph, topic_id)
    chain.sort(key=lambda item: (-item[1], item[0]))
    labels = [graph.nodes[aid].pref_label for aid, _ in chain]
    labels.append(graph.nodes[topic_id].pref_label)
    return labels
