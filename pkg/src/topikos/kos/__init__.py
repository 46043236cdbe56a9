from .model import (
    Kind,
    KosGraph,
    KosScheme,
    SchemeLink,
    TopicNode,
    ancestors_with_distance,
    assemble_graph,
    breadcrumb_labels,
    descendants,
    get_node,
    siblings,
)
from .canonical import parse_canonical, parse_scheme_links, serialize_canonical
from .skos import parse_skos_ntriples
from .validate import Finding, ValidationReport, validate

__all__ = [
    "Kind",
    "KosGraph",
    "KosScheme",
    "SchemeLink",
    "TopicNode",
    "ancestors_with_distance",
    "assemble_graph",
    "breadcrumb_labels",
    "descendants",
    "get_node",
    "siblings",
    "parse_canonical",
    "parse_scheme_links",
    "serialize_canonical",
    "parse_skos_ntriples",
    "Finding",
    "ValidationReport",
    "validate",
]
