"""Integrity checking for assembled or hand-built graphs.

Findings are data, not errors: a graph with zero findings satisfies all
node and graph invariants.  Parsers raise on the same defects; this pass
exists for deserialized or manually constructed graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import KosGraph, _find_cycle


@dataclass(frozen=True)
class Finding:
    kind: str  # cycle | dangling_reference | bidirectional_inconsistency | empty_label | root_inconsistency
    message: str
    topic_ids: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return not self.findings


def validate(graph: KosGraph) -> ValidationReport:
    findings: list[Finding] = []
    nodes = graph.nodes

    for nid in sorted(nodes):
        node = nodes[nid]
        if not nid:
            findings.append(Finding("empty_label", "topic with empty id", (nid,)))
        if not node.pref_label.strip():
            findings.append(Finding("empty_label", f"topic {nid!r} has an empty pref_label", (nid,)))
        for parent in node.broader:
            if parent not in nodes:
                findings.append(
                    Finding("dangling_reference", f"{nid!r} lists unknown broader {parent!r}", (nid, parent))
                )
            elif nid not in nodes[parent].narrower:
                findings.append(
                    Finding(
                        "bidirectional_inconsistency",
                        f"{parent!r} is broader of {nid!r} but does not list it as narrower",
                        (parent, nid),
                    )
                )
        for child in node.narrower:
            if child not in nodes:
                findings.append(
                    Finding("dangling_reference", f"{nid!r} lists unknown narrower {child!r}", (nid, child))
                )
            elif nid not in nodes[child].broader:
                findings.append(
                    Finding(
                        "bidirectional_inconsistency",
                        f"{child!r} is narrower of {nid!r} but does not list it as broader",
                        (nid, child),
                    )
                )

    broader = {nid: {p for p in node.broader if p in nodes} for nid, node in nodes.items()}
    cycle = _find_cycle(broader)
    if cycle is not None:
        findings.append(Finding("cycle", "cycle through broader: " + " -> ".join(cycle), tuple(cycle)))

    expected_roots = sorted(nid for nid, node in nodes.items() if not node.broader)
    if sorted(graph.roots) != expected_roots:
        findings.append(
            Finding(
                "root_inconsistency",
                f"roots {sorted(graph.roots)} != nodes without broader {expected_roots}",
            )
        )

    return ValidationReport(findings=findings)
