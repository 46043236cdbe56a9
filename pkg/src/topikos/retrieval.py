"""Two-stage topic retrieval: temperature-controlled search, then
hierarchy-aware reranking.

Stage one ranks topics by query cosine.  With tau == 0 it is the exact
top-k; with tau > 0 candidates are sampled without replacement from a
softmax over similarities, so higher tau yields more diverse candidates.

Stage two rescores each candidate as

    final = cos(q, t)
            + alpha * sum over ancestors a of beta^d(a) * cos(q, a)
            + gamma * mean(top-m non-negative sibling cosines)

with d the shortest broader-path distance.  The sibling term is a boost
only: negative sibling similarities are dropped, and topics without
(positively similar) siblings get zero.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .embedding import EmbeddingVector, cosine
from .errors import (
    DimensionMismatch,
    EmptyIndex,
    FingerprintMismatch,
    TopikosError,
    UnknownRestrictedTopic,
    UnknownTopic,
)
from .kos.model import KosGraph, ancestors_with_distance, siblings


@dataclass
class TopicIndex:
    scheme_id: str
    entries: dict[str, EmbeddingVector]
    dim: int
    provider_fingerprint: str
    # cache: ids sorted, vectors stacked row-wise in the same order
    _ids: list[str] = field(default_factory=list, repr=False)
    _matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self._ids = sorted(self.entries)
        if self._ids:
            self._matrix = np.stack([self.entries[tid].values for tid in self._ids])


@dataclass(frozen=True)
class RetrievalParams:
    k: int = 10
    tau: float = 0.0
    seed: int = 0
    restrict_to: frozenset[str] | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.restrict_to is not None and not self.restrict_to:
            raise ValueError("restrict_to must be non-empty when present")


@dataclass(frozen=True)
class RerankParams:
    alpha: float = 0.3
    beta: float = 0.5
    gamma: float = 0.1
    m: int = 3

    def __post_init__(self):
        if self.alpha < 0 or self.gamma < 0:
            raise ValueError("alpha and gamma must be >= 0")
        if not (0 < self.beta <= 1):
            raise ValueError("beta must be in (0, 1]")
        if self.m < 1:
            raise ValueError("m must be >= 1")


@dataclass
class RetrievalCandidate:
    topic_id: str
    scheme_id: str
    base_sim: float
    ancestor_bonus: float = 0.0
    sibling_bonus: float = 0.0
    final_score: float = 0.0
    ancestor_path: list[tuple[str, int, float]] = field(default_factory=list)  # (id, d, sim)
    sibling_top: list[tuple[str, float]] = field(default_factory=list)  # (id, sim)


def embedding_text(pref_label: str, alt_labels: list[str], definition: str) -> str:
    """Join label, synonyms and definition; separators only between present parts."""
    parts = [pref_label]
    if alt_labels:
        parts.append(", ".join(alt_labels))
    if definition:
        parts.append(definition)
    return "; ".join(parts)


def build_index(graph: KosGraph, provider) -> TopicIndex:
    """Embed every topic of a validated graph."""
    entries: dict[str, EmbeddingVector] = {}
    for topic_id in sorted(graph.nodes):
        node = graph.nodes[topic_id]
        text = embedding_text(node.pref_label, node.alt_labels, node.definition)
        try:
            entries[topic_id] = provider.embed(text)
        except TopikosError as exc:
            exc.topic_id = topic_id
            raise
    return TopicIndex(
        scheme_id=graph.scheme.id,
        entries=entries,
        dim=provider.config.dim,
        provider_fingerprint=provider.config.fingerprint,
    )


def initial_search(
    index: TopicIndex, query_vec: EmbeddingVector, params: RetrievalParams
) -> list[RetrievalCandidate]:
    """Stage-one candidates with base_sim populated and bonuses zero."""
    if not index.entries:
        raise EmptyIndex(f"index for scheme {index.scheme_id!r} is empty")
    if query_vec.dim != index.dim:
        raise DimensionMismatch(f"query dim {query_vec.dim} != index dim {index.dim}")

    if params.restrict_to is not None:
        for tid in sorted(params.restrict_to):
            if tid not in index.entries:
                raise UnknownRestrictedTopic(f"restricted topic {tid!r} not in index")
        eligible = sorted(params.restrict_to)
    else:
        eligible = index._ids

    sims = {tid: cosine(index.entries[tid], query_vec) for tid in eligible}
    k = min(params.k, len(eligible))

    if params.tau == 0.0:
        chosen = sorted(eligible, key=lambda tid: (-sims[tid], tid))[:k]
    else:
        chosen = _softmax_sample(eligible, sims, params.tau, k, params.seed)
        chosen.sort(key=lambda tid: (-sims[tid], tid))

    return [
        RetrievalCandidate(topic_id=tid, scheme_id=index.scheme_id, base_sim=sims[tid])
        for tid in chosen
    ]


def _softmax_sample(
    eligible: list[str], sims: dict[str, float], tau: float, k: int, seed: int
) -> list[str]:
    """k draws without replacement by iterated renormalized sampling.

    Probabilities are softmax(sim / tau) over the remaining topics, with
    max-subtraction for stability.  Fully determined by the seed: topics
    are traversed in lexicographic order and selected by inverse-CDF.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    remaining = list(eligible)  # already sorted
    sim_arr = np.array([sims[t] for t in remaining])
    chosen: list[str] = []
    for _ in range(k):
        logits = sim_arr / tau
        weights = np.exp(logits - logits.max())
        probs = weights / weights.sum()
        cdf = np.cumsum(probs)
        u = rng.random()
        pick = int(np.searchsorted(cdf, u, side="right"))
        pick = min(pick, len(remaining) - 1)  # guard u landing on fp rounding tail
        chosen.append(remaining.pop(pick))
        sim_arr = np.delete(sim_arr, pick)
    return chosen


def rerank(
    graph: KosGraph,
    index: TopicIndex,
    query_vec: EmbeddingVector,
    candidates: list[RetrievalCandidate],
    params: RerankParams,
) -> list[RetrievalCandidate]:
    """Hierarchy-aware rescoring; no candidate is added or removed."""
    if query_vec.dim != index.dim:
        raise DimensionMismatch(f"query dim {query_vec.dim} != index dim {index.dim}")
    out: list[RetrievalCandidate] = []
    for cand in candidates:
        if cand.topic_id not in graph.nodes:
            raise UnknownTopic(cand.topic_id, graph.scheme.id)
        if cand.topic_id not in index.entries:
            raise UnknownTopic(cand.topic_id, index.scheme_id)

        base = cosine(index.entries[cand.topic_id], query_vec)

        path: list[tuple[str, int, float]] = []
        ancestor_bonus = 0.0
        for ancestor_id, d in ancestors_with_distance(graph, cand.topic_id):
            sim = cosine(index.entries[ancestor_id], query_vec)
            path.append((ancestor_id, d, sim))
            ancestor_bonus += (params.beta**d) * sim
        ancestor_bonus *= params.alpha

        sib_sims = sorted(
            ((sid, cosine(index.entries[sid], query_vec)) for sid in siblings(graph, cand.topic_id)),
            key=lambda item: (-item[1], item[0]),
        )
        top = [(sid, sim) for sid, sim in sib_sims if sim >= 0][: params.m]
        sibling_bonus = params.gamma * (sum(s for _, s in top) / len(top)) if top else 0.0

        out.append(
            replace(
                cand,
                base_sim=base,
                ancestor_bonus=ancestor_bonus,
                sibling_bonus=sibling_bonus,
                final_score=base + ancestor_bonus + sibling_bonus,
                ancestor_path=path,
                sibling_top=top,
            )
        )
    out.sort(key=lambda c: (-c.final_score, c.topic_id))
    return out


@dataclass(frozen=True)
class AncestorContribution:
    ancestor_id: str
    distance: int
    decay: float  # beta^d
    sim: float
    contribution: float  # alpha * beta^d * sim


@dataclass(frozen=True)
class ScoreBreakdown:
    topic_id: str
    base_sim: float
    ancestors: tuple[AncestorContribution, ...]
    sibling_top: tuple[tuple[str, float], ...]
    ancestor_bonus: float
    sibling_bonus: float
    final_score: float


def score_breakdown(candidate: RetrievalCandidate, params: RerankParams) -> ScoreBreakdown:
    """Explain a reranked candidate; contribution rows sum to the bonuses."""
    rows = []
    if params.alpha > 0:
        for ancestor_id, d, sim in candidate.ancestor_path:
            decay = params.beta**d
            rows.append(
                AncestorContribution(
                    ancestor_id=ancestor_id,
                    distance=d,
                    decay=decay,
                    sim=sim,
                    contribution=params.alpha * decay * sim,
                )
            )
    return ScoreBreakdown(
        topic_id=candidate.topic_id,
        base_sim=candidate.base_sim,
        ancestors=tuple(rows),
        sibling_top=tuple(candidate.sibling_top),
        ancestor_bonus=candidate.ancestor_bonus,
        sibling_bonus=candidate.sibling_bonus,
        final_score=candidate.final_score,
    )


def save_index(index: TopicIndex, path: str) -> None:
    """Write a snapshot; stable bytes for identical indexes."""
    doc = {
        "scheme_id": index.scheme_id,
        "dim": index.dim,
        "provider_fingerprint": index.provider_fingerprint,
        "entries": {tid: index.entries[tid].tolist() for tid in sorted(index.entries)},
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def load_index(path: str, expected_fingerprint: str) -> TopicIndex:
    """Load a snapshot, refusing one built under a different provider."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    fingerprint = doc["provider_fingerprint"]
    if fingerprint != expected_fingerprint:
        raise FingerprintMismatch(
            f"index built with {fingerprint!r}, active provider is {expected_fingerprint!r}"
        )
    dim = int(doc["dim"])
    entries = {
        tid: EmbeddingVector(values=np.asarray(values, dtype=np.float64), dim=dim)
        for tid, values in doc["entries"].items()
    }
    return TopicIndex(
        scheme_id=doc["scheme_id"],
        entries=entries,
        dim=dim,
        provider_fingerprint=fingerprint,
    )


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 64-bit sub-seed for one sampling call."""
    material = repr((base_seed,) + parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(material, digest_size=8).digest(), "big")
