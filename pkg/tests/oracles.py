"""Independent reference implementations used to check the package.

Nothing here imports the package's retrieval or graph-query code: the
reranking oracle walks the hierarchy with boolean adjacency-matrix
powers and plain loops, and the embedding reference builds its feature
map with a dict, so agreement with the fast paths is meaningful.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np


# --- embedding reference ---------------------------------------------------


def reference_features(text: str, dim: int) -> dict[int, float]:
    lowered = text.lower()
    if len(lowered) < 3:
        lowered = lowered + " " * (3 - len(lowered))
    feats: dict[int, float] = {}
    for i in range(len(lowered) - 2):
        tri = lowered[i : i + 3]
        h = int.from_bytes(hashlib.blake2b(tri.encode("utf-8"), digest_size=8).digest(), "big")
        sign = -1.0 if (h >> 63) & 1 else 1.0
        idx = (h & ((1 << 63) - 1)) % dim
        feats[idx] = feats.get(idx, 0.0) + sign
    return feats


def reference_embed(text: str, dim: int) -> np.ndarray:
    vec = np.zeros(dim)
    for idx, w in reference_features(text, dim).items():
        vec[idx] = w
    norm = math.sqrt(float(np.dot(vec, vec)))
    if norm == 0.0:
        vec = np.zeros(dim)
        vec[0] = 1.0
        return vec
    return vec / norm


def trigram_count_cosine(a: str, b: str) -> float:
    """Cosine over raw trigram counts, no hashing at all."""

    def counts(text: str) -> dict[str, int]:
        t = text.lower()
        if len(t) < 3:
            t = t + " " * (3 - len(t))
        out: dict[str, int] = {}
        for i in range(len(t) - 2):
            tri = t[i : i + 3]
            out[tri] = out.get(tri, 0) + 1
        return out

    ca, cb = counts(a), counts(b)
    dot = sum(ca[k] * cb.get(k, 0) for k in ca)
    na = math.sqrt(sum(v * v for v in ca.values()))
    nb = math.sqrt(sum(v * v for v in cb.values()))
    return dot / (na * nb)


# --- hierarchy reference ---------------------------------------------------


def matrix_ancestor_distances(broader: dict[str, list[str]], topic: str) -> dict[str, int]:
    """Shortest ancestor distances via boolean matrix powers."""
    ids = sorted(broader)
    pos = {tid: i for i, tid in enumerate(ids)}
    n = len(ids)
    adj = np.zeros((n, n), dtype=bool)
    for child, parents in broader.items():
        for parent in parents:
            adj[pos[child], pos[parent]] = True
    out: dict[str, int] = {}
    reach = adj.copy()
    for d in range(1, n + 1):
        row = reach[pos[topic]]
        for j in np.nonzero(row)[0]:
            out.setdefault(ids[j], d)
        reach = reach @ adj
        if not reach.any():
            break
    return out


def oracle_siblings(broader: dict[str, list[str]], topic: str) -> list[str]:
    sibs: set[str] = set()
    for other, parents in broader.items():
        if other == topic:
            continue
        if set(parents) & set(broader[topic]):
            sibs.add(other)
    return sorted(sibs)


def oracle_rerank(
    broader: dict[str, list[str]],
    vectors: dict[str, np.ndarray],
    query: np.ndarray,
    candidate_ids: list[str],
    alpha: float,
    beta: float,
    gamma: float,
    m: int,
) -> dict[str, float]:
    """Brute-force final scores, one triple loop, no shared code."""
    scores: dict[str, float] = {}
    for tid in candidate_ids:
        base = float(np.dot(vectors[tid], query))
        anc = 0.0
        for ancestor, d in matrix_ancestor_distances(broader, tid).items():
            anc += (beta**d) * float(np.dot(vectors[ancestor], query))
        anc *= alpha
        sib_sims = sorted(
            (float(np.dot(vectors[s], query)) for s in oracle_siblings(broader, tid)),
            reverse=True,
        )
        kept = [s for s in sib_sims if s >= 0][:m]
        sib = gamma * (sum(kept) / len(kept)) if kept else 0.0
        scores[tid] = base + anc + sib
    return scores


def random_polyhierarchy(rng: np.random.Generator, n: int) -> dict[str, list[str]]:
    """Random DAG as a broader map; node i may only point at nodes < i."""
    ids = [f"n{i:02d}" for i in range(n)]
    broader: dict[str, list[str]] = {ids[0]: []}
    for i in range(1, n):
        parents = []
        if rng.random() > 0.25:  # ~25% extra roots
            count = int(rng.integers(1, min(i, 3) + 1))
            parents = sorted(rng.choice(i, size=count, replace=False).tolist())
        broader[ids[i]] = [ids[p] for p in parents]
    return broader
