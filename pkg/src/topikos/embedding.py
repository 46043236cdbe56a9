"""Text embedding providers behind one small interface.

Two providers exist: a deterministic local one built on hashed character
trigrams (used for tests and offline operation) and an HTTP client for a
real model server.  Both return L2-normalized vectors.

Local provider hash, pinned for reproducibility across implementations:
each lowercased trigram is hashed with BLAKE2b (digest_size=8, no key),
the 8 digest bytes read as a big-endian unsigned 64-bit integer ``h``;
bit 63 (the most significant bit) selects the sign (0 -> +1, 1 -> -1) and
``(h & 0x7FFF_FFFF_FFFF_FFFF) % dim`` selects the feature index.
"""

from __future__ import annotations

import enum
import hashlib
import threading
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import DimensionMismatch, EmptyText, RemoteBadResponse, RemoteUnavailable

DEFAULT_DIM = 256
_SIGN_BIT = 63
_INDEX_MASK = (1 << 63) - 1


class ProviderKind(enum.Enum):
    LOCAL_DETERMINISTIC = "local"
    REMOTE_HTTP = "remote"


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind = ProviderKind.LOCAL_DETERMINISTIC
    dim: int = DEFAULT_DIM
    endpoint: str = ""
    model_name: str = ""
    timeout: float = 10.0
    max_inflight: int = 4

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("dim must be >= 8")
        if self.kind is ProviderKind.REMOTE_HTTP:
            if not (self.endpoint.startswith("http://") or self.endpoint.startswith("https://")):
                raise ValueError(f"remote provider requires a valid endpoint, got {self.endpoint!r}")

    @property
    def fingerprint(self) -> str:
        """Identifies the vector space an index was built in."""
        if self.kind is ProviderKind.LOCAL_DETERMINISTIC:
            return f"local-trigram-blake2b-v1:dim={self.dim}"
        return f"remote:{self.model_name}:dim={self.dim}"


@dataclass(eq=False)
class EmbeddingVector:
    values: np.ndarray
    dim: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.dim,):
            raise DimensionMismatch(f"expected {self.dim} values, got shape {self.values.shape}")
        self.values.setflags(write=False)

    def tolist(self) -> list[float]:
        return self.values.tolist()


def _hash_trigram(trigram: str) -> int:
    digest = hashlib.blake2b(trigram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def local_features(text: str, dim: int = DEFAULT_DIM) -> dict[int, float]:
    """Signed hashed-trigram feature map, unnormalized.

    The text is lowercased as-is (no trimming); trigrams are all length-3
    windows including spaces.  Text shorter than the window is padded with
    trailing spaces to one trigram.
    """
    if not text:
        raise EmptyText("cannot embed empty text")
    lowered = text.lower()
    if len(lowered) < 3:
        lowered = lowered.ljust(3)
    features: dict[int, float] = {}
    for i in range(len(lowered) - 2):
        h = _hash_trigram(lowered[i : i + 3])
        sign = -1.0 if (h >> _SIGN_BIT) & 1 else 1.0
        index = (h & _INDEX_MASK) % dim
        features[index] = features.get(index, 0.0) + sign
    return features


def normalized(values: np.ndarray) -> np.ndarray:
    """L2-normalize; an all-zero vector maps to the basis vector e0."""
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        out = np.zeros_like(values)
        out[0] = 1.0
        return out
    return values / norm


class LocalProvider:
    """Pure function of (text, dim); no state, safe for concurrent use."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def embed(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise EmptyText("cannot embed empty text")
        dim = self.config.dim
        dense = np.zeros(dim, dtype=np.float64)
        for index, weight in local_features(text, dim).items():
            dense[index] = weight
        return EmbeddingVector(values=normalized(dense), dim=dim)


class RemoteProvider:
    """Client for the remote embedding protocol.

    POST ``{"model": ..., "texts": [...]}`` to the endpoint; the response
    must be ``{"vectors": [[...], ...]}`` with one vector of length dim
    per input text.  A semaphore caps concurrent in-flight requests.
    """

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._semaphore = threading.Semaphore(config.max_inflight)
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    def embed(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise EmptyText("cannot embed empty text")
        with self._semaphore:
            try:
                response = self._client.post(
                    self.config.endpoint,
                    json={"model": self.config.model_name, "texts": [text]},
                )
            except httpx.HTTPError as exc:
                raise RemoteUnavailable(f"embedding endpoint failed: {exc}") from exc
        if response.status_code // 100 != 2:
            raise RemoteBadResponse(f"embedding endpoint returned {response.status_code}")
        try:
            vectors = response.json()["vectors"]
            values = np.asarray(vectors[0], dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise RemoteBadResponse(f"malformed embedding payload: {exc}") from exc
        if values.shape != (self.config.dim,):
            raise RemoteBadResponse(
                f"expected dimension {self.config.dim}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise RemoteBadResponse("non-finite values in embedding payload")
        return EmbeddingVector(values=normalized(values), dim=self.config.dim)


class MemoizingProvider:
    """In-memory memo keyed by exact text, wrapping another provider."""

    def __init__(self, inner):
        self._inner = inner
        self.config = inner.config
        self._memo: dict[str, EmbeddingVector] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> EmbeddingVector:
        with self._lock:
            hit = self._memo.get(text)
        if hit is not None:
            return hit
        vec = self._inner.embed(text)
        with self._lock:
            self._memo[text] = vec
        return vec


def make_provider(config: ProviderConfig, memoize: bool = True):
    if config.kind is ProviderKind.LOCAL_DETERMINISTIC:
        provider = LocalProvider(config)
    else:
        provider = RemoteProvider(config)
    return MemoizingProvider(provider) if memoize else provider


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"cosine over dims {a.dim} and {b.dim}")
    return float(np.dot(a.values, b.values))
