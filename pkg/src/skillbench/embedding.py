"""Text encoders behind a common provider interface.

The local provider is a deterministic hashing n-gram embedder so tests and
offline runs never need a model download; the remote provider talks to a
single HTTP endpoint that accepts a list of texts and returns a list of
vectors. All embeddings are L2-normalized at creation, so cosine similarity
downstream reduces to a dot product.
"""

from __future__ import annotations

import hashlib
import os
import re
import time
from dataclasses import dataclass

import numpy as np
import requests

DEFAULT_DIMENSION = 384

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Embedding:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise EmbeddingError("embedding contains non-finite entries")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-9:
            raise EmbeddingError(f"embedding is not unit-norm (norm={norm})")

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def _normalized(values: np.ndarray) -> Embedding:
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        raise EmbeddingError("cannot normalize a zero vector")
    return Embedding(values=tuple((values / norm).tolist()))


class LocalEmbedder:
    """Hashing unigram+bigram embedder: stateless and fully deterministic.

    Lowercase, split on non-alphanumerics, hash each unigram and adjacent
    bigram into one of ``dimension`` signed buckets, then L2-normalize the
    bucket counts.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def embed(self, text: str) -> Embedding:
        if not text:
            raise EmbeddingError("cannot embed empty text")
        tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
        if not tokens:
            tokens = [text.lower()]
        features = list(tokens)
        features.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
        counts = np.zeros(self.dimension, dtype=np.float64)
        for feature in features:
            digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "big")
            bucket = value % self.dimension
            sign = 1.0 if (value >> 63) & 1 else -1.0
            counts[bucket] += sign
        if not np.any(counts):
            counts[0] = 1.0
        return _normalized(counts)

    def embed_batch(self, texts: list[str]) -> list[Embedding]:
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """HTTP embedding client: POST {model, texts} -> {vectors}.

    Failed requests are retried up to ``attempts`` times with exponential
    backoff before the error is surfaced.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        dimension: int = DEFAULT_DIMENSION,
        auth_token_env: str | None = None,
        timeout: float = 30.0,
        attempts: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.endpoint = endpoint
        self.model_id = model_id
        self.dimension = dimension
        self.auth_token_env = auth_token_env
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self.session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_token_env:
            token = os.environ.get(self.auth_token_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def embed(self, text: str) -> Embedding:
        if not text:
            raise EmbeddingError("cannot embed empty text")
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[Embedding]:
        payload = {"model": self.model_id, "texts": texts}
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            try:
                response = self.session.post(
                    self.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                response.raise_for_status()
                vectors = response.json()["vectors"]
                if len(vectors) != len(texts):
                    raise EmbeddingError(
                        f"endpoint returned {len(vectors)} vectors for {len(texts)} texts"
                    )
                out = []
                for vector in vectors:
                    arr = np.asarray(vector, dtype=np.float64)
                    if arr.shape != (self.dimension,):
                        raise EmbeddingError(
                            f"endpoint returned dimension {arr.shape}, expected {self.dimension}"
                        )
                    out.append(_normalized(arr))
                return out
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * (2**attempt))
        raise EmbeddingError(f"remote embedding failed after {self.attempts} attempts: {last_error}")
