"""Text embedding contract, the deterministic fallback embedder, and the
HTTP client for an external encoder sidecar.

The fallback embedder is fully specified so results reproduce across
platforms: lowercase, split on non-alphanumeric runs, 64-bit FNV-1a per
token, bucket into 64 counts, L2-normalize.  Empty input embeds to the zero
vector.
"""

from __future__ import annotations

import math
import os
import re
from typing import Protocol

import numpy as np
import requests

from .errors import DimensionMismatch, EmbedderUnavailable

FALLBACK_DIM = 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class Embedder(Protocol):
    """Maps text to a unit-norm vector (or the zero vector for empty text)."""

    dim: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: list[str]) -> np.ndarray: ...


class FallbackEmbedder:
    """Deterministic hashed bag-of-words embedder, dimension 64.

    The norm is taken over exact integer counts so the emitted floats are
    identical on every platform.
    """

    dim = FALLBACK_DIM

    def embed(self, text: str) -> np.ndarray:
        counts = [0] * self.dim
        for token in _TOKEN_SPLIT.split(text.lower()):
            if token:
                counts[fnv1a64(token.encode("utf-8")) % self.dim] += 1
        square_sum = sum(c * c for c in counts)
        if square_sum == 0:
            return np.zeros(self.dim, dtype=np.float64)
        norm = math.sqrt(square_sum)
        return np.array([c / norm for c in counts], dtype=np.float64)

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.embed(t) for t in texts])


class HttpEmbedder:
    """Client for the embedding sidecar's POST /embed endpoint."""

    def __init__(self, base_url: str, timeout: float = 10.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.dim = 0  # learned from the first response

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        try:
            resp = requests.post(
                f"{self.base_url}/embed",
                json={"texts": texts},
                timeout=self.timeout,
            )
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise EmbedderUnavailable(f"embedder at {self.base_url}: {exc}") from exc
        body = resp.json()
        self.dim = int(body["dim"])
        vectors = np.asarray(body["vectors"], dtype=np.float64)
        if vectors.shape != (len(texts), self.dim):
            raise EmbedderUnavailable(
                f"embedder returned shape {vectors.shape}, "
                f"expected ({len(texts)}, {self.dim})"
            )
        return vectors


def make_embedder(selector: str | None = None) -> Embedder:
    """Build an embedder from a config selector.

    ``fallback`` (default) or ``http:<base-url>``. When the selector is None
    the MAR_EMBEDDER_URL environment variable is consulted before falling
    back.
    """
    if selector is None:
        url = os.environ.get("MAR_EMBEDDER_URL", "")
        selector = f"http:{url}" if url else "fallback"
    if selector == "fallback":
        return FallbackEmbedder()
    if selector.startswith("http:"):
        base = selector[len("http:"):]
        if not base.startswith(("http://", "https://")):
            base = "http://" + base.lstrip("/")
        return HttpEmbedder(base)
    raise ValueError(f"unknown embedder selector {selector!r}")


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """cos(u, v) in [-1, 1]; zero when either vector has zero norm.

    Accumulates left-to-right in float64 (no BLAS) so scores — and therefore
    retrieval tie-breaks — reproduce bit-for-bit across platforms and against
    independent reimplementations.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dims differ: {u.shape} vs {v.shape}")
    dot = 0.0
    uu = 0.0
    vv = 0.0
    for a, b in zip(u.tolist(), v.tolist()):
        dot += a * b
        uu += a * a
        vv += b * b
    if uu == 0.0 or vv == 0.0:
        return 0.0
    return dot / (math.sqrt(uu) * math.sqrt(vv))
