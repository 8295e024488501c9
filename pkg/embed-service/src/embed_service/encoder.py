"""Text encoders served by the sidecar.

The default encoder is a deterministic hashed word + character-trigram
projection: no weights to download, identical vectors on every platform,
unit norm at float32 precision.  A transformer sentence encoder can be
swapped in via EMBED_SERVICE_MODEL for deployments that want semantic
embeddings; the HTTP contract is identical either way.
"""

from __future__ import annotations

import re
from typing import Protocol

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class Encoder(Protocol):
    name: str
    dim: int

    def encode(self, texts: list[str]) -> np.ndarray: ...


class HashedNgramEncoder:
    """Deterministic bag of words plus character trigrams, bucketed by a
    salted 64-bit hash and L2-normalized."""

    name = "hashed-ngram-v1"

    def __init__(self, dim: int = 384) -> None:
        self.dim = dim

    def _accumulate(self, text: str) -> np.ndarray:
        counts = np.zeros(self.dim, dtype=np.float64)
        tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
        for token in tokens:
            counts[_fnv1a64(b"w:" + token.encode("utf-8")) % self.dim] += 1.0
            padded = f"#{token}#"
            for i in range(len(padded) - 2):
                gram = padded[i : i + 3]
                counts[_fnv1a64(b"g:" + gram.encode("utf-8")) % self.dim] += 0.5
        return counts

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float32)
        rows = []
        for text in texts:
            counts = self._accumulate(text)
            norm = float(np.linalg.norm(counts))
            rows.append(counts / norm if norm else counts)
        return np.stack(rows).astype(np.float32)


class SentenceTransformerEncoder:
    """Optional transformer backend (EMBED_SERVICE_MODEL=<model-name>)."""

    def __init__(self, model_name: str) -> None:
        from sentence_transformers import SentenceTransformer

        self.name = model_name
        self._model = SentenceTransformer(model_name)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float32)
        vectors = self._model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float32)


def load_encoder(model_name: str | None) -> Encoder:
    if model_name:
        return SentenceTransformerEncoder(model_name)
    return HashedNgramEncoder()
