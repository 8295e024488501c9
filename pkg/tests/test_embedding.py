import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mar.embedding import (
    FALLBACK_DIM,
    FallbackEmbedder,
    HttpEmbedder,
    cosine_similarity,
    fnv1a64,
    make_embedder,
)
from mar.errors import DimensionMismatch, EmbedderUnavailable


@pytest.fixture(scope="module")
def embedder():
    return FallbackEmbedder()


class TestFallbackEmbedder:
    def test_empty_text_is_zero_vector(self, embedder):
        vec = embedder.embed("")
        assert vec.shape == (FALLBACK_DIM,)
        assert not vec.any()

    def test_unit_norm_for_nonempty(self, embedder):
        assert np.linalg.norm(embedder.embed("tap the search bar")) == pytest.approx(1.0)

    def test_repetition_preserves_direction(self, embedder):
        sim = cosine_similarity(embedder.embed("ramen"), embedder.embed("ramen ramen"))
        assert sim == pytest.approx(1.0)

    def test_disjoint_buckets_give_zero(self, embedder):
        # Hand-run of the hash procedure: "ramen" lands in bucket 52 and
        # "hotel" in bucket 29, so the one-hot vectors are orthogonal.
        assert fnv1a64(b"ramen") % 64 == 52
        assert fnv1a64(b"hotel") % 64 == 29
        sim = cosine_similarity(embedder.embed("ramen"), embedder.embed("hotel"))
        assert sim == 0.0

    def test_case_and_punctuation_insensitive_tokenization(self, embedder):
        a = embedder.embed("Tap the Search-Bar!")
        b = embedder.embed("tap the search bar")
        assert cosine_similarity(a, b) == pytest.approx(1.0)

    def test_deterministic_across_calls(self, embedder):
        first = embedder.embed("find ramen place Chicago")
        second = embedder.embed("find ramen place Chicago")
        assert np.array_equal(first, second)

    def test_batch_matches_single(self, embedder):
        texts = ["a", "b c", ""]
        batch = embedder.embed_batch(texts)
        for row, text in zip(batch, texts):
            assert np.array_equal(row, embedder.embed(text))

    def test_empty_batch(self, embedder):
        assert embedder.embed_batch([]).shape == (0, FALLBACK_DIM)


class TestCosine:
    def test_identity(self):
        v = np.array([1.0, 0.0, 0.0])
        assert cosine_similarity(v, v) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_analytic_value(self):
        sim = cosine_similarity(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert sim == pytest.approx(1 / math.sqrt(2), abs=1e-9)

    def test_zero_norm_convention(self):
        assert cosine_similarity(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity(np.zeros(3), np.zeros(4))

    @given(
        st.lists(st.floats(-5, 5), min_size=2, max_size=8),
        st.lists(st.floats(-5, 5), min_size=2, max_size=8),
    )
    def test_symmetric_and_bounded(self, a, b):
        n = min(len(a), len(b))
        u, v = np.array(a[:n]), np.array(b[:n])
        s1 = cosine_similarity(u, v)
        s2 = cosine_similarity(v, u)
        assert s1 == pytest.approx(s2, abs=1e-12)
        assert -1.0 - 1e-9 <= s1 <= 1.0 + 1e-9

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=8))
    def test_self_similarity_of_nonzero(self, values):
        v = np.array(values)
        if np.linalg.norm(v) > 1e-6:
            assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)


class TestSelectors:
    def test_fallback_selector(self):
        assert isinstance(make_embedder("fallback"), FallbackEmbedder)

    def test_http_selector(self):
        embedder = make_embedder("http:127.0.0.1:9")
        assert isinstance(embedder, HttpEmbedder)
        assert embedder.base_url == "http://127.0.0.1:9"

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            make_embedder("grpc:somewhere")

    def test_none_selector_follows_environment(self, monkeypatch):
        monkeypatch.delenv("MAR_EMBEDDER_URL", raising=False)
        assert isinstance(make_embedder(None), FallbackEmbedder)
        monkeypatch.setenv("MAR_EMBEDDER_URL", "127.0.0.1:8765")
        embedder = make_embedder(None)
        assert isinstance(embedder, HttpEmbedder)
        assert embedder.base_url == "http://127.0.0.1:8765"

    def test_unreachable_http_embedder(self):
        embedder = HttpEmbedder("http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(EmbedderUnavailable):
            embedder.embed_batch(["text"])
