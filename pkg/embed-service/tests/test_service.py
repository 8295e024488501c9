import math

import pytest
from fastapi.testclient import TestClient

from embed_service.app import BATCH_CAP, create_app
from embed_service.encoder import HashedNgramEncoder


@pytest.fixture()
def client():
    with TestClient(create_app(encoder=HashedNgramEncoder())) as c:
        yield c


def norm(vector):
    return math.sqrt(sum(x * x for x in vector))


class TestEmbed:
    def test_empty_batch(self, client):
        response = client.post("/embed", json={"texts": []})
        assert response.status_code == 200
        assert response.json()["vectors"] == []

    def test_identical_inputs_identical_vectors(self, client):
        response = client.post("/embed", json={"texts": ["a", "a"]})
        body = response.json()
        assert body["vectors"][0] == body["vectors"][1]

    def test_unit_norm(self, client):
        response = client.post("/embed", json={"texts": ["tap the search bar"]})
        vector = response.json()["vectors"][0]
        assert norm(vector) == pytest.approx(1.0, abs=1e-4)

    def test_order_preservation(self, client):
        texts = ["alpha", "beta", "gamma"]
        batched = client.post("/embed", json={"texts": texts}).json()["vectors"]
        for i, text in enumerate(texts):
            single = client.post("/embed", json={"texts": [text]}).json()["vectors"][0]
            assert batched[i] == single

    def test_dim_consistent_with_health(self, client):
        health = client.get("/health").json()
        body = client.post("/embed", json={"texts": ["x"]}).json()
        assert body["dim"] == health["dim"]
        assert len(body["vectors"][0]) == body["dim"]

    def test_deterministic_across_calls(self, client):
        first = client.post("/embed", json={"texts": ["ramen"]}).json()
        second = client.post("/embed", json={"texts": ["ramen"]}).json()
        assert first == second

    def test_empty_text_is_zero_vector(self, client):
        vector = client.post("/embed", json={"texts": [""]}).json()["vectors"][0]
        assert norm(vector) == 0.0

    def test_malformed_body_is_400(self, client):
        assert client.post("/embed", json={"wrong": 1}).status_code == 400
        assert client.post("/embed", json={"texts": [1, 2]}).status_code == 400

    def test_batch_cap_is_413(self, client):
        response = client.post("/embed", json={"texts": ["x"] * (BATCH_CAP + 1)})
        assert response.status_code == 413

    def test_cap_boundary_accepted(self, client):
        response = client.post("/embed", json={"texts": ["x"] * BATCH_CAP})
        assert response.status_code == 200


class TestHealth:
    def test_ready(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["model"] == "hashed-ngram-v1"
        assert body["dim"] == 384

    def test_before_load_is_503(self):
        with TestClient(create_app(defer_loading=True)) as client:
            assert client.get("/health").status_code == 503
            assert client.post("/embed", json={"texts": ["x"]}).status_code == 503


class TestEncoder:
    def test_scaling_invariance_direction(self):
        encoder = HashedNgramEncoder()
        one, two = encoder.encode(["ramen", "ramen ramen"])
        assert list(one) == pytest.approx(list(two), abs=1e-6)

    def test_different_texts_differ(self):
        encoder = HashedNgramEncoder()
        a, b = encoder.encode(["ramen", "hotel"])
        assert list(a) != list(b)
