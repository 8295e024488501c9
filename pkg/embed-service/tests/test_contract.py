"""Contract test driven from the primary package: index the same texts
twice through a live sidecar and compare indices and retrieval rankings."""

import socket
import subprocess
import sys
import time

import numpy as np
import pytest
import requests

from mar.embedding import HttpEmbedder
from mar.memory import TaskInstruction
from mar.retrieval import ManagerDoc, build_manager_index, manager_retrieve

TEXTS = [
    "find the best ramen place in the loop",
    "book a hotel near the river",
    "search for breakfast buffet places",
    "open the notes app and write a summary",
    "compare two burger restaurants",
    "find a beginner yoga video",
    "check trending posts about ai music",
    "plan a three day trip itinerary",
    "look for a budget monitor under 150",
    "find a mechanical keyboard with wifi",
]


@pytest.fixture(scope="module")
def sidecar():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    process = subprocess.Popen(
        [sys.executable, "-m", "embed_service.app", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if requests.get(f"{base}/health", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            time.sleep(0.1)
        else:
            raise RuntimeError("sidecar did not become healthy")
        yield base
    finally:
        process.terminate()
        process.wait(timeout=10)


def test_health_reports_model_and_dim(sidecar):
    body = requests.get(f"{sidecar}/health", timeout=5).json()
    assert body["status"] == "ok"
    assert body["dim"] == 384


def test_vectors_unit_norm_and_order_preserving(sidecar):
    response = requests.post(f"{sidecar}/embed", json={"texts": TEXTS}, timeout=10)
    vectors = np.asarray(response.json()["vectors"])
    assert vectors.shape == (len(TEXTS), 384)
    norms = np.linalg.norm(vectors, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-4)
    single = requests.post(
        f"{sidecar}/embed", json={"texts": [TEXTS[3]]}, timeout=10
    ).json()["vectors"][0]
    assert vectors[3].tolist() == single


def test_index_twice_and_compare_rankings(sidecar):
    docs = [
        ManagerDoc(id=i, instruction=text, human_steps="steps")
        for i, text in enumerate(TEXTS, start=1)
    ]
    first = build_manager_index(docs, HttpEmbedder(sidecar))
    second = build_manager_index(docs, HttpEmbedder(sidecar))
    assert np.array_equal(first.matrix, second.matrix)

    queries = [
        "where can i eat ramen",
        "need a hotel for tonight",
        "write my summary in notes",
        "cheap monitor recommendations",
    ]
    for query in queries:
        ranking_one = [d.id for d in manager_retrieve(TaskInstruction(query), first, 5)]
        ranking_two = [d.id for d in manager_retrieve(TaskInstruction(query), second, 5)]
        assert ranking_one == ranking_two


def test_primary_fallback_path_needs_no_sidecar():
    # The primary's default embedder never touches the network.
    from mar.embedding import make_embedder, FallbackEmbedder

    assert isinstance(make_embedder("fallback"), FallbackEmbedder)
