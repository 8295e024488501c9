"""Knowledge-base documents, immutable cosine indices, and the two
retrieval procedures.

Planner exemplars are retrieved once per task (top-k over instruction
embeddings); executor exemplars are retrieved every step (top-1 over subtask
embeddings, restricted to the active app's library).  Both are exact scans:
score every document, sort by descending similarity, break ties by ascending
document id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .actions import AtomicAction, parse_action, render_action
from .embedding import Embedder, cosine_similarity
from .memory import TaskInstruction


@dataclass(frozen=True)
class ManagerDoc:
    """(instruction, human steps) exemplar for high-level planning."""

    id: int
    instruction: str
    human_steps: str

    def __post_init__(self) -> None:
        if not self.instruction or not self.human_steps:
            raise ValueError("instruction and human_steps must be non-empty")


@dataclass(frozen=True)
class OperatorDoc:
    """(subtask, screenshot, action) exemplar for one atomic action."""

    id: int
    app: str
    subtask: str
    screenshot_path: str
    action: AtomicAction

    def __post_init__(self) -> None:
        if not self.subtask:
            raise ValueError("subtask must be non-empty")
        if Path(self.screenshot_path).is_absolute() or ".." in Path(self.screenshot_path).parts:
            raise ValueError("screenshot path must stay inside the KB root")


class ManagerKB:
    """Immutable index over planner exemplars."""

    def __init__(self, docs: list[ManagerDoc], embedder: Embedder) -> None:
        self.docs = list(docs)
        self.embedder = embedder
        self.matrix = embedder.embed_batch([d.instruction for d in self.docs])

    def __len__(self) -> int:
        return len(self.docs)


class OperatorLibrary:
    """Immutable index over one app's executor exemplars."""

    def __init__(self, app: str, docs: list[OperatorDoc], embedder: Embedder) -> None:
        for d in docs:
            if d.app != app:
                raise ValueError(f"doc {d.id} belongs to {d.app!r}, not {app!r}")
        self.app = app
        self.docs = list(docs)
        self.matrix = embedder.embed_batch([d.subtask for d in self.docs])
        self.embedder = embedder

    def __len__(self) -> int:
        return len(self.docs)


class OperatorKBRegistry:
    """Per-app executor libraries keyed by exact app name."""

    def __init__(self, libraries: dict[str, OperatorLibrary] | None = None) -> None:
        self.libraries = dict(libraries or {})

    def library(self, app: str) -> OperatorLibrary | None:
        return self.libraries.get(app)

    def __len__(self) -> int:
        return sum(len(lib) for lib in self.libraries.values())


def _ranked_ids(matrix: np.ndarray, query: np.ndarray, ids: list[int]) -> list[int]:
    scores = [cosine_similarity(query, row) for row in matrix]
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    return order


def manager_retrieve(
    query: TaskInstruction, kb: ManagerKB, k: int
) -> list[ManagerDoc]:
    """Top-k planner exemplars by instruction cosine similarity.

    k larger than the KB clamps; an empty KB yields an empty list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not kb.docs:
        return []
    qvec = kb.embedder.embed(query.text)
    order = _ranked_ids(kb.matrix, qvec, [d.id for d in kb.docs])
    return [kb.docs[i] for i in order[: min(k, len(kb.docs))]]


def operator_retrieve(
    subtask_query: str, app: str, registry: OperatorKBRegistry
) -> OperatorDoc | None:
    """Best executor exemplar from the queried app's library, or None.

    Only the subtask text enters the similarity computation; reference
    screenshots are payload.
    """
    lib = registry.library(app)
    if lib is None or not lib.docs:
        return None
    qvec = lib.embedder.embed(subtask_query)
    order = _ranked_ids(lib.matrix, qvec, [d.id for d in lib.docs])
    return lib.docs[order[0]]


# --- KB file I/O (one JSON object per line, UTF-8) -------------------------


def load_manager_docs(path: str | Path) -> list[ManagerDoc]:
    docs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        docs.append(
            ManagerDoc(
                id=int(obj["id"]),
                instruction=obj["instruction"],
                human_steps=obj["human_steps"],
            )
        )
    return docs


def save_manager_docs(docs: list[ManagerDoc], path: str | Path) -> None:
    lines = [
        json.dumps(
            {"id": d.id, "instruction": d.instruction, "human_steps": d.human_steps},
            ensure_ascii=False,
        )
        for d in docs
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_operator_docs(path: str | Path) -> list[OperatorDoc]:
    docs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        docs.append(
            OperatorDoc(
                id=int(obj["id"]),
                app=obj["app"],
                subtask=obj["subtask"],
                screenshot_path=obj["screenshot"],
                action=parse_action(obj["action"]),
            )
        )
    return docs


def save_operator_docs(docs: list[OperatorDoc], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "id": d.id,
                "app": d.app,
                "subtask": d.subtask,
                "screenshot": d.screenshot_path,
                "action": render_action(d.action),
            },
            ensure_ascii=False,
        )
        for d in docs
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def build_manager_index(docs: list[ManagerDoc], embedder: Embedder) -> ManagerKB:
    """Embed every instruction once; the index is immutable afterward."""
    return ManagerKB(docs, embedder)


def build_operator_registry(
    docs_by_app: dict[str, list[OperatorDoc]], embedder: Embedder
) -> OperatorKBRegistry:
    return OperatorKBRegistry(
        {app: OperatorLibrary(app, docs, embedder) for app, docs in docs_by_app.items()}
    )


def load_kb_dir(
    kb_dir: str | Path, embedder: Embedder
) -> tuple[ManagerKB, OperatorKBRegistry]:
    """Load a KB directory: manager.jsonl plus operator/<app>.jsonl files."""
    kb_dir = Path(kb_dir)
    manager_path = kb_dir / "manager.jsonl"
    manager_docs = load_manager_docs(manager_path) if manager_path.exists() else []
    docs_by_app: dict[str, list[OperatorDoc]] = {}
    operator_dir = kb_dir / "operator"
    if operator_dir.is_dir():
        for path in sorted(operator_dir.glob("*.jsonl")):
            docs = load_operator_docs(path)
            if docs:
                docs_by_app[docs[0].app] = docs
    return (
        build_manager_index(manager_docs, embedder),
        build_operator_registry(docs_by_app, embedder),
    )
