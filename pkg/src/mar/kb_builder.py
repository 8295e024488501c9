"""Knowledge-base construction: step logging during runs, trace filtering,
planner-KB emission, and human curation of staged executor exemplars.

Staged screenshots are content-addressed (SHA-256) so duplicate frames share
one file and dedup stays trivial.  Logging is best-effort: an I/O failure
disables the session without disturbing the agent run.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .actions import AtomicAction, action_name, parse_action, render_action
from .errors import DuplicateInstruction, UncoveredEntry
from .memory import Screenshot
from .retrieval import ManagerDoc, OperatorDoc, save_manager_docs, save_operator_docs

STAGING_RECORDS = "records.jsonl"
STAGING_SHOTS = "shots"


def init_staging(staging_dir: str | Path) -> Path:
    staging = Path(staging_dir)
    (staging / STAGING_SHOTS).mkdir(parents=True, exist_ok=True)
    records = staging / STAGING_RECORDS
    if not records.exists():
        records.touch()
    return staging


class StagingKBLogger:
    """Appends (app, subtask, screenshot, action) records under a staging dir."""

    def __init__(self, staging_dir: str | Path) -> None:
        self.staging = init_staging(staging_dir)
        self.enabled = True

    def log_step(
        self, app: str, subtask: str, screenshot: Screenshot, action: AtomicAction
    ) -> None:
        if not self.enabled:
            return
        try:
            digest = hashlib.sha256(screenshot.image).hexdigest()
            ext = "json" if screenshot.source == "sim" else "png"
            rel = f"{STAGING_SHOTS}/{digest}.{ext}"
            shot_path = self.staging / rel
            if not shot_path.exists():
                shot_path.write_bytes(screenshot.image)
            record = {
                "app": app,
                "subtask": subtask,
                "screenshot": rel,
                "action": render_action(action),
            }
            with (self.staging / STAGING_RECORDS).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        except OSError:
            self.enabled = False


@dataclass(frozen=True)
class StagedEntry:
    id: int
    app: str
    subtask: str
    screenshot: str
    action: AtomicAction


def load_staged(staging_dir: str | Path) -> list[StagedEntry]:
    staging = Path(staging_dir)
    entries = []
    records = staging / STAGING_RECORDS
    if not records.exists():
        return entries
    for i, line in enumerate(records.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        entries.append(
            StagedEntry(
                id=i,
                app=obj["app"],
                subtask=obj["subtask"],
                screenshot=obj["screenshot"],
                action=parse_action(obj["action"]),
            )
        )
    return entries


@dataclass
class RawTrace:
    """One logged run of one task, tagged with its success flag."""

    task_id: str
    records: list[dict]
    success: bool

    @property
    def length(self) -> int:
        return len(self.records)

    def action_names(self) -> tuple[str, ...]:
        return tuple(action_name(parse_action(r["action"])) for r in self.records)


def filter_traces(traces: list[RawTrace]) -> list[RawTrace]:
    """Erroneous-trial removal, near-identical dedup, minimal-success pick.

    Keeps, per task, the shortest successful trace; traces with identical
    action-name sequences count as duplicates (earliest wins).
    """
    survivors = [t for t in traces if t.success]
    by_task: dict[str, list[RawTrace]] = {}
    for trace in survivors:
        by_task.setdefault(trace.task_id, []).append(trace)
    kept: list[RawTrace] = []
    for task_id in dict.fromkeys(t.task_id for t in survivors):
        candidates = by_task[task_id]
        deduped: list[RawTrace] = []
        seen: set[tuple[str, ...]] = set()
        for trace in candidates:
            signature = trace.action_names()
            if signature in seen:
                continue
            seen.add(signature)
            deduped.append(trace)
        kept.append(min(deduped, key=lambda t: t.length))
    return kept


def build_manager_kb(
    entries: list[tuple[str, str]], out_path: str | Path
) -> list[ManagerDoc]:
    """Write the planner KB as JSONL with stable sequential ids."""
    docs: list[ManagerDoc] = []
    seen: set[str] = set()
    for instruction, human_steps in entries:
        if not instruction.strip() or not human_steps.strip():
            raise ValueError("instruction and human steps must be non-empty")
        if instruction in seen:
            raise DuplicateInstruction(f"duplicate instruction: {instruction!r}")
        seen.add(instruction)
        docs.append(
            ManagerDoc(id=len(docs) + 1, instruction=instruction, human_steps=human_steps)
        )
    save_manager_docs(docs, out_path)
    return docs


@dataclass(frozen=True)
class CurationDecision:
    entry_id: int
    verdict: str  # accept | reject | edit
    replacement: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict not in ("accept", "reject", "edit"):
            raise ValueError(f"unknown verdict {self.verdict!r}")


def load_decisions(path: str | Path) -> list[CurationDecision]:
    if not Path(path).exists():
        return []
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        CurationDecision(
            entry_id=int(item["id"]),
            verdict=item["verdict"],
            replacement=item.get("replacement", {}),
        )
        for item in raw
    ]


def save_decisions(decisions: list[CurationDecision], path: str | Path) -> None:
    payload = [
        {"id": d.entry_id, "verdict": d.verdict, "replacement": d.replacement}
        for d in decisions
    ]
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def curate(
    staging_dir: str | Path,
    decisions: list[CurationDecision],
    out_dir: str | Path,
) -> dict[str, int]:
    """Apply verdicts to every staged entry and emit per-app KB files.

    Accepted and edited entries are partitioned by app; rejected entries are
    dropped and their staged screenshots deleted.  Returns per-app counts.
    """
    staging = Path(staging_dir)
    out = Path(out_dir)
    entries = load_staged(staging)
    by_id = {d.entry_id: d for d in decisions}
    uncovered = [e.id for e in entries if e.id not in by_id]
    if uncovered:
        raise UncoveredEntry(f"staged entries without decisions: {uncovered}")

    (out / "operator").mkdir(parents=True, exist_ok=True)
    (out / STAGING_SHOTS).mkdir(parents=True, exist_ok=True)

    per_app: dict[str, list[OperatorDoc]] = {}
    kept_shots: set[str] = set()
    for entry in entries:
        decision = by_id[entry.id]
        if decision.verdict == "reject":
            continue
        app = entry.app
        subtask = entry.subtask
        screenshot = entry.screenshot
        action = entry.action
        if decision.verdict == "edit":
            repl = decision.replacement
            app = repl.get("app", app)
            subtask = repl.get("subtask", subtask)
            screenshot = repl.get("screenshot", screenshot)
            if "action" in repl:
                action = parse_action(repl["action"])
        doc = OperatorDoc(
            id=len(per_app.get(app, [])) + 1,
            app=app,
            subtask=subtask,
            screenshot_path=screenshot,
            action=action,
        )
        per_app.setdefault(app, []).append(doc)
        kept_shots.add(screenshot)

    for shot in kept_shots:
        src = staging / shot
        if src.exists():
            dst = out / shot
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src, dst)

    # Rejected screenshots leave staging unless another kept entry shares them.
    for entry in entries:
        if by_id[entry.id].verdict == "reject" and entry.screenshot not in kept_shots:
            path = staging / entry.screenshot
            if path.exists():
                path.unlink()

    for app, docs in per_app.items():
        save_operator_docs(docs, out / "operator" / f"{_slug(app)}.jsonl")
    return {app: len(docs) for app, docs in sorted(per_app.items())}


def _slug(app: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in app)
