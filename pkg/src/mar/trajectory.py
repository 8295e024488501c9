"""Trajectory records and their on-disk form.

One run persists to one directory: ``trajectory.json`` (canonical JSON:
sorted keys, two-space indent, trailing newline), the initial screenshot,
and one post-action screenshot per step.  Wall-clock durations are the only
nondeterministic values; :func:`normalize_trajectory_text` zeroes exactly
those so reproducibility checks can compare bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .actions import render_action
from .memory import Screenshot, WorkingMemory

TERMINATION_REASONS = (
    "ManagerDone",
    "MaxSteps",
    "RepetitionCap",
    "ProviderFailure",
)


@dataclass
class StepRecord:
    step: int
    phases: list[str] = field(default_factory=list)
    plan: str = ""
    subtask: str = ""
    app: str = ""
    manager_retrieved_ids: list[int] | None = None
    operator_retrieved_id: int | None = None
    action: str | None = None
    raw_action_text: str | None = None
    outcome: str | None = None
    feedback: str = ""
    progress: str = ""
    notes: str = ""
    screen_before: str | None = None
    screen_after: str | None = None
    screenshot_before: str | None = None
    screenshot_after: str | None = None
    changed: bool = False
    rule_fired: bool = False
    oracle_outcome: str | None = None
    failure_stage: str | None = None
    prompt_digests: dict[str, str] = field(default_factory=dict)
    tokens: dict[str, list[int]] = field(default_factory=dict)
    wall_ms: float = 0.0


@dataclass
class Trajectory:
    task: str
    steps: list[StepRecord] = field(default_factory=list)
    termination: str | None = None
    termination_detail: str = ""
    final_memory: dict = field(default_factory=dict)
    token_summary: dict[str, list[int]] = field(default_factory=dict)
    completion_judgment_flags: dict = field(default_factory=dict)

    def set_termination(self, reason: str, detail: str = "") -> None:
        if self.termination is not None:
            raise ValueError("termination reason already set")
        if reason not in TERMINATION_REASONS:
            raise ValueError(f"unknown termination reason {reason!r}")
        self.termination = reason
        self.termination_detail = detail

    def summarize_tokens(self) -> None:
        summary: dict[str, list[int]] = {}
        for record in self.steps:
            for component, (tin, tout) in record.tokens.items():
                bucket = summary.setdefault(component, [0, 0])
                bucket[0] += tin
                bucket[1] += tout
        total = [0, 0]
        for tin, tout in summary.values():
            total[0] += tin
            total[1] += tout
        summary["total"] = total
        self.token_summary = summary

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "termination": self.termination,
            "termination_detail": self.termination_detail,
            "steps": [asdict(s) for s in self.steps],
            "final_memory": self.final_memory,
            "token_summary": self.token_summary,
            "completion_judgment_flags": self.completion_judgment_flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def snapshot_memory(mem: WorkingMemory) -> dict:
    return {
        "plan": mem.plan,
        "subtask": mem.subtask.description,
        "app": mem.subtask.app,
        "progress": mem.progress,
        "notes": mem.notes,
        "error_flag": mem.error_flag,
        "step_index": mem.step_index,
        "action_log": [
            {"step": e.step, "action": render_action(e.action), "outcome": e.outcome.value}
            for e in mem.action_log
        ],
        "error_log": [
            {"step": e.step, "action": render_action(e.action), "feedback": e.feedback}
            for e in mem.error_log
        ],
    }


def screenshot_filename(prefix: str, shot: Screenshot) -> str:
    ext = "json" if shot.source == "sim" else "png"
    return f"shots/{prefix}.{ext}"


def save_screenshot(out_dir: Path, rel_path: str, shot: Screenshot) -> None:
    path = out_dir / rel_path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(shot.image)


def save_trajectory(trajectory: Trajectory, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trajectory.json"
    path.write_text(trajectory.to_json(), encoding="utf-8")
    return path


def load_trajectory(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / "trajectory.json").read_text(encoding="utf-8"))


def normalize_trajectory_text(text: str) -> str:
    """Zero every wall_ms field and re-dump canonically."""
    data = json.loads(text)
    for step in data.get("steps", []):
        step["wall_ms"] = 0.0
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
