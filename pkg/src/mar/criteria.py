"""Completion criteria: independently checkable subgoals of one task.

Two-app tasks carry 8 items, three-app tasks 10; all items weigh equally.
Automatic predicates are checked against the persisted trajectory; ``manual``
items read a judgment file and count as not-completed (and are flagged) when
no judgment exists.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .actions import OpenApp, parse_action
from .errors import InvalidCriteria, ParseError
from .trajectory import Trajectory

PREDICATE_KINDS = (
    "opened_app",
    "executed_action_matching",
    "visited_screen",
    "note_contains",
    "manual",
)

VALID_ITEM_COUNTS = (8, 10)


@dataclass(frozen=True)
class CompletionPredicate:
    kind: str
    args: dict
    description: str

    def __post_init__(self) -> None:
        if self.kind not in PREDICATE_KINDS:
            raise InvalidCriteria(f"unknown predicate kind {self.kind!r}")


@dataclass(frozen=True)
class CompletionCriteria:
    task_id: str
    items: tuple[CompletionPredicate, ...]

    def __post_init__(self) -> None:
        if len(self.items) not in VALID_ITEM_COUNTS:
            raise InvalidCriteria(
                f"criteria need {VALID_ITEM_COUNTS} items, got {len(self.items)}"
            )


def load_criteria(path: str | Path) -> CompletionCriteria:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    items = tuple(
        CompletionPredicate(
            kind=item["kind"],
            args=item.get("args", {}),
            description=item.get("description", ""),
        )
        for item in data["items"]
    )
    return CompletionCriteria(task_id=data["task_id"], items=items)


def load_judgments(path: str | Path) -> dict[int, bool]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {int(k): bool(v) for k, v in raw.items()}


@dataclass(frozen=True)
class CriteriaResult:
    completed: int
    per_item: tuple[bool, ...]
    missing_manual: tuple[int, ...]

    @property
    def total(self) -> int:
        return len(self.per_item)


def _actions_of(data: dict) -> list[str]:
    return [s["action"] for s in data["steps"] if s.get("action")]


def _screens_of(data: dict) -> set[str]:
    screens: set[str] = set()
    for step in data["steps"]:
        for key in ("screen_before", "screen_after"):
            if step.get(key):
                screens.add(step[key])
    return screens


def _check(predicate: CompletionPredicate, data: dict) -> bool:
    args = predicate.args
    if predicate.kind == "opened_app":
        name = args["name"]
        for line in _actions_of(data):
            try:
                action = parse_action(line)
            except ParseError:
                continue
            if isinstance(action, OpenApp) and action.app_name == name:
                return True
        return False
    if predicate.kind == "executed_action_matching":
        pattern = re.compile(args["pattern"])
        return any(pattern.search(line) for line in _actions_of(data))
    if predicate.kind == "visited_screen":
        return args["id"] in _screens_of(data)
    if predicate.kind == "note_contains":
        return args["substring"] in data["final_memory"].get("notes", "")
    raise InvalidCriteria(f"predicate kind {predicate.kind!r} is not automatic")


def evaluate_criteria(
    trajectory: Trajectory | dict,
    criteria: CompletionCriteria,
    manual_judgments: dict[int, bool] | None = None,
) -> CriteriaResult:
    """Check every item against the trajectory; CR order-invariance holds
    because items are independent."""
    data = trajectory.to_dict() if isinstance(trajectory, Trajectory) else trajectory
    manual_judgments = manual_judgments or {}
    per_item: list[bool] = []
    missing: list[int] = []
    for index, item in enumerate(criteria.items):
        if item.kind == "manual":
            if index in manual_judgments:
                per_item.append(manual_judgments[index])
            else:
                per_item.append(False)
                missing.append(index)
            continue
        try:
            per_item.append(_check(item, data))
        except KeyError as exc:
            raise InvalidCriteria(
                f"item {index} ({item.kind}) missing argument {exc}"
            ) from None
    return CriteriaResult(
        completed=sum(per_item),
        per_item=tuple(per_item),
        missing_manual=tuple(missing),
    )
