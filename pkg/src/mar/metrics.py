"""Run-level metrics: completion rate, operator/reflector accuracy, steps,
efficiency, and the three-condition success verdict."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidCriteria, InvalidTrajectory
from .trajectory import Trajectory

MAX_STEPS = 30
REPEAT_CAP = 5


def compute_cr(completed: int, total: int) -> float:
    """Share of completion items satisfied, as a percentage."""
    if total <= 0:
        raise InvalidCriteria("criteria must contain at least one item")
    if not 0 <= completed <= total:
        raise InvalidCriteria(f"completed={completed} outside [0, {total}]")
    return 100.0 * completed / total


def compute_oa(correct_ops: int, steps: int) -> float:
    """Share of steps whose operation was correct, as a percentage."""
    if steps <= 0:
        raise InvalidTrajectory("cannot score a zero-step trajectory")
    if not 0 <= correct_ops <= steps:
        raise InvalidTrajectory(f"correct_ops={correct_ops} outside [0, {steps}]")
    return 100.0 * correct_ops / steps


def compute_ra(correct_reflections: int, steps: int) -> float:
    """Share of steps whose reflection verdict was correct, as a percentage."""
    if steps <= 0:
        raise InvalidTrajectory("cannot score a zero-step trajectory")
    if not 0 <= correct_reflections <= steps:
        raise InvalidTrajectory(
            f"correct_reflections={correct_reflections} outside [0, {steps}]"
        )
    return 100.0 * correct_reflections / steps


def compute_efficiency(cr: float, steps: float) -> float:
    """Average per-step contribution to completion: CR divided by steps."""
    if steps <= 0:
        raise InvalidTrajectory("cannot score a zero-step trajectory")
    return cr / steps


def max_consecutive_repetition(action_lines: list[str | None]) -> int:
    """Longest run of identical consecutive executed actions."""
    best = 0
    run = 0
    previous: str | None = None
    for line in action_lines:
        if line is None:
            run = 0
            previous = None
            continue
        run = run + 1 if line == previous else 1
        previous = line
        best = max(best, run)
    return best


@dataclass(frozen=True)
class SrVerdict:
    success: bool
    within_step_cap: bool
    no_erroneous_completion: bool
    no_over_repetition: bool

    @property
    def failed_conditions(self) -> tuple[int, ...]:
        failed = []
        if not self.within_step_cap:
            failed.append(1)
        if not self.no_erroneous_completion:
            failed.append(2)
        if not self.no_over_repetition:
            failed.append(3)
        return tuple(failed)


def judge_sr(
    trajectory: Trajectory | dict,
    erroneous_completion: bool,
    max_steps: int = MAX_STEPS,
    repeat_cap: int = REPEAT_CAP,
) -> SrVerdict:
    """Success iff: step cap respected, completion judgment sound, and no
    action repeated more than repeat_cap consecutive times."""
    data = trajectory.to_dict() if isinstance(trajectory, Trajectory) else trajectory
    steps = data["steps"]
    within = len(steps) <= max_steps
    repetition_ok = (
        max_consecutive_repetition([s.get("action") for s in steps]) <= repeat_cap
    )
    verdict = SrVerdict(
        success=within and not erroneous_completion and repetition_ok,
        within_step_cap=within,
        no_erroneous_completion=not erroneous_completion,
        no_over_repetition=repetition_ok,
    )
    return verdict


@dataclass(frozen=True)
class MetricsRecord:
    cr: float
    oa: float | None
    ra: float | None
    steps: int
    efficiency: float
    sr: bool
    sr_conditions: dict[str, bool]

    def __post_init__(self) -> None:
        for name, value in (("cr", self.cr), ("oa", self.oa), ("ra", self.ra)):
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"{name}={value} outside [0, 100]")

    def to_dict(self) -> dict:
        return {
            "cr": self.cr,
            "oa": self.oa,
            "ra": self.ra,
            "steps": self.steps,
            "efficiency": self.efficiency,
            "sr": self.sr,
            "sr_conditions": self.sr_conditions,
        }
