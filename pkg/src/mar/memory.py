"""Per-task state: instruction, screenshots, perception, and working memory."""

from __future__ import annotations

from dataclasses import dataclass, field

from .actions import AtomicAction, OutcomeLabel


@dataclass(frozen=True)
class TaskInstruction:
    """The user's task, non-empty after trimming."""

    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("task instruction must be non-empty")


@dataclass(frozen=True)
class Screenshot:
    """One captured screen.

    Real backends carry PNG bytes; the simulator carries a structured JSON
    stand-in and tags the screen id it rendered.
    """

    image: bytes
    width: int
    height: int
    source: str
    screen_id: str | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("screenshot dimensions must be positive")
        if self.source != "sim" and not self.image:
            raise ValueError("real-backend screenshot payload must be non-empty")


@dataclass(frozen=True)
class BoundingBox:
    """Pixel-space box, origin top-left, right/bottom exclusive."""

    left: int
    top: int
    right: int
    bottom: int

    def contains(self, x: int, y: int) -> bool:
        return self.left <= x < self.right and self.top <= y < self.bottom

    def within(self, width: int, height: int) -> bool:
        return (
            0 <= self.left <= self.right <= width
            and 0 <= self.top <= self.bottom <= height
        )


@dataclass(frozen=True)
class PerceptionResult:
    """Fine-grained screen contents: recognized texts and captioned icons."""

    texts: tuple[tuple[str, BoundingBox], ...] = ()
    icons: tuple[tuple[BoundingBox, str], ...] = ()


@dataclass(frozen=True)
class ActionLogEntry:
    action: AtomicAction
    outcome: OutcomeLabel
    step: int


@dataclass(frozen=True)
class ErrorLogEntry:
    action: AtomicAction
    feedback: str
    step: int

    def __post_init__(self) -> None:
        if not self.feedback:
            raise ValueError("error feedback must be non-empty")


@dataclass
class Subtask:
    description: str
    app: str


@dataclass
class WorkingMemory:
    """Evolving task state threaded through the loop.

    Owned and mutated by a single task loop; every contained value object is
    immutable, so snapshots are cheap copies.
    """

    plan: str = ""
    subtask: Subtask = field(default_factory=lambda: Subtask("", ""))
    progress: str = ""
    notes: str = ""
    error_flag: bool = False
    action_log: list[ActionLogEntry] = field(default_factory=list)
    error_log: list[ErrorLogEntry] = field(default_factory=list)
    step_index: int = 1

    def record(
        self,
        action: AtomicAction,
        outcome: OutcomeLabel,
        feedback: str,
        step: int,
    ) -> None:
        """Append to the action log, and to the error log iff not a success."""
        self.action_log.append(ActionLogEntry(action, outcome, step))
        if outcome is not OutcomeLabel.SUCCESS:
            self.error_log.append(ErrorLogEntry(action, feedback or "unspecified failure", step))
