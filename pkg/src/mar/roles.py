"""Role step functions: send a prompt, parse the sectioned response."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .actions import AtomicAction, OutcomeLabel, parse_action
from .errors import ResponseFormatError
from .memory import Subtask
from .prompts import NOTES_UNCHANGED
from .providers import ModelRequest, Provider

_SECTION_LABELS = (
    "PLAN",
    "SUBTASK",
    "APP",
    "ACTION",
    "OUTCOME",
    "PROGRESS",
    "FEEDBACK",
    "NOTES",
)

_SECTION_RE = re.compile(rf"^({'|'.join(_SECTION_LABELS)}):\s*(.*)$")

DONE_SENTINEL = "DONE"


def parse_sections(text: str, required: tuple[str, ...]) -> dict[str, str]:
    """Split a response into labeled sections; later lines without a label
    belong to the preceding section."""
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        match = _SECTION_RE.match(line.strip())
        if match:
            current = match.group(1)
            sections[current] = [match.group(2)]
        elif current is not None:
            sections[current].append(line.rstrip())
    parsed = {label: "\n".join(lines).strip() for label, lines in sections.items()}
    missing = [label for label in required if label not in parsed]
    if missing:
        raise ResponseFormatError(f"response missing sections: {missing}")
    return parsed


@dataclass(frozen=True)
class ManagerDecision:
    plan: str
    subtask: Subtask

    @property
    def done(self) -> bool:
        return self.subtask.description == DONE_SENTINEL


def manager_step(
    provider: Provider, request: ModelRequest, registered_apps: list[str]
) -> ManagerDecision:
    """Run the planner and parse PLAN/SUBTASK/APP.

    The app must be a registered scenario app or "None" (Home-screen work).
    """
    response = provider.complete(request)
    sections = parse_sections(response, required=("PLAN", "SUBTASK", "APP"))
    plan = sections["PLAN"]
    subtask_text = sections["SUBTASK"]
    app = sections["APP"]
    if not plan:
        raise ResponseFormatError("empty PLAN section")
    if not subtask_text:
        raise ResponseFormatError("empty SUBTASK section")
    if app != "None" and app not in registered_apps:
        raise ResponseFormatError(f"APP {app!r} is not registered (or 'None')")
    return ManagerDecision(plan=plan, subtask=Subtask(subtask_text, app))


def operator_step(provider: Provider, request: ModelRequest) -> AtomicAction:
    """Run the executor and parse its single ACTION line."""
    response = provider.complete(request)
    sections = parse_sections(response, required=("ACTION",))
    return parse_action(sections["ACTION"])


def reflect_step(
    provider: Provider, request: ModelRequest
) -> tuple[OutcomeLabel, str, str]:
    """Run the reflector; returns (outcome, updated progress, feedback).

    Feedback must be non-empty for any non-success outcome.
    """
    response = provider.complete(request)
    sections = parse_sections(response, required=("OUTCOME", "PROGRESS"))
    code = sections["OUTCOME"]
    try:
        outcome = OutcomeLabel.from_code(code)
    except ValueError as exc:
        raise ResponseFormatError(str(exc)) from None
    feedback = sections.get("FEEDBACK", "")
    if outcome is not OutcomeLabel.SUCCESS and not feedback:
        raise ResponseFormatError(f"outcome {code} requires non-empty FEEDBACK")
    return outcome, sections["PROGRESS"], feedback


def notetake_step(provider: Provider, request: ModelRequest, previous_notes: str) -> str:
    """Run the notetaker; the response replaces the notes wholesale unless it
    is the unchanged sentinel."""
    response = provider.complete(request)
    sections = parse_sections(response, required=("NOTES",))
    notes = sections["NOTES"]
    if notes == NOTES_UNCHANGED:
        return previous_notes
    return notes
