"""Prompt assembly for the four reasoning roles.

The planner's prompt is piecewise: exemplar few-shot blocks appear only on
the first step, the error-log tail only while the consecutive-error flag is
set, and fine-grained screen elements never appear at all (they are the
executor's input).  Response grammars are rigid uppercase section labels so
parsing stays testable.
"""

from __future__ import annotations

from .actions import render_action
from .memory import (
    ActionLogEntry,
    ErrorLogEntry,
    PerceptionResult,
    Screenshot,
    Subtask,
    TaskInstruction,
    WorkingMemory,
)
from .providers import ImagePart, ModelRequest, PromptPart, TextPart
from .retrieval import ManagerDoc, OperatorDoc

DEFAULT_K_ERR = 3
DEFAULT_K_LOG = 5

NOTES_UNCHANGED = "<unchanged>"

# Baseline operating tips included verbatim in every system prompt.
INITIAL_TIPS = (
    "1. Do not add any payment information. If you are asked to sign in, "
    "ignore it or sign in as a guest if possible. Close any pop-up windows "
    "when opening an app.\n"
    "2. By default, no APPs are opened in the background.\n"
    "3. Screenshots may show partial text in text boxes from your previous "
    "input; this does not count as an error.\n"
    "4. When creating new Notes, you do not need to enter a title unless the "
    "user specifically requests it."
)

_MANAGER_SYSTEM = (
    "You are the planning agent of a mobile automation system. Decide the "
    "overall plan and the single next subtask, naming the app it targets "
    "(or None for actions on the Home screen). When the whole task is "
    "finished, answer with SUBTASK: DONE.\n"
    "Respond with exactly these sections:\n"
    "PLAN: <overall plan>\n"
    "SUBTASK: <next subtask>\n"
    "APP: <app name or None>\n\n"
    "Tips:\n" + INITIAL_TIPS
)

_OPERATOR_SYSTEM = (
    "You are the execution agent of a mobile automation system. Produce "
    "exactly one atomic action for the current subtask, chosen from: "
    'Open_App at {"app_name": ...}, Tap at {"x": ..., "y": ...}, '
    'Swipe at {"x1": ..., "y1": ..., "x2": ..., "y2": ...}, '
    'Type at {"text": ...}, Enter at null, Back at null, Home at null, '
    'Wait at null, Tap_Type_and_Enter at {"x": ..., "y": ..., "text": ...}.\n'
    "Respond with exactly this section:\n"
    "ACTION: <one action line>\n\n"
    "Tips:\n" + INITIAL_TIPS
)

_REFLECTOR_SYSTEM = (
    "You are the reflection agent of a mobile automation system. Compare the "
    "screen before and after the executed action and judge the outcome: "
    "A = the action did what the subtask needed, B = the screen changed but "
    "to a wrong page, C = nothing changed.\n"
    "Respond with exactly these sections:\n"
    "OUTCOME: <A, B or C>\n"
    "PROGRESS: <updated progress status>\n"
    "FEEDBACK: <what went wrong; required unless the outcome is A>\n\n"
    "Tips:\n" + INITIAL_TIPS
)

_NOTETAKER_SYSTEM = (
    "You are the note-taking agent of a mobile automation system. Maintain "
    "the important task information gathered so far (names, ratings, prices, "
    "summaries). Return the full replacement notes; answer "
    f"NOTES: {NOTES_UNCHANGED} to keep the previous notes verbatim.\n"
    "Respond with exactly this section:\n"
    "NOTES: <full notes text>\n\n"
    "Tips:\n" + INITIAL_TIPS
)


def render_perception(perception: PerceptionResult) -> str:
    """Serialize screen elements for executor/reflector prompts."""
    lines = []
    for text, box in perception.texts:
        lines.append(f'text "{text}" at ({box.left}, {box.top}, {box.right}, {box.bottom})')
    for box, caption in perception.icons:
        lines.append(f'icon "{caption}" at ({box.left}, {box.top}, {box.right}, {box.bottom})')
    return "\n".join(lines) if lines else "(no elements)"


def _render_action_log(entries: list[ActionLogEntry], k: int) -> str:
    lines = [
        f"step {e.step}: {render_action(e.action)} -> outcome {e.outcome.value}"
        for e in entries[-k:]
    ]
    return "\n".join(lines) if lines else "(empty)"


def _render_error_log(entries: list[ErrorLogEntry], k: int) -> str:
    lines = [
        f"step {e.step}: {render_action(e.action)} -> {e.feedback}"
        for e in entries[-k:]
    ]
    return "\n".join(lines) if lines else "(empty)"


def _exemplar_block(docs: list[ManagerDoc]) -> str:
    blocks = []
    for i, doc in enumerate(docs, start=1):
        blocks.append(
            f"Example {i}:\nInstruction: {doc.instruction}\nHuman steps: {doc.human_steps}"
        )
    return "Reference plans from similar tasks:\n" + "\n\n".join(blocks)


def prompt_gen_manager(
    instruction: TaskInstruction,
    mem: WorkingMemory,
    screenshot: Screenshot,
    exemplars: list[ManagerDoc] | None,
    k_err: int = DEFAULT_K_ERR,
) -> ModelRequest:
    """Planner prompt for the current step.

    First step: instruction + screenshot + retrieved exemplars as few-shot
    blocks.  Later steps: previous plan/subtask/progress/notes, no exemplars;
    the error-log tail is appended only while the error flag is set.
    """
    parts: list[PromptPart] = [TextPart(f"Overall Task: {instruction.text}")]
    if mem.step_index == 1:
        if exemplars:
            parts.append(TextPart(_exemplar_block(exemplars)))
        parts.append(ImagePart(screenshot))
    else:
        parts.append(TextPart(f"Previous Plan: {mem.plan}"))
        parts.append(
            TextPart(f"Previous Subtask: {mem.subtask.description} (App: {mem.subtask.app})")
        )
        parts.append(ImagePart(screenshot))
        parts.append(TextPart(f"Progress Status: {mem.progress}"))
        parts.append(TextPart(f"Important Notes: {mem.notes}"))
        if mem.error_flag:
            parts.append(
                TextPart("Recent Error Log:\n" + _render_error_log(mem.error_log, k_err))
            )
    return ModelRequest(system_text=_MANAGER_SYSTEM, user_parts=tuple(parts))


def prompt_gen_operator(
    instruction: TaskInstruction,
    plan: str,
    subtask: Subtask,
    screenshot: Screenshot,
    perception: PerceptionResult,
    mem: WorkingMemory,
    exemplar: OperatorDoc | None,
    reference_screenshot: Screenshot | None = None,
    k_log: int = DEFAULT_K_LOG,
) -> ModelRequest:
    """Executor prompt: subtask, screen elements, log tails, notes, and the
    retrieved exemplar (with its reference screenshot) when there is one."""
    parts: list[PromptPart] = [
        TextPart(f"Overall Task: {instruction.text}"),
        TextPart(f"Current Plan: {plan}"),
        TextPart(f"Current Subtask: {subtask.description} (App: {subtask.app})"),
        ImagePart(screenshot),
        TextPart("Screen elements:\n" + render_perception(perception)),
        TextPart("Recent Action Log:\n" + _render_action_log(mem.action_log, k_log)),
        TextPart("Recent Error Log:\n" + _render_error_log(mem.error_log, k_log)),
        TextPart(f"Important Notes: {mem.notes}"),
    ]
    if exemplar is not None:
        parts.append(
            TextPart(
                "Retrieved exemplar:\n"
                f"Subtask: {exemplar.subtask}\n"
                f"Action: {render_action(exemplar.action)}"
            )
        )
        if reference_screenshot is not None:
            parts.append(ImagePart(reference_screenshot))
    return ModelRequest(system_text=_OPERATOR_SYSTEM, user_parts=tuple(parts))


def _perception_diff(before: PerceptionResult, after: PerceptionResult) -> str:
    before_texts = {t for t, _ in before.texts}
    after_texts = {t for t, _ in after.texts}
    added = sorted(after_texts - before_texts)
    removed = sorted(before_texts - after_texts)
    lines = []
    for text in added:
        lines.append(f'+ "{text}"')
    for text in removed:
        lines.append(f'- "{text}"')
    return "\n".join(lines) if lines else "(no text changes)"


def prompt_gen_reflector(
    instruction: TaskInstruction,
    subtask: Subtask,
    action_line: str,
    before: Screenshot,
    after: Screenshot,
    perception_before: PerceptionResult,
    perception_after: PerceptionResult,
    progress: str,
) -> ModelRequest:
    parts: list[PromptPart] = [
        TextPart(f"Overall Task: {instruction.text}"),
        TextPart(f"Current Subtask: {subtask.description} (App: {subtask.app})"),
        TextPart(f"Executed Action: {action_line}"),
        TextPart("Screen before:"),
        ImagePart(before),
        TextPart("Elements before:\n" + render_perception(perception_before)),
        TextPart("Screen after:"),
        ImagePart(after),
        TextPart("Elements after:\n" + render_perception(perception_after)),
        TextPart("Element changes:\n" + _perception_diff(perception_before, perception_after)),
        TextPart(f"Previous Progress: {progress}"),
    ]
    return ModelRequest(system_text=_REFLECTOR_SYSTEM, user_parts=tuple(parts))


def prompt_gen_notetaker(
    instruction: TaskInstruction,
    plan: str,
    subtask: Subtask,
    screenshot: Screenshot,
    perception: PerceptionResult,
    progress: str,
    notes: str,
) -> ModelRequest:
    parts: list[PromptPart] = [
        TextPart(f"Overall Task: {instruction.text}"),
        TextPart(f"Current Plan: {plan}"),
        TextPart(f"Current Subtask: {subtask.description} (App: {subtask.app})"),
        ImagePart(screenshot),
        TextPart("Screen elements:\n" + render_perception(perception)),
        TextPart(f"Progress Status: {progress}"),
        TextPart(f"Previous Notes: {notes}"),
    ]
    return ModelRequest(system_text=_NOTETAKER_SYSTEM, user_parts=tuple(parts))
