"""The iterative task loop: perceive, plan, act, re-perceive, reflect, note.

Each iteration produces exactly one step record.  Role-level failures
(malformed sections, unparseable or out-of-bounds actions) are contained in
the record; only transport-level provider failures terminate the run early.
Termination: the planner's DONE sentinel, the step cap, or the consecutive
action-repetition cap.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .actions import OutcomeLabel, action_name, render_action, validate_action
from .device import DeviceBackend
from .errors import (
    OutOfBounds,
    ParseError,
    ProviderError,
    ResponseFormatError,
)
from .memory import (
    ActionLogEntry,
    ErrorLogEntry,
    Screenshot,
    TaskInstruction,
    WorkingMemory,
)
from .prompts import (
    DEFAULT_K_ERR,
    DEFAULT_K_LOG,
    prompt_gen_manager,
    prompt_gen_notetaker,
    prompt_gen_operator,
    prompt_gen_reflector,
)
from .providers import Provider
from .retrieval import (
    ManagerKB,
    OperatorDoc,
    OperatorKBRegistry,
    manager_retrieve,
    operator_retrieve,
)
from .roles import manager_step, notetake_step, operator_step, reflect_step
from .trajectory import (
    StepRecord,
    Trajectory,
    save_screenshot,
    save_trajectory,
    screenshot_filename,
    snapshot_memory,
)

DEFAULT_MAX_STEPS = 30
DEFAULT_REPEAT_CAP = 5
DEFAULT_K_RETRIEVE = 3


@dataclass
class RunConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    repeat_cap: int = DEFAULT_REPEAT_CAP
    k_retrieve: int = DEFAULT_K_RETRIEVE
    k_err: int = DEFAULT_K_ERR
    k_log: int = DEFAULT_K_LOG
    provider: str = "scripted"
    embedder: str | None = None  # None: MAR_EMBEDDER_URL if set, else fallback
    kb_dir: str | None = None
    scenario_path: str | None = None
    device_serial: str | None = None
    log_kb: str | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.repeat_cap < 1:
            raise ValueError("repeat_cap must be >= 1")


def update_error_flag(
    error_log: list[ErrorLogEntry], action_log: list[ActionLogEntry]
) -> bool:
    """True iff the two most recent logged actions both failed."""
    if len(action_log) < 2:
        return False
    return all(e.outcome is not OutcomeLabel.SUCCESS for e in action_log[-2:])


def detect_repetition(action_log: list[ActionLogEntry], cap: int) -> bool:
    """True iff the last cap+1 actions are identical, arguments included."""
    if len(action_log) < cap + 1:
        return False
    tail = action_log[-(cap + 1):]
    first = tail[0].action
    return all(entry.action == first for entry in tail[1:])


@dataclass
class _StepAccounting:
    """Per-step prompt digests and token counts keyed by role."""

    provider: Provider
    digests: dict[str, str] = dc_field(default_factory=dict)
    tokens: dict[str, list[int]] = dc_field(default_factory=dict)

    def call(self, component: str, fn, *args):
        before = len(self.provider.calls)
        result = fn(*args)
        if len(self.provider.calls) > before:
            record = self.provider.calls[-1]
            self.digests[component] = record.prompt_digest
            self.tokens[component] = [record.input_tokens, record.output_tokens]
        return result


class KBLogger:
    """Optional staging-directory logger; see kb_builder for the pipeline."""

    def log_step(self, app: str, subtask: str, screenshot: Screenshot, action) -> None:
        raise NotImplementedError


def run_task(
    instruction: TaskInstruction,
    backend: DeviceBackend,
    provider: Provider,
    manager_kb: ManagerKB,
    operator_registry: OperatorKBRegistry,
    cfg: RunConfig | None = None,
    kb_logger: KBLogger | None = None,
    kb_root: str | Path | None = None,
) -> Trajectory:
    """Execute one task to termination and return its trajectory.

    With a scripted provider and the simulator this is bitwise reproducible
    apart from wall-clock durations.
    """
    cfg = cfg or RunConfig()
    mem = WorkingMemory()
    trajectory = Trajectory(task=instruction.text)
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None

    screenshot = backend.screenshot()
    before_path: str | None = None
    if out_dir is not None:
        before_path = screenshot_filename("initial", screenshot)
        save_screenshot(out_dir, before_path, screenshot)

    t = 1
    while True:
        mem.step_index = t
        started = time.perf_counter()
        acct = _StepAccounting(provider)
        record = StepRecord(step=t, screenshot_before=before_path)
        record.screen_before = screenshot.screen_id

        # Phase 1: perception of the pre-action screen.
        perception = backend.perceive()
        record.phases.append("perceive")

        # Phase 2: high-level planning (with exemplars only on the first step).
        exemplars = None
        if t == 1:
            exemplars = manager_retrieve(instruction, manager_kb, cfg.k_retrieve)
            record.manager_retrieved_ids = [d.id for d in exemplars]
        request = prompt_gen_manager(instruction, mem, screenshot, exemplars, cfg.k_err)
        try:
            decision = acct.call(
                "manager", manager_step, provider, request, backend.registered_apps
            )
        except ProviderError as exc:
            trajectory.set_termination("ProviderFailure", str(exc))
            break
        except ResponseFormatError as exc:
            record.failure_stage = "manager"
            record.feedback = str(exc)
            _finish_step(record, acct, started, mem, trajectory)
            if t >= cfg.max_steps:
                trajectory.set_termination("MaxSteps")
                break
            t += 1
            continue
        record.phases.append("manage")
        if decision.done:
            trajectory.set_termination("ManagerDone")
            break
        mem.plan = decision.plan
        mem.subtask = decision.subtask
        record.plan = decision.plan
        record.subtask = decision.subtask.description
        record.app = decision.subtask.app

        # Phase 3: retrieval-guided action generation and execution.
        exemplar = operator_retrieve(
            decision.subtask.description, decision.subtask.app, operator_registry
        )
        record.operator_retrieved_id = exemplar.id if exemplar is not None else None
        reference = _load_reference_screenshot(exemplar, kb_root)
        request = prompt_gen_operator(
            instruction,
            decision.plan,
            decision.subtask,
            screenshot,
            perception,
            mem,
            exemplar,
            reference,
            cfg.k_log,
        )
        try:
            action = acct.call("operator", operator_step, provider, request)
            validate_action(action, screenshot)
        except ProviderError as exc:
            trajectory.set_termination("ProviderFailure", str(exc))
            break
        except (ParseError, ResponseFormatError, OutOfBounds) as exc:
            record.failure_stage = "operator"
            record.feedback = str(exc)
            record.outcome = OutcomeLabel.FAILED_NO_CHANGE.value
            if isinstance(exc, ParseError):
                record.raw_action_text = exc.text
            _finish_step(record, acct, started, mem, trajectory)
            if t >= cfg.max_steps:
                trajectory.set_termination("MaxSteps")
                break
            t += 1
            continue
        record.phases.append("operate")
        record.action = render_action(action)
        if kb_logger is not None:
            kb_logger.log_step(
                decision.subtask.app, decision.subtask.description, screenshot, action
            )
        after = backend.execute(action)
        record.changed = bool(getattr(backend, "last_changed", False))
        record.rule_fired = bool(getattr(backend, "last_rule_fired", False))
        record.screen_after = after.screen_id
        record.oracle_outcome = _oracle_outcome(backend, screenshot, action)

        # Phase 4: post-action perception.
        perception_after = backend.perceive()
        record.phases.append("perceive")

        # Phase 5: reflection and log maintenance.
        request = prompt_gen_reflector(
            instruction,
            decision.subtask,
            record.action,
            screenshot,
            after,
            perception,
            perception_after,
            mem.progress,
        )
        try:
            outcome, progress, feedback = acct.call(
                "reflector", reflect_step, provider, request
            )
        except ProviderError as exc:
            trajectory.set_termination("ProviderFailure", str(exc))
            break
        except ResponseFormatError as exc:
            outcome = OutcomeLabel.FAILED_NO_CHANGE
            progress = mem.progress
            feedback = f"malformed reflection: {exc}"
        mem.record(action, outcome, feedback, t)
        mem.progress = progress
        mem.error_flag = update_error_flag(mem.error_log, mem.action_log)
        record.outcome = outcome.value
        record.feedback = feedback
        record.progress = progress
        record.phases.append("reflect")

        # Phase 6: note aggregation.
        request = prompt_gen_notetaker(
            instruction,
            decision.plan,
            decision.subtask,
            after,
            perception_after,
            mem.progress,
            mem.notes,
        )
        try:
            mem.notes = acct.call("notetaker", notetake_step, provider, request, mem.notes)
        except ProviderError as exc:
            trajectory.set_termination("ProviderFailure", str(exc))
            break
        except ResponseFormatError:
            pass  # keep previous notes
        record.notes = mem.notes
        record.phases.append("note")

        if out_dir is not None:
            after_path = screenshot_filename(f"step_{t:03d}_after", after)
            save_screenshot(out_dir, after_path, after)
            record.screenshot_after = after_path
            before_path = after_path
        screenshot = after
        _finish_step(record, acct, started, mem, trajectory)

        if detect_repetition(mem.action_log, cfg.repeat_cap):
            trajectory.set_termination(
                "RepetitionCap",
                f"{cfg.repeat_cap + 1} consecutive identical actions "
                f"({action_name(action)})",
            )
            break
        if t >= cfg.max_steps:
            trajectory.set_termination("MaxSteps")
            break
        t += 1

    trajectory.final_memory = snapshot_memory(mem)
    trajectory.summarize_tokens()
    if out_dir is not None:
        save_trajectory(trajectory, out_dir)
    return trajectory


def _finish_step(
    record: StepRecord,
    acct: _StepAccounting,
    started: float,
    mem: WorkingMemory,
    trajectory: Trajectory,
) -> None:
    record.prompt_digests = acct.digests
    record.tokens = acct.tokens
    record.wall_ms = (time.perf_counter() - started) * 1000.0
    if record.screen_after is None:
        record.screen_after = record.screen_before
    if record.screenshot_after is None:
        record.screenshot_after = record.screenshot_before
    if not record.notes:
        record.notes = mem.notes
    trajectory.steps.append(record)


def _oracle_outcome(backend: DeviceBackend, before: Screenshot, action) -> str | None:
    """Scenario oracle for reflection scoring; None on non-sim backends."""
    scenario = getattr(backend, "scenario", None)
    if scenario is None or before.screen_id is None:
        return None
    explicit = scenario.oracle_outcomes.get((before.screen_id, action_name(action)))
    if explicit is not None:
        return explicit.value
    changed = bool(getattr(backend, "last_changed", False))
    return (OutcomeLabel.SUCCESS if changed else OutcomeLabel.FAILED_NO_CHANGE).value


def _load_reference_screenshot(
    exemplar: OperatorDoc | None, kb_root: str | Path | None
) -> Screenshot | None:
    if exemplar is None or kb_root is None:
        return None
    path = Path(kb_root) / exemplar.screenshot_path
    if not path.is_file():
        return None
    data = path.read_bytes()
    if not data:
        return None
    source = "sim" if path.suffix == ".json" else "kb"
    return Screenshot(image=data, width=1080, height=2400, source=source,
                      screen_id=path.stem if source == "sim" else None)
