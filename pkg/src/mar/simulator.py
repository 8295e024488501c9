"""Scenario-driven device simulator.

Execution is total: actions that match nothing leave the state unchanged,
mirroring how a real phone swallows useless input.  App launching works only
from the home screen; Back pops the navigation stack; Home resets it.  Every
execution reports whether anything changed, which feeds the operator-accuracy
oracle during evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .actions import (
    AtomicAction,
    Back,
    Enter,
    Home,
    OpenApp,
    Swipe,
    Tap,
    TapTypeEnter,
    TypeText,
    Wait,
    action_name,
)
from .memory import BoundingBox, PerceptionResult, Screenshot
from .scenario import HOME_SCREEN, Scenario, ScreenDef, TransitionRule


@dataclass(frozen=True)
class DeviceState:
    """Navigation stack (bottom is always home), input buffers, and focus."""

    stack: tuple[str, ...] = (HOME_SCREEN,)
    buffers: tuple[tuple[str, str], ...] = ()  # ((screen_id:element_id, text), ...)
    focus: tuple[tuple[str, str], ...] = ()  # ((screen_id, element_id), ...)

    @property
    def current(self) -> str:
        return self.stack[-1]

    def buffer(self, screen_id: str, element_id: str) -> str:
        key = f"{screen_id}:{element_id}"
        for k, v in self.buffers:
            if k == key:
                return v
        return ""

    def focused(self, screen_id: str) -> str | None:
        for sid, el in self.focus:
            if sid == screen_id:
                return el
        return None

    def _with_buffer(self, screen_id: str, element_id: str, text: str) -> "DeviceState":
        key = f"{screen_id}:{element_id}"
        rest = tuple((k, v) for k, v in self.buffers if k != key)
        return replace(self, buffers=tuple(sorted(rest + ((key, text),))))

    def _with_focus(self, screen_id: str, element_id: str) -> "DeviceState":
        rest = tuple((s, e) for s, e in self.focus if s != screen_id)
        return replace(self, focus=tuple(sorted(rest + ((screen_id, element_id),))))


@dataclass(frozen=True)
class ExecutionResult:
    state: DeviceState
    screenshot: Screenshot
    changed: bool
    rule_fired: bool


def render_screenshot(scenario: Scenario, state: DeviceState) -> Screenshot:
    """Structured JSON stand-in for the current screen's pixels."""
    screen = scenario.screen(state.current)
    elements = []
    for el in sorted(screen.elements, key=lambda e: e.id):
        shown = el.text
        if el.kind == "input":
            typed = state.buffer(screen.id, el.id)
            if typed:
                shown = typed
        elements.append(
            {
                "id": el.id,
                "kind": el.kind,
                "text": shown,
                "bbox": [el.bbox.left, el.bbox.top, el.bbox.right, el.bbox.bottom],
            }
        )
    payload = {
        "screen": screen.id,
        "app": screen.app,
        "elements": elements,
    }
    return Screenshot(
        image=json.dumps(payload, sort_keys=True).encode("utf-8"),
        width=screen.width,
        height=screen.height,
        source="sim",
        screen_id=screen.id,
    )


def sim_perceive(scenario: Scenario, state: DeviceState) -> PerceptionResult:
    """Ground-truth perception: every element, ordered by element id."""
    screen = scenario.screen(state.current)
    texts: list[tuple[str, BoundingBox]] = []
    icons: list[tuple[BoundingBox, str]] = []
    for el in sorted(screen.elements, key=lambda e: e.id):
        if el.kind == "icon":
            icons.append((el.bbox, el.text))
        elif el.kind == "input":
            typed = state.buffer(screen.id, el.id)
            texts.append((typed if typed else el.text, el.bbox))
        else:
            texts.append((el.text, el.bbox))
    return PerceptionResult(texts=tuple(texts), icons=tuple(icons))


def _matching_rule(
    scenario: Scenario,
    screen: ScreenDef,
    state: DeviceState,
    action: AtomicAction,
) -> TransitionRule | None:
    name = action_name(action)
    point: tuple[int, int] | None = None
    text = ""
    if isinstance(action, (Tap, TapTypeEnter)):
        point = (action.x, action.y)
    elif isinstance(action, Swipe):
        point = (action.x1, action.y1)
    if isinstance(action, (TypeText, TapTypeEnter)):
        text = action.text
    for rule in scenario.rules_for(screen.id, name):
        if rule.on.element is not None:
            el = screen.element(rule.on.element)
            if el is None or point is None or not el.bbox.contains(*point):
                continue
        if not rule.on.matches_text(text):
            continue
        return rule
    return None


def _apply_effects(state: DeviceState, screen_id: str, effects: dict) -> DeviceState:
    if "focus" in effects:
        state = state._with_focus(screen_id, effects["focus"])
    if "set_input" in effects:
        spec = effects["set_input"]
        state = state._with_buffer(screen_id, spec["element"], spec.get("value", ""))
    if "clear_input" in effects:
        state = state._with_buffer(screen_id, effects["clear_input"], "")
    return state


def _goto(state: DeviceState, target: str) -> DeviceState:
    if target == state.current:
        return state
    if target == HOME_SCREEN:
        return replace(state, stack=(HOME_SCREEN,))
    return replace(state, stack=state.stack + (target,))


def _fire(
    state: DeviceState, rule: TransitionRule, screen_id: str
) -> DeviceState:
    state = _apply_effects(state, screen_id, rule.effects)
    return _goto(state, rule.target)


def _exec_single(
    scenario: Scenario, state: DeviceState, action: AtomicAction
) -> tuple[DeviceState, bool, bool]:
    """One primitive action. Returns (state, changed, rule_fired)."""
    screen = scenario.screen(state.current)

    if isinstance(action, OpenApp):
        if state.current == HOME_SCREEN and action.app_name in scenario.entry_screens:
            entry = scenario.entry_screens[action.app_name]
            return replace(state, stack=(HOME_SCREEN, entry)), True, False
        return state, False, False

    if isinstance(action, Home):
        if state.current == HOME_SCREEN:
            return state, False, False
        return replace(state, stack=(HOME_SCREEN,)), True, False

    rule = _matching_rule(scenario, screen, state, action)

    if isinstance(action, Back):
        if rule is not None:
            return _fire(state, rule, screen.id), True, True
        if len(state.stack) > 1:
            return replace(state, stack=state.stack[:-1]), True, False
        return state, False, False

    if isinstance(action, Tap):
        new_state = state
        hit = screen.element_at(action.x, action.y)
        if hit is not None and hit.kind == "input":
            new_state = new_state._with_focus(screen.id, hit.id)
        if rule is not None:
            return _fire(new_state, rule, screen.id), True, True
        return new_state, new_state != state, False

    if isinstance(action, TypeText):
        new_state = state
        wrote = False
        target = state.focused(screen.id)
        if target is None:
            inputs = [el for el in screen.elements if el.kind == "input"]
            if len(inputs) == 1:
                target = inputs[0].id
        if target is not None:
            existing = state.buffer(screen.id, target)
            new_state = state._with_buffer(screen.id, target, existing + action.text)
            wrote = True
        if rule is not None:
            return _fire(new_state, rule, screen.id), True, True
        return new_state, wrote, False

    if isinstance(action, (Enter, Swipe)):
        if rule is not None:
            return _fire(state, rule, screen.id), True, True
        return state, False, False

    if isinstance(action, Wait):
        return state, False, False

    raise AssertionError(f"unhandled action {action!r}")


def sim_execute(
    scenario: Scenario, state: DeviceState, action: AtomicAction
) -> ExecutionResult:
    """Apply one atomic action; never raises on useless input."""
    if isinstance(action, TapTypeEnter):
        changed = False
        fired = False
        for sub in (Tap(action.x, action.y), TypeText(action.text), Enter()):
            state, sub_changed, sub_fired = _exec_single(scenario, state, sub)
            changed = changed or sub_changed
            fired = fired or sub_fired
    else:
        state, changed, fired = _exec_single(scenario, state, action)
    return ExecutionResult(
        state=state,
        screenshot=render_screenshot(scenario, state),
        changed=changed,
        rule_fired=fired,
    )


@dataclass
class SimulatedDevice:
    """Stateful backend wrapper used by the task loop.

    Wait is instantaneous here; the 10-second page-load pause only matters on
    real hardware.
    """

    scenario: Scenario
    state: DeviceState = field(default_factory=DeviceState)
    last_changed: bool = False
    last_rule_fired: bool = False

    def screenshot(self) -> Screenshot:
        return render_screenshot(self.scenario, self.state)

    def perceive(self) -> PerceptionResult:
        return sim_perceive(self.scenario, self.state)

    def execute(self, action: AtomicAction) -> Screenshot:
        result = sim_execute(self.scenario, self.state, action)
        self.state = result.state
        self.last_changed = result.changed
        self.last_rule_fired = result.rule_fired
        return result.screenshot

    @property
    def registered_apps(self) -> list[str]:
        return list(self.scenario.apps)
