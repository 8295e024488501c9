"""Deterministic app-screen state machines standing in for a real device.

A scenario file is one JSON document: registered apps with their entry
screens, screen definitions (elements with pixel boxes), transition rules,
optional per-(screen, action) oracle outcomes for reflection scoring, and
optional completion items.  Transition ambiguity is rejected at load time so
runtime execution never has to arbitrate.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .actions import OutcomeLabel
from .errors import ScenarioError
from .memory import BoundingBox

ELEMENT_KINDS = ("text", "icon", "input")

HOME_SCREEN = "home"


@dataclass(frozen=True)
class Element:
    id: str
    text: str
    bbox: BoundingBox
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_KINDS:
            raise ScenarioError(f"element {self.id}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class ScreenDef:
    id: str
    app: str
    width: int
    height: int
    elements: tuple[Element, ...]

    def element_at(self, x: int, y: int) -> Element | None:
        """Innermost element containing the point (nested boxes allowed)."""
        hit: Element | None = None
        for el in self.elements:
            if el.bbox.contains(x, y):
                if hit is None or _area(el.bbox) < _area(hit.bbox):
                    hit = el
        return hit

    def element(self, element_id: str) -> Element | None:
        for el in self.elements:
            if el.id == element_id:
                return el
        return None


def _area(box: BoundingBox) -> int:
    return max(0, box.right - box.left) * max(0, box.bottom - box.top)


@dataclass(frozen=True)
class ActionMatcher:
    """Matches (action name, optional element hit, optional text pattern)."""

    action: str
    element: str | None = None
    text_pattern: str | None = None

    def matches_text(self, text: str) -> bool:
        if self.text_pattern is None:
            return True
        return re.search(self.text_pattern, text) is not None


@dataclass(frozen=True)
class TransitionRule:
    source: str
    on: ActionMatcher
    target: str
    effects: dict = field(default_factory=dict)


@dataclass
class Scenario:
    apps: list[str]
    entry_screens: dict[str, str]
    screens: dict[str, ScreenDef]
    initial_screen: str
    transitions: list[TransitionRule]
    oracle_outcomes: dict[tuple[str, str], OutcomeLabel]
    completion_items: list[dict]

    def screen(self, screen_id: str) -> ScreenDef:
        return self.screens[screen_id]

    def rules_for(self, screen_id: str, action_name: str) -> list[TransitionRule]:
        return [
            r
            for r in self.transitions
            if r.source == screen_id and r.on.action == action_name
        ]


def _overlapping(a: ActionMatcher, b: ActionMatcher) -> bool:
    """Conservative test: could both matchers accept one concrete action?"""
    if a.element and b.element and a.element != b.element:
        return False
    if a.text_pattern and b.text_pattern and a.text_pattern != b.text_pattern:
        return False
    return True


def _validate(scenario: Scenario) -> None:
    if scenario.initial_screen not in scenario.screens:
        raise ScenarioError(f"initial screen {scenario.initial_screen!r} undefined")
    if len(set(scenario.apps)) != len(scenario.apps):
        raise ScenarioError("app names must be unique")
    for app, entry in scenario.entry_screens.items():
        if app not in scenario.apps:
            raise ScenarioError(f"entry screen listed for unregistered app {app!r}")
        if entry not in scenario.screens:
            raise ScenarioError(f"entry screen {entry!r} for {app!r} undefined")
    for screen in scenario.screens.values():
        seen: set[str] = set()
        for el in screen.elements:
            if el.id in seen:
                raise ScenarioError(f"screen {screen.id}: duplicate element {el.id}")
            seen.add(el.id)
            if not el.bbox.within(screen.width, screen.height):
                raise ScenarioError(
                    f"screen {screen.id}: element {el.id} outside screen bounds"
                )
    for rule in scenario.transitions:
        if rule.source not in scenario.screens:
            raise ScenarioError(f"transition from unknown screen {rule.source!r}")
        if rule.target not in scenario.screens:
            raise ScenarioError(f"transition to unknown screen {rule.target!r}")
        if rule.on.element is not None:
            if scenario.screens[rule.source].element(rule.on.element) is None:
                raise ScenarioError(
                    f"transition on {rule.source!r} references missing element "
                    f"{rule.on.element!r}"
                )
    rules = scenario.transitions
    for i, a in enumerate(rules):
        for b in rules[i + 1 :]:
            if a.source == b.source and a.on.action == b.on.action:
                if _overlapping(a.on, b.on):
                    raise ScenarioError(
                        f"ambiguous transitions on screen {a.source!r} for "
                        f"action {a.on.action!r}"
                    )


def scenario_from_dict(data: dict) -> Scenario:
    screens: dict[str, ScreenDef] = {}
    for screen_id, raw in data["screens"].items():
        elements = tuple(
            Element(
                id=el["id"],
                text=el.get("text", ""),
                bbox=BoundingBox(*el["bbox"]),
                kind=el.get("kind", "text"),
            )
            for el in raw.get("elements", [])
        )
        screens[screen_id] = ScreenDef(
            id=screen_id,
            app=raw.get("app", HOME_SCREEN),
            width=int(raw.get("width", 1080)),
            height=int(raw.get("height", 2400)),
            elements=elements,
        )
    transitions = []
    for raw in data.get("transitions", []):
        on = raw["on"]
        transitions.append(
            TransitionRule(
                source=raw["from"],
                on=ActionMatcher(
                    action=on["action"],
                    element=on.get("element"),
                    text_pattern=on.get("text"),
                ),
                target=raw["to"],
                effects=raw.get("effects", {}),
            )
        )
    oracle: dict[tuple[str, str], OutcomeLabel] = {}
    for raw in data.get("oracle_outcomes", []):
        oracle[(raw["screen"], raw["action"])] = OutcomeLabel(raw["outcome"])
    scenario = Scenario(
        apps=list(data.get("apps", [])),
        entry_screens=dict(data.get("entry_screens", {})),
        screens=screens,
        initial_screen=data.get("initial_screen", HOME_SCREEN),
        transitions=transitions,
        oracle_outcomes=oracle,
        completion_items=list(data.get("completion_items", [])),
    )
    _validate(scenario)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
