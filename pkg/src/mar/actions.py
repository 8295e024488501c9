"""Atomic device actions and the text format used at the model boundary.

The action set is closed: nine variants, each with a fixed wire name and a
fixed argument order.  Model output and knowledge-base files both use the
canonical ``Name at {json-args}`` line produced by :func:`render_action`;
argument-free actions render as ``Name at null``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from enum import Enum
from typing import TYPE_CHECKING

from .errors import OutOfBounds, ParseError

if TYPE_CHECKING:
    from .memory import Screenshot


class OutcomeLabel(Enum):
    """Reflection verdict for one executed action.

    Wire codes: A = success, B = failed on the wrong page, C = failed with
    no screen change.
    """

    SUCCESS = "A"
    FAILED_WRONG_PAGE = "B"
    FAILED_NO_CHANGE = "C"

    @classmethod
    def from_code(cls, code: str) -> "OutcomeLabel":
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown outcome code {code!r}") from None


def _check_coords(action: object) -> None:
    for f in fields(action):  # type: ignore[arg-type]
        if f.name in ("text", "app_name"):
            continue
        value = getattr(action, f.name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"{f.name} must be an integer, got {value!r}")
        if value < 0:
            raise ValueError(f"{f.name} must be >= 0, got {value}")


@dataclass(frozen=True)
class OpenApp:
    app_name: str


@dataclass(frozen=True)
class Tap:
    x: int
    y: int

    def __post_init__(self) -> None:
        _check_coords(self)


@dataclass(frozen=True)
class Swipe:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self) -> None:
        _check_coords(self)


@dataclass(frozen=True)
class TypeText:
    text: str


@dataclass(frozen=True)
class Enter:
    pass


@dataclass(frozen=True)
class Back:
    pass


@dataclass(frozen=True)
class Home:
    pass


@dataclass(frozen=True)
class Wait:
    pass


@dataclass(frozen=True)
class TapTypeEnter:
    x: int
    y: int
    text: str

    def __post_init__(self) -> None:
        _check_coords(self)


AtomicAction = (
    OpenApp | Tap | Swipe | TypeText | Enter | Back | Home | Wait | TapTypeEnter
)

# Wire name -> (class, ordered argument keys). The order is the canonical
# rendering order; parsing requires exactly these keys.
_WIRE: dict[str, tuple[type, tuple[str, ...]]] = {
    "Open_App": (OpenApp, ("app_name",)),
    "Tap": (Tap, ("x", "y")),
    "Swipe": (Swipe, ("x1", "y1", "x2", "y2")),
    "Type": (TypeText, ("text",)),
    "Enter": (Enter, ()),
    "Back": (Back, ()),
    "Home": (Home, ()),
    "Wait": (Wait, ()),
    "Tap_Type_and_Enter": (TapTypeEnter, ("x", "y", "text")),
}

_CLASS_TO_WIRE = {cls: (name, keys) for name, (cls, keys) in _WIRE.items()}


def action_name(a: AtomicAction) -> str:
    """Wire name of an action (used for repetition and dedup checks)."""
    return _CLASS_TO_WIRE[type(a)][0]


def parse_action(text: str) -> AtomicAction:
    """Decode one ``Name at {json-args}`` action line.

    Tolerates surrounding whitespace. Raises :class:`ParseError` for names
    outside the closed set, missing/extra arguments, or non-integer
    coordinates.
    """
    stripped = text.strip()
    name, sep, arg_text = stripped.partition(" at ")
    if not sep:
        raise ParseError(f"not an action line: {text!r}", text)
    name = name.strip()
    if name not in _WIRE:
        raise ParseError(f"unknown action name {name!r}", text)
    cls, keys = _WIRE[name]
    arg_text = arg_text.strip()
    if not keys:
        if arg_text != "null":
            raise ParseError(f"{name} takes no arguments, got {arg_text!r}", text)
        return cls()
    try:
        args = json.loads(arg_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad argument JSON for {name}: {exc}", text) from None
    if not isinstance(args, dict):
        raise ParseError(f"arguments for {name} must be a JSON object", text)
    if set(args) != set(keys):
        raise ParseError(
            f"{name} expects arguments {list(keys)}, got {sorted(args)}", text
        )
    for key in keys:
        value = args[key]
        if key in ("text", "app_name"):
            if not isinstance(value, str):
                raise ParseError(f"{key} must be a string", text)
        elif isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"{key} must be an integer, got {value!r}", text)
    try:
        return cls(**{key: args[key] for key in keys})
    except ValueError as exc:
        raise ParseError(str(exc), text) from None


def render_action(a: AtomicAction) -> str:
    """Encode an action in its canonical wire form.

    Inverse of :func:`parse_action`: ``parse_action(render_action(a)) == a``.
    """
    name, keys = _CLASS_TO_WIRE[type(a)]
    if not keys:
        return f"{name} at null"
    payload = {key: getattr(a, key) for key in keys}
    return f"{name} at " + json.dumps(payload, ensure_ascii=False)


def validate_action(a: AtomicAction, screen: "Screenshot") -> None:
    """Reject actions whose coordinates fall outside [0, width) x [0, height)."""
    points: list[tuple[int, int]] = []
    if isinstance(a, (Tap, TapTypeEnter)):
        points.append((a.x, a.y))
    elif isinstance(a, Swipe):
        points.append((a.x1, a.y1))
        points.append((a.x2, a.y2))
    for x, y in points:
        if not 0 <= x < screen.width:
            raise OutOfBounds("x", x, screen.width)
        if not 0 <= y < screen.height:
            raise OutOfBounds("y", y, screen.height)
