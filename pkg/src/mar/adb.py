"""Wire backend: atomic actions serialized to device-bridge shell commands.

Command strings follow the bridge's ``input`` syntax; Type payloads are
backslash-escaped so the shell passes them through intact.  Wait emits no
command, only a pause.
"""

from __future__ import annotations

import subprocess
import time
from dataclasses import dataclass, field
from typing import Callable

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
)
from .errors import DeviceUnavailable, PerceptorUnavailable, UnknownApp
from .memory import PerceptionResult, Screenshot

WAIT_SECONDS = 10.0
SWIPE_DURATION_MS = 300

KEYCODE_ENTER = 66
KEYCODE_BACK = 4
KEYCODE_HOME = 3

# Shell metacharacters escaped inside `input text` payloads.
_ESCAPED = "\\ ;|`'\"&<>()#$"


def escape_text(text: str) -> str:
    for ch in _ESCAPED:
        text = text.replace(ch, "\\" + ch)
    return text


def adb_serialize(
    action: AtomicAction, package_map: dict[str, str] | None = None
) -> list[str]:
    """Shell command strings for one action (possibly several, in order)."""
    if isinstance(action, Tap):
        return [f"input tap {action.x} {action.y}"]
    if isinstance(action, Swipe):
        return [
            f"input swipe {action.x1} {action.y1} {action.x2} {action.y2} "
            f"{SWIPE_DURATION_MS}"
        ]
    if isinstance(action, TypeText):
        return [f"input text {escape_text(action.text)}"]
    if isinstance(action, Enter):
        return [f"input keyevent {KEYCODE_ENTER}"]
    if isinstance(action, Back):
        return [f"input keyevent {KEYCODE_BACK}"]
    if isinstance(action, Home):
        return [f"input keyevent {KEYCODE_HOME}"]
    if isinstance(action, Wait):
        return []
    if isinstance(action, OpenApp):
        package_map = package_map or {}
        if action.app_name not in package_map:
            raise UnknownApp(f"no package mapping for app {action.app_name!r}")
        package = package_map[action.app_name]
        return [f"monkey -p {package} -c android.intent.category.LAUNCHER 1"]
    if isinstance(action, TapTypeEnter):
        return (
            adb_serialize(Tap(action.x, action.y))
            + adb_serialize(TypeText(action.text))
            + adb_serialize(Enter())
        )
    raise AssertionError(f"unhandled action {action!r}")


def _default_runner(serial: str | None, args: list[str]) -> bytes:
    cmd = ["adb"]
    if serial:
        cmd += ["-s", serial]
    cmd += args
    try:
        return subprocess.run(cmd, check=True, capture_output=True).stdout
    except (OSError, subprocess.CalledProcessError) as exc:
        raise DeviceUnavailable(f"adb call failed: {exc}") from exc


@dataclass
class AdbDevice:
    """Backend driving a real device over the debug bridge.

    The perceptor is a pluggable hook (OCR/grounding models are deployment
    concerns); without one, perceive() refuses rather than guessing.
    """

    serial: str | None = None
    package_map: dict[str, str] = field(default_factory=dict)
    perceptor: Callable[[Screenshot], PerceptionResult] | None = None
    runner: Callable[[str | None, list[str]], bytes] = _default_runner
    sleeper: Callable[[float], None] = time.sleep
    screen_size: tuple[int, int] = (1080, 2400)

    def screenshot(self) -> Screenshot:
        png = self.runner(self.serial, ["exec-out", "screencap", "-p"])
        if not png:
            raise DeviceUnavailable("empty screenshot payload")
        width, height = self.screen_size
        return Screenshot(image=png, width=width, height=height, source="adb")

    def perceive(self) -> PerceptionResult:
        if self.perceptor is None:
            raise PerceptorUnavailable("no perceptor configured for the wire backend")
        return self.perceptor(self.screenshot())

    def execute(self, action: AtomicAction) -> Screenshot:
        for command in adb_serialize(action, self.package_map):
            self.runner(self.serial, ["shell", command])
        if isinstance(action, Wait):
            self.sleeper(WAIT_SECONDS)
        return self.screenshot()

    @property
    def registered_apps(self) -> list[str]:
        return list(self.package_map)
