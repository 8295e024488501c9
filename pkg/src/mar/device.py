"""Backend contract shared by the simulator and the wire backend."""

from __future__ import annotations

from typing import Protocol

from .actions import AtomicAction
from .memory import PerceptionResult, Screenshot


class DeviceBackend(Protocol):
    """One exclusive handle on a device or simulated state."""

    def screenshot(self) -> Screenshot: ...

    def perceive(self) -> PerceptionResult: ...

    def execute(self, action: AtomicAction) -> Screenshot: ...

    @property
    def registered_apps(self) -> list[str]: ...


def capture_screenshot(backend: DeviceBackend) -> Screenshot:
    """Grab the current screen; raises DeviceUnavailable when detached."""
    return backend.screenshot()
