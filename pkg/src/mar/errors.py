"""Exception hierarchy shared across the package."""

from __future__ import annotations


class MarError(Exception):
    """Base class for all package-specific errors."""


class ParseError(MarError):
    """A model-emitted action line could not be decoded."""

    def __init__(self, message: str, text: str = "") -> None:
        super().__init__(message)
        self.text = text


class OutOfBounds(MarError):
    """An action coordinate falls outside the screenshot."""

    def __init__(self, axis: str, value: int, limit: int) -> None:
        super().__init__(f"{axis}={value} outside [0, {limit})")
        self.axis = axis
        self.value = value
        self.limit = limit


class DimensionMismatch(MarError):
    """Vectors of different dimensionality were compared."""


class EmbedderUnavailable(MarError):
    """The configured remote embedder cannot be reached and fallback is off."""


class ProviderError(MarError):
    """Transport-level failure talking to a model provider."""


class ResponseFormatError(MarError):
    """A model response is missing required sections or uses unknown codes."""


class ScriptExhausted(ProviderError):
    """A scripted provider was called with no remaining steps."""


class MatcherMiss(ProviderError):
    """The prompt did not contain the substring the script expected."""

    def __init__(self, matcher: str) -> None:
        super().__init__(f"prompt does not contain expected substring: {matcher!r}")
        self.matcher = matcher


class DeviceUnavailable(MarError):
    """No device (or simulator state) is attached to the backend."""


class UnknownApp(MarError):
    """Open_App names an app with no configured package mapping."""


class PerceptorUnavailable(MarError):
    """The wire backend has no perceptor configured."""


class ScenarioError(MarError):
    """A scenario file violates its schema or transition invariants."""


class InvalidCriteria(MarError):
    """Completion criteria are malformed (bad item count or predicate)."""


class InvalidTrajectory(MarError):
    """A trajectory cannot be scored (e.g. zero steps)."""


class DuplicateInstruction(MarError):
    """Two planner KB entries share the same instruction text."""


class UncoveredEntry(MarError):
    """A staged KB entry has no curation decision."""
