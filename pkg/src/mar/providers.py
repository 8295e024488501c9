"""Model-provider contract, the deterministic scripted provider used in
tests and the bundled run, and the HTTP provider for real deployments.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .errors import MatcherMiss, ProviderError, ScriptExhausted
from .memory import Screenshot

DEFAULT_MAX_TOKENS = 2048
DEFAULT_TEMPERATURE = 0.0


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    screenshot: Screenshot

    def placeholder(self) -> str:
        """Stable text stand-in used when flattening prompts."""
        tag = self.screenshot.screen_id
        if tag is None:
            tag = hashlib.sha256(self.screenshot.image).hexdigest()[:12]
        return f"[image {self.screenshot.source}:{tag}]"


PromptPart = TextPart | ImagePart


@dataclass(frozen=True)
class ModelRequest:
    system_text: str
    user_parts: tuple[PromptPart, ...]
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self) -> None:
        if not self.user_parts:
            raise ValueError("request needs at least one user part")

    def flatten(self) -> str:
        """Full prompt as one text block (matching, digests, token counts)."""
        chunks = [self.system_text]
        for part in self.user_parts:
            chunks.append(part.text if isinstance(part, TextPart) else part.placeholder())
        return "\n".join(chunks)

    def digest(self) -> str:
        return hashlib.sha256(self.flatten().encode("utf-8")).hexdigest()


def count_tokens(text: str) -> int:
    """Whitespace token count used for the accounting schema."""
    return len(text.split())


@dataclass
class CallRecord:
    input_tokens: int
    output_tokens: int
    prompt_digest: str


class Provider(Protocol):
    calls: list[CallRecord]

    def complete(self, request: ModelRequest) -> str: ...


@dataclass(frozen=True)
class ScriptStep:
    match: str
    response: str


@dataclass
class ProviderScript:
    """Ordered (matcher, response) steps, each consumed exactly once."""

    steps: list[ScriptStep]

    @classmethod
    def load(cls, path: str | Path) -> "ProviderScript":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls([ScriptStep(item["match"], item["response"]) for item in raw])


class ScriptedProvider:
    """Replays a script in order.

    Every step's matcher must occur in the flattened prompt of the call that
    consumes it; a miss points at a prompt-assembly regression rather than
    silently answering.
    """

    def __init__(self, script: ProviderScript) -> None:
        self._steps = list(script.steps)
        self._cursor = 0
        self.calls: list[CallRecord] = []

    def complete(self, request: ModelRequest) -> str:
        if self._cursor >= len(self._steps):
            raise ScriptExhausted(f"script exhausted after {self._cursor} steps")
        step = self._steps[self._cursor]
        prompt = request.flatten()
        if step.match not in prompt:
            raise MatcherMiss(step.match)
        self._cursor += 1
        self.calls.append(
            CallRecord(
                input_tokens=count_tokens(prompt),
                output_tokens=count_tokens(step.response),
                prompt_digest=request.digest(),
            )
        )
        return step.response


class HttpProvider:
    """Single-POST JSON provider.

    Base URL and API key come from MAR_PROVIDER_URL / MAR_PROVIDER_KEY unless
    given explicitly.  Transport errors retry three times with exponential
    backoff; malformed responses do not retry.
    """

    RETRIES = 3

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
    ) -> None:
        self.base_url = (base_url or os.environ.get("MAR_PROVIDER_URL", "")).rstrip("/")
        if not self.base_url:
            raise ProviderError("no provider URL configured (MAR_PROVIDER_URL)")
        self.api_key = api_key if api_key is not None else os.environ.get("MAR_PROVIDER_KEY", "")
        self.timeout = timeout
        self.calls: list[CallRecord] = []

    def _payload(self, request: ModelRequest) -> dict:
        parts = []
        for part in request.user_parts:
            if isinstance(part, TextPart):
                parts.append({"type": "text", "text": part.text})
            else:
                parts.append(
                    {
                        "type": "image",
                        "source": part.screenshot.source,
                        "data": part.screenshot.image.hex(),
                        "width": part.screenshot.width,
                        "height": part.screenshot.height,
                    }
                )
        return {
            "system_text": request.system_text,
            "user_parts": parts,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }

    def complete(self, request: ModelRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_exc: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                resp = requests.post(
                    self.base_url,
                    json=self._payload(request),
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                break
            except requests.RequestException as exc:
                last_exc = exc
                if attempt < self.RETRIES - 1:
                    time.sleep(0.5 * 2**attempt)
        else:
            raise ProviderError(f"provider unreachable after {self.RETRIES} tries: {last_exc}")
        try:
            body = resp.json()
            text = body["text"]
        except (ValueError, KeyError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        prompt = request.flatten()
        self.calls.append(
            CallRecord(
                input_tokens=int(body.get("input_tokens", count_tokens(prompt))),
                output_tokens=int(body.get("output_tokens", count_tokens(text))),
                prompt_digest=request.digest(),
            )
        )
        return text
