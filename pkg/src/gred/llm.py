"""Backend-agnostic chat-completion client with deterministic offline backends.

Three interchangeable backends:

  * ``RemoteBackend``  - one HTTP chat-completion call per request, bounded
    retry with exponential backoff, bounded in-flight concurrency.
  * ``ScriptedBackend`` - replies looked up by request digest or by declared
    pattern rules; misses are loud, never fabricated.
  * ``ReplayBackend``  - serves recorded responses from a JSONL cache and fails
    on a cache miss, so one paid run is reusable forever.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

from .prompts import ChatMessage, Role


class LlmError(RuntimeError):
    pass


class RemoteUnavailable(LlmError):
    pass


class RateLimited(LlmError):
    pass


class ScriptMiss(LlmError):
    pass


class ReplayMiss(LlmError):
    pass


class EmptyReply(LlmError):
    pass


@dataclass(frozen=True)
class GenerationParams:
    """Sampling parameters sent with every completion request.

    Defaults are the main pipeline settings; annotation generation uses
    :func:`annotation_params` (all penalties zero).
    """

    model_id: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    frequency_penalty: float = -0.5
    presence_penalty: float = -0.5


def annotation_params(model_id: str = "gpt-3.5-turbo") -> GenerationParams:
    return GenerationParams(model_id=model_id, temperature=0.0, frequency_penalty=0.0, presence_penalty=0.0)


@dataclass(frozen=True)
class CompletionResult:
    text: str
    backend: str
    latency: float
    attempts: int = 1


def request_digest(messages: Sequence[ChatMessage], params: GenerationParams) -> str:
    """Stable digest of (model, params, full message list); keys record/replay caches."""
    payload = {
        "model": params.model_id,
        "temperature": params.temperature,
        "frequency_penalty": params.frequency_penalty,
        "presence_penalty": params.presence_penalty,
        "messages": [{"role": m.role.value, "content": m.content} for m in messages],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _validate_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")
    for i, message in enumerate(messages):
        if message.role is Role.SYSTEM and i != 0:
            raise ValueError("system message must come first")


class ChatBackend(Protocol):
    mode: str

    def complete(self, messages: Sequence[ChatMessage], params: GenerationParams) -> CompletionResult: ...


# ------------------------------------------------------------------- scripted


def _echo_dvq(messages: Sequence[ChatMessage]) -> str | None:
    """Return the last DVQ-looking line of the final user message, if any."""
    last_user = next((m for m in reversed(messages) if m.role is Role.USER), None)
    if last_user is None:
        return None
    for line in reversed(last_user.content.splitlines()):
        candidate = line.strip()
        if candidate.startswith("A:"):
            candidate = candidate[2:].strip()
        candidate = candidate.lstrip("#").strip()
        if candidate.lower().startswith("visualize "):
            return candidate
    return None


@dataclass(frozen=True)
class ScriptRule:
    reply: str
    contains: str | None = None
    regex: str | None = None

    def matches(self, text: str) -> bool:
        if self.contains is not None:
            return self.contains in text
        if self.regex is not None:
            return re.search(self.regex, text) is not None
        return False


class ScriptedBackend:
    """Deterministic backend driven by digest lookups and ordered pattern rules.

    Script dict shape::

        {"replies": {"<digest>": "..."},
         "rules": [{"contains": "...", "reply": "..."}, {"regex": "...", "reply": "..."}],
         "fallback": "miss" | "echo_dvq" | {"reply": "..."}}
    """

    mode = "scripted"

    def __init__(
        self,
        rules: Sequence[ScriptRule] = (),
        replies: dict[str, str] | None = None,
        fallback: str | Callable[[Sequence[ChatMessage]], str | None] = "miss",
    ):
        self.rules = list(rules)
        self.replies = dict(replies or {})
        self.fallback = fallback

    @classmethod
    def from_dict(cls, raw: dict) -> "ScriptedBackend":
        rules = []
        for entry in raw.get("rules", []):
            rules.append(ScriptRule(entry["reply"], entry.get("contains"), entry.get("regex")))
        fallback = raw.get("fallback", "miss")
        if isinstance(fallback, dict):
            reply = fallback["reply"]
            fallback = lambda _messages: reply  # noqa: E731
        return cls(rules, raw.get("replies"), fallback)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ScriptedBackend":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, messages: Sequence[ChatMessage], params: GenerationParams) -> CompletionResult:
        _validate_messages(messages)
        started = time.perf_counter()
        digest = request_digest(messages, params)
        reply = self.replies.get(digest)
        if reply is None:
            text = "\n\n".join(m.content for m in messages)
            for rule in self.rules:
                if rule.matches(text):
                    reply = rule.reply
                    break
        if reply is None:
            if self.fallback == "echo_dvq":
                reply = _echo_dvq(messages)
            elif callable(self.fallback):
                reply = self.fallback(messages)
        if reply is None:
            raise ScriptMiss(f"no scripted reply for digest {digest[:12]}...")
        if not reply.strip():
            raise EmptyReply("scripted reply is empty")
        return CompletionResult(reply, self.mode, time.perf_counter() - started)


# --------------------------------------------------------------------- replay


class ReplayBackend:
    """Serves recorded responses; a cold cache is an error, never a fabrication."""

    mode = "replay"

    def __init__(self, cache_path: str | os.PathLike):
        self.cache_path = Path(cache_path)
        self._responses: dict[str, str] = {}
        if self.cache_path.exists():
            with open(self.cache_path, encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        record = json.loads(line)
                        self._responses[record["digest"]] = record["response_text"]

    def complete(self, messages: Sequence[ChatMessage], params: GenerationParams) -> CompletionResult:
        _validate_messages(messages)
        started = time.perf_counter()
        digest = request_digest(messages, params)
        reply = self._responses.get(digest)
        if reply is None:
            raise ReplayMiss(f"no recorded response for digest {digest[:12]}...")
        return CompletionResult(reply, self.mode, time.perf_counter() - started)


class RecordingBackend:
    """Wraps another backend and appends every successful reply to a replay cache."""

    def __init__(self, inner: ChatBackend, cache_path: str | os.PathLike):
        self.inner = inner
        self.mode = inner.mode
        self.cache_path = Path(cache_path)
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[ChatMessage], params: GenerationParams) -> CompletionResult:
        result = self.inner.complete(messages, params)
        record = {
            "digest": request_digest(messages, params),
            "response_text": result.text,
            "model_id": params.model_id,
        }
        with self._lock, open(self.cache_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return result


# --------------------------------------------------------------------- remote


class RemoteBackend:
    """HTTP chat-completion client for an OpenAI-style endpoint.

    The request body carries exactly the four generation-parameter fields plus
    the messages; the bearer credential comes from the configured env var.
    """

    mode = "remote"

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "GRED_API_KEY",
        timeout: float = 60.0,
        max_attempts: int = 3,
        max_in_flight: int = 4,
        backoff_base: float = 0.5,
        transport=None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        import httpx

        self.api_key_env = api_key_env
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._semaphore = threading.Semaphore(max_in_flight)
        self._client = httpx.Client(base_url=base_url, timeout=timeout, transport=transport)

    def complete(self, messages: Sequence[ChatMessage], params: GenerationParams) -> CompletionResult:
        import httpx

        _validate_messages(messages)
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise RemoteUnavailable(f"credential env var {self.api_key_env} is not set")
        body = {
            "model": params.model_id,
            "messages": [{"role": m.role.value, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "frequency_penalty": params.frequency_penalty,
            "presence_penalty": params.presence_penalty,
        }
        started = time.perf_counter()
        last_error: Exception | None = None
        rate_limited = False
        with self._semaphore:
            for attempt in range(1, self.max_attempts + 1):
                try:
                    response = self._client.post(
                        "/chat/completions",
                        json=body,
                        headers={"Authorization": f"Bearer {api_key}"},
                    )
                except httpx.HTTPError as exc:
                    last_error = exc
                    rate_limited = False
                else:
                    if response.status_code == 200:
                        try:
                            text = response.json()["choices"][0]["message"]["content"]
                        except (KeyError, IndexError, ValueError) as exc:
                            raise RemoteUnavailable(f"malformed completion response: {exc}") from exc
                        if not text or not text.strip():
                            raise EmptyReply("completion returned empty content")
                        return CompletionResult(
                            text, self.mode, time.perf_counter() - started, attempts=attempt
                        )
                    rate_limited = response.status_code == 429
                    if not rate_limited and response.status_code < 500:
                        raise RemoteUnavailable(f"HTTP {response.status_code}")
                    last_error = RemoteUnavailable(f"HTTP {response.status_code}")
                if attempt < self.max_attempts:
                    self._sleep(self.backoff_base * (2 ** (attempt - 1)))
        if rate_limited:
            raise RateLimited(f"rate limited after {self.max_attempts} attempts")
        raise RemoteUnavailable(f"completion failed after {self.max_attempts} attempts: {last_error}")
