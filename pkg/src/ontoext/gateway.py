"""Completion backends: a thin HTTP chat-completion client plus a
deterministic record/replay harness.

The live client speaks the common JSON chat-completion wire format
(POST {model, temperature, messages}) and takes the response text from the
first choice. Recording appends fingerprinted request/response pairs to a
line-delimited transcript; replay consumes that transcript in order and
fails loudly on any divergence, which is what makes pipeline runs
reproducible in CI.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx


class TransportError(RuntimeError):
    """Network failure or HTTP >= 400 from the completion endpoint."""


class ReplayExhausted(RuntimeError):
    """More requests were issued than the transcript holds."""


class ReplayMismatch(RuntimeError):
    def __init__(self, expected: str, got: str, position: int):
        super().__init__(
            f"replay mismatch at entry {position}: transcript has fingerprint "
            f"{expected}, request has {got}"
        )
        self.expected = expected
        self.got = got
        self.position = position


class TranscriptParseError(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"transcript line {line_number}: {reason}")
        self.line_number = line_number


@dataclass(frozen=True)
class PromptRequest:
    system_message: str
    user_message: str
    temperature: float = 1.0
    model_id: str = "gpt-3.5-turbo"

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range [0, 2]: {self.temperature}")

    def fingerprint(self) -> str:
        """Content hash over everything that shapes the completion."""
        payload = json.dumps(
            {
                "system": self.system_message,
                "user": self.user_message,
                "temperature": self.temperature,
                "model": self.model_id,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class Transcript:
    """Ordered (fingerprint, response) pairs from a recorded session."""

    entries: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


def record_transcript(transcript: Transcript, path: str | Path) -> None:
    """Write a transcript as one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for fingerprint, response in transcript.entries:
            fh.write(json.dumps({"fingerprint": fingerprint, "response": response},
                                ensure_ascii=False) + "\n")


def load_transcript(path: str | Path) -> Transcript:
    """Parse a line-delimited transcript file.

    Raises TranscriptParseError with the offending line number on any
    malformed or truncated line.
    """
    entries: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, 1):
            if line.strip() == "":
                continue
            if not line.endswith("\n"):
                raise TranscriptParseError(number, "truncated final line")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TranscriptParseError(number, f"invalid JSON: {exc.msg}") from exc
            if (
                not isinstance(record, dict)
                or not isinstance(record.get("fingerprint"), str)
                or not isinstance(record.get("response"), str)
            ):
                raise TranscriptParseError(number, "expected {fingerprint, response}")
            entries.append((record["fingerprint"], record["response"]))
    return Transcript(entries)


class Backend(Protocol):
    def complete(self, request: PromptRequest) -> str: ...


class HttpBackend:
    """Live chat-completion client.

    Credentials come from the environment (`credential_env`, default
    ONTOEXT_API_KEY) and never from config files. One retry with backoff on
    transport errors; the consensus layer tolerates runs lost beyond that.
    """

    def __init__(self, endpoint_url: str, credential_env: str = "ONTOEXT_API_KEY",
                 timeout: float = 60.0, retry_base_delay: float = 1.0):
        self.endpoint_url = endpoint_url
        self.credential_env = credential_env
        self.timeout = timeout
        self.retry_base_delay = retry_base_delay

    def complete(self, request: PromptRequest) -> str:
        body = {
            "model": request.model_id,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system_message},
                {"role": "user", "content": request.user_message},
            ],
        }
        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.credential_env)
        if credential:
            headers["Authorization"] = f"Bearer {credential}"

        last_error: Exception | None = None
        for attempt in range(2):
            try:
                response = httpx.post(self.endpoint_url, json=body,
                                      headers=headers, timeout=self.timeout)
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if response.status_code >= 400:
                    last_error = TransportError(
                        f"HTTP {response.status_code} from {self.endpoint_url}"
                    )
                else:
                    return self._extract_text(response)
            if attempt == 0:
                time.sleep(self.retry_base_delay * (2 ** attempt))
        raise TransportError(str(last_error)) from last_error

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc


class RecordingBackend:
    """Wraps a live backend and appends every exchange to a transcript file."""

    def __init__(self, inner: Backend, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def complete(self, request: PromptRequest) -> str:
        response = self.inner.complete(request)
        line = json.dumps(
            {"fingerprint": request.fingerprint(), "response": response},
            ensure_ascii=False,
        )
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        return response


class ReplayBackend:
    """Serves recorded responses in order; any drift is an error.

    Matching is by request fingerprint, so a cosmetic prompt or config
    change fails loudly instead of replaying stale answers.
    """

    def __init__(self, transcript: Transcript):
        self.transcript = transcript
        self._position = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayBackend":
        return cls(load_transcript(path))

    def complete(self, request: PromptRequest) -> str:
        with self._lock:
            if self._position >= len(self.transcript.entries):
                raise ReplayExhausted(
                    f"transcript exhausted after {self._position} entries"
                )
            expected, response = self.transcript.entries[self._position]
            got = request.fingerprint()
            if expected != got:
                raise ReplayMismatch(expected, got, self._position)
            self._position += 1
            return response
