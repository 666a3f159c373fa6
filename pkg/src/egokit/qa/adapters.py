"""Annotator adapters: the only place the QA builder talks to the outside world.

Wire format for the HTTP adapter: POST a JSON body
``{"system", "user", "temperature", "max_tokens"}``; the endpoint answers
with ``{"text": ..., "usage": {...}}``. A bearer token is read from the
``EGOKIT_ANNOTATOR_API_KEY`` environment variable when set.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

API_KEY_ENV = "EGOKIT_ANNOTATOR_API_KEY"


class AdapterError(RuntimeError):
    """The annotator did not produce a response; callers may retry."""


@dataclass(frozen=True)
class AnnotatorRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 0.0
    max_output: int = 1024

    def wire(self) -> dict:
        return {
            "system": self.system_prompt,
            "user": self.user_prompt,
            "temperature": self.temperature,
            "max_tokens": self.max_output,
        }


@dataclass(frozen=True)
class AnnotatorResponse:
    text: str
    usage: dict = field(default_factory=dict)
    latency_ms: float = 0.0


class Adapter(Protocol):
    def complete(self, request: AnnotatorRequest) -> AnnotatorResponse: ...


def prompt_key(user_prompt: str) -> str:
    return hashlib.sha256(user_prompt.encode("utf-8")).hexdigest()


class MockAdapter:
    """Serves canned responses from a JSON file mapping ``prompt_key(user)`` to text."""

    def __init__(self, responses: dict[str, str]):
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path) -> "MockAdapter":
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a JSON object of canned responses")
        return cls(data)

    def complete(self, request: AnnotatorRequest) -> AnnotatorResponse:
        key = prompt_key(request.user_prompt)
        if key not in self.responses:
            raise AdapterError(f"no canned response for prompt {key[:12]}")
        return AnnotatorResponse(self.responses[key])


class HttpAdapter:
    def __init__(self, url: str, timeout_s: float = 60.0, api_key: str | None = None):
        self.url = url
        self.timeout_s = timeout_s
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)

    def complete(self, request: AnnotatorRequest) -> AnnotatorResponse:
        body = json.dumps(request.wire()).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
        t0 = time.perf_counter()
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError, json.JSONDecodeError) as e:
            raise AdapterError(f"annotator request failed: {e}") from e
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise AdapterError("annotator reply has no 'text' field")
        return AnnotatorResponse(
            payload["text"], payload.get("usage") or {}, (time.perf_counter() - t0) * 1000
        )


def make_adapter(spec: str) -> Adapter:
    """Build an adapter from ``mock:<path>`` or ``http:<url>``."""
    kind, _, rest = spec.partition(":")
    if kind == "mock" and rest:
        return MockAdapter.from_file(rest)
    if kind in ("http", "https") and rest:
        # accept both "http:https://host/x" and a bare "http://host/x"
        url = spec if rest.startswith("//") else rest
        return HttpAdapter(url)
    raise ValueError(f"adapter must be mock:<path> or http:<url>, got {spec!r}")
