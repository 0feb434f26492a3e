"""Chat-completion backends: a live OpenAI-compatible HTTP client and a
scripted replay backend for deterministic tests, plus the transcript log."""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import requests

from .errors import BackendUnavailableError, ConfigurationError, FixtureError

DEFAULT_API_KEY_ENV = "COGMCTS_API_KEY"

# Generation wants diversity, analysis wants stability.
GENERATION_TEMPERATURE = 1.0
COGNITION_TEMPERATURE = 0.2


@dataclass
class ChatRequest:
    user_text: str
    system_text: str = "You are an expert designer of optimization heuristics."
    temperature: float = GENERATION_TEMPERATURE
    max_tokens: int = 2048
    tag: str = ""

    def __post_init__(self):
        if not self.user_text:
            raise ConfigurationError("user_text must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigurationError("temperature outside [0, 2]")

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.system_text.encode())
        h.update(b"\x00")
        h.update(self.user_text.encode())
        return h.hexdigest()


@dataclass
class BackendConfig:
    kind: str = "scripted"  # live | scripted
    endpoint: str = ""
    model_name: str = ""
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout_s: float = 60.0
    max_retries: int = 3
    script_path: Optional[str] = None

    def validate(self) -> None:
        if self.kind == "live":
            if not self.endpoint or not self.model_name:
                raise ConfigurationError("live backend requires endpoint and model_name")
        elif self.kind == "scripted":
            if not self.script_path:
                raise ConfigurationError("scripted backend requires script_path")
        else:
            raise ConfigurationError(f"unknown backend kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "endpoint": self.endpoint,
                "model_name": self.model_name, "api_key_env": self.api_key_env,
                "timeout_s": self.timeout_s, "max_retries": self.max_retries,
                "script_path": self.script_path}

    @classmethod
    def from_dict(cls, doc: dict) -> "BackendConfig":
        return cls(**doc)


class TranscriptLog:
    """Append-only call log serialized through a single writer lock."""

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        with self._lock:
            self.records.append(record)
            if self.path:
                with self.path.open("a") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")

    def tags(self) -> list[str]:
        with self._lock:
            return [r["tag"] for r in self.records]


class ScriptedBackend:
    """Replays canned responses keyed by tag + sequence number.

    Keying by tag (not prompt text) keeps fixtures valid across
    prompt-template edits.
    """

    kind = "scripted"

    def __init__(self, entries: list[dict], transcript: Optional[TranscriptLog] = None):
        self._by_tag: dict[str, list[str]] = {}
        for entry in entries:
            self._by_tag.setdefault(entry["tag"], []).append(entry["text"])
        self._cursor: dict[str, int] = {tag: 0 for tag in self._by_tag}
        self.transcript = transcript or TranscriptLog()

    @classmethod
    def from_path(cls, path, transcript=None) -> "ScriptedBackend":
        entries = json.loads(Path(path).read_text())
        return cls(entries, transcript)

    def chat(self, req: ChatRequest) -> str:
        start = time.monotonic()
        queue = self._by_tag.get(req.tag, [])
        cursor = self._cursor.get(req.tag, 0)
        if cursor >= len(queue):
            self.transcript.append({"tag": req.tag, "request": req.digest(),
                                    "outcome": "fixture-error",
                                    "latency_s": time.monotonic() - start})
            raise FixtureError(f"script exhausted for tag {req.tag!r}")
        self._cursor[req.tag] = cursor + 1
        text = queue[cursor]
        self.transcript.append({"tag": req.tag, "request": req.digest(),
                                "outcome": "ok",
                                "latency_s": time.monotonic() - start})
        return text

    # Checkpoint support: replay position per tag.
    def state(self) -> dict:
        return dict(self._cursor)

    def restore(self, state: dict) -> None:
        self._cursor = {tag: int(pos) for tag, pos in state.items()}


class LiveBackend:
    """OpenAI-compatible chat-completions client with retry/backoff.

    The API key is read only from the configured environment variable,
    never from config files.
    """

    kind = "live"

    def __init__(self, cfg: BackendConfig, transcript: Optional[TranscriptLog] = None,
                 session: Optional[requests.Session] = None,
                 sleep=time.sleep, rng: Optional[random.Random] = None):
        cfg.validate()
        self.cfg = cfg
        self.transcript = transcript or TranscriptLog()
        self._session = session or requests.Session()
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._semaphore = threading.Semaphore(4)
        if cfg.api_key_env not in os.environ:
            raise ConfigurationError(
                f"API key environment variable {cfg.api_key_env} is not set")

    def chat(self, req: ChatRequest) -> str:
        url = self.cfg.endpoint.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.cfg.model_name,
            "messages": [
                {"role": "system", "content": req.system_text},
                {"role": "user", "content": req.user_text},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        headers = {"Authorization": f"Bearer {os.environ[self.cfg.api_key_env]}"}
        start = time.monotonic()
        last_error = None
        with self._semaphore:
            for attempt in range(self.cfg.max_retries + 1):
                if attempt:
                    backoff = (2 ** (attempt - 1)) * (1.0 + self._rng.random() * 0.25)
                    self._sleep(backoff)
                try:
                    resp = self._session.post(url, json=payload, headers=headers,
                                              timeout=self.cfg.timeout_s)
                except requests.RequestException as exc:
                    last_error = f"transport: {exc}"
                    continue
                if resp.status_code == 200:
                    text = resp.json()["choices"][0]["message"]["content"]
                    self._log(req, "ok", start)
                    return text
                if resp.status_code >= 500 or resp.status_code == 429:
                    last_error = f"http {resp.status_code}"
                    continue
                # Other 4xx: a retry cannot help, fail fast with the body.
                self._log(req, f"http-{resp.status_code}", start)
                raise BackendUnavailableError(
                    f"backend rejected request ({resp.status_code}): {resp.text}")
        self._log(req, "retries-exhausted", start)
        raise BackendUnavailableError(f"retries exhausted: {last_error}")

    def _log(self, req: ChatRequest, outcome: str, start: float) -> None:
        self.transcript.append({"tag": req.tag, "request": req.digest(),
                                "outcome": outcome,
                                "latency_s": time.monotonic() - start})


def make_backend(cfg: BackendConfig, transcript: Optional[TranscriptLog] = None):
    cfg.validate()
    if cfg.kind == "scripted":
        return ScriptedBackend.from_path(cfg.script_path, transcript)
    return LiveBackend(cfg, transcript)
