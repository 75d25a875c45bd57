"""Remote provider clients plus scripted stand-ins for offline runs.

The completion client speaks the JSON-over-HTTP chat-completion wire format;
the entailment client is a single-endpoint JSON service.  Auth tokens come
from environment variables named in the config, never from the config file
itself.  Scripted clients give deterministic replies and an optional
append-only call log so tests and offline pipelines can count real calls.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from typing import Protocol, runtime_checkable

import httpx

from ..errors import ProviderError

logger = logging.getLogger(__name__)

RETRY_STATUS = {429, 500, 502, 503, 504}


@runtime_checkable
class CompletionClient(Protocol):
    def complete(self, prompt: str, *, temperature: float, seed: int) -> str: ...


@runtime_checkable
class EntailmentClient(Protocol):
    def entailment(self, premise: str, hypothesis: str) -> float: ...


def _auth_headers(auth_env: str | None) -> dict[str, str]:
    if not auth_env:
        return {}
    token = os.environ.get(auth_env)
    if not token:
        raise ProviderError(f"auth environment variable {auth_env!r} is not set")
    return {"Authorization": f"Bearer {token}"}


def _post_with_retries(
    url: str,
    payload: dict,
    headers: dict[str, str],
    *,
    timeout: float,
    max_retries: int,
    backoff: float,
) -> dict:
    last_error: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            resp = httpx.post(url, json=payload, headers=headers, timeout=timeout)
            if resp.status_code in RETRY_STATUS:
                last_error = ProviderError(f"HTTP {resp.status_code} from {url}")
            elif resp.status_code >= 400:
                raise ProviderError(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
            else:
                return resp.json()
        except (httpx.TransportError, json.JSONDecodeError) as exc:
            last_error = exc
        if attempt < max_retries:
            delay = backoff * (2**attempt)
            logger.warning("retrying %s in %.1fs (%s)", url, delay, last_error)
            time.sleep(delay)
    raise ProviderError(f"{url} failed after {max_retries + 1} attempts: {last_error}")


class HttpCompletionClient:
    """Chat-completion endpoint: POST {model, messages, temperature, seed}."""

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        auth_env: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        max_concurrency: int = 1,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.max_concurrency = max_concurrency

    def complete(self, prompt: str, *, temperature: float, seed: int) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "seed": seed,
        }
        data = _post_with_retries(
            f"{self.base_url}/chat/completions",
            payload,
            _auth_headers(self.auth_env),
            timeout=self.timeout,
            max_retries=self.max_retries,
            backoff=self.backoff,
        )
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {data!r}") from exc


class HttpEntailmentClient:
    """Single-endpoint service: {premise, hypothesis} -> {entailment: real}."""

    def __init__(
        self,
        url: str,
        *,
        auth_env: str | None = None,
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        max_concurrency: int = 1,
    ):
        self.url = url
        self.auth_env = auth_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.max_concurrency = max_concurrency

    def entailment(self, premise: str, hypothesis: str) -> float:
        data = _post_with_retries(
            self.url,
            {"premise": premise, "hypothesis": hypothesis},
            _auth_headers(self.auth_env),
            timeout=self.timeout,
            max_retries=self.max_retries,
            backoff=self.backoff,
        )
        value = data.get("entailment") if isinstance(data, dict) else None
        if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
            raise ProviderError(f"entailment response outside [0, 1]: {data!r}")
        return float(value)


class _CallLog:
    """Append-only call counter; one line per real provider call."""

    def __init__(self, path=None):
        self.path = path
        self.calls = 0
        self._lock = threading.Lock()

    def record(self, kind: str, detail: str) -> None:
        with self._lock:
            self.calls += 1
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"kind": kind, "detail": detail}) + "\n")


class ScriptedCompletionClient:
    """Deterministic offline completion client.

    ``rules`` is an ordered list of (substring, replies); the first rule whose
    substring occurs in the prompt answers with ``replies[seed % len(replies)]``,
    so distinct seeds walk the scripted replies reproducibly.  Prompts with no
    matching rule get ``default`` (or a stable synthesized string when that is
    None, which keeps sample generation usable with zero scripting).
    """

    max_concurrency = 1

    def __init__(
        self,
        rules: list[tuple[str, list[str]]] | None = None,
        *,
        default: str | None = None,
        call_log_path=None,
        fail_on: str | None = None,
    ):
        self.rules = [(needle, list(replies)) for needle, replies in (rules or [])]
        self.default = default
        self.fail_on = fail_on
        self.log = _CallLog(call_log_path)

    @property
    def calls(self) -> int:
        return self.log.calls

    def complete(self, prompt: str, *, temperature: float, seed: int) -> str:
        if self.fail_on is not None and self.fail_on in prompt:
            self.log.record("completion-error", self.fail_on)
            raise ProviderError(f"scripted failure triggered by {self.fail_on!r}")
        self.log.record("completion", f"seed={seed}")
        for needle, replies in self.rules:
            if needle in prompt:
                return replies[seed % len(replies)]
        if self.default is not None:
            return self.default
        return f"scripted reply {seed} for: {prompt[:40]}"


class ScriptedEntailmentClient:
    """Deterministic offline entailment client (fixed value or rules)."""

    max_concurrency = 1

    def __init__(
        self,
        value: float = 0.5,
        *,
        rules: list[tuple[str, float]] | None = None,
        call_log_path=None,
        fail_on: str | None = None,
    ):
        self.value = value
        self.rules = list(rules or [])
        self.fail_on = fail_on
        self.log = _CallLog(call_log_path)

    @property
    def calls(self) -> int:
        return self.log.calls

    def entailment(self, premise: str, hypothesis: str) -> float:
        if self.fail_on is not None and self.fail_on in hypothesis:
            self.log.record("entailment-error", self.fail_on)
            raise ProviderError(f"scripted failure triggered by {self.fail_on!r}")
        self.log.record("entailment", hypothesis[:40])
        for needle, value in self.rules:
            if needle in hypothesis or needle in premise:
                return value
        return self.value


def completion_client_from_config(cfg: dict) -> CompletionClient:
    kind = cfg.get("kind")
    if kind == "http":
        return HttpCompletionClient(
            base_url=cfg["base_url"],
            model=cfg["model"],
            auth_env=cfg.get("auth_env"),
            timeout=cfg.get("timeout", 60.0),
            max_retries=cfg.get("max_retries", 3),
            backoff=cfg.get("backoff", 0.5),
            max_concurrency=cfg.get("max_concurrency", 1),
        )
    if kind == "scripted":
        rules = [(r["contains"], r["replies"]) for r in cfg.get("rules", [])]
        return ScriptedCompletionClient(
            rules,
            default=cfg.get("default"),
            call_log_path=cfg.get("call_log"),
            fail_on=cfg.get("fail_on"),
        )
    raise ValueError(f"unknown completion client kind {kind!r}")


def entailment_client_from_config(cfg: dict) -> EntailmentClient:
    kind = cfg.get("kind")
    if kind == "http":
        return HttpEntailmentClient(
            url=cfg["url"],
            auth_env=cfg.get("auth_env"),
            timeout=cfg.get("timeout", 30.0),
            max_retries=cfg.get("max_retries", 3),
            backoff=cfg.get("backoff", 0.5),
            max_concurrency=cfg.get("max_concurrency", 1),
        )
    if kind == "scripted":
        rules = [(r["contains"], r["value"]) for r in cfg.get("rules", [])]
        return ScriptedEntailmentClient(
            cfg.get("value", 0.5),
            rules=rules,
            call_log_path=cfg.get("call_log"),
            fail_on=cfg.get("fail_on"),
        )
    raise ValueError(f"unknown entailment client kind {kind!r}")
