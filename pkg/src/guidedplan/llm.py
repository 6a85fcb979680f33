"""Small blocking client for chat-completion style HTTP endpoints."""
from __future__ import annotations

import os
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import httpx

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4"


class LLMError(Exception):
    code = "llm-error"


class AuthenticationError(LLMError):
    code = "authentication"


class MalformedResponseError(LLMError):
    code = "malformed-response"


class TransportExhaustedError(LLMError):
    code = "transport-exhausted"

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class LlmConfig:
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_output_tokens: int = 2048
    request_timeout: float = 60.0
    max_retries: int = 3
    api_key: Optional[str] = field(default=None, repr=False)
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    trace: bool = False

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be > 0")

    @classmethod
    def from_env(cls, env=None, **overrides) -> "LlmConfig":
        env = os.environ if env is None else env
        values = dict(
            base_url=env.get("LLM_BASE_URL") or DEFAULT_BASE_URL,
            model=env.get("LLM_MODEL") or DEFAULT_MODEL,
            api_key=env.get("LLM_API_KEY") or None,
        )
        values.update(overrides)
        return cls(**values)


def _is_transient(status: int) -> bool:
    return status == 429 or 500 <= status < 600


class ChatClient:
    """Thread-safe: the only shared state is the transcript list, guarded by a lock."""

    def __init__(self, config: LlmConfig, transport: Optional[httpx.BaseTransport] = None,
                 sleep=time.sleep, rng: Optional[random.Random] = None):
        self.config = config
        self._transport = transport
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._lock = threading.Lock()
        self.transcripts: list[dict] = []
        self.last_retries = 0

    def _delay(self, attempt: int) -> float:
        cap = min(self.config.backoff_cap, self.config.backoff_base * 2 ** attempt)
        with self._lock:
            return cap / 2 + self._rng.uniform(0, cap / 2)

    def complete(self, prompt: str) -> str:
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        body = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_output_tokens,
        }
        last = "no request sent"
        retries = 0
        with httpx.Client(timeout=cfg.request_timeout, transport=self._transport) as http:
            for attempt in range(cfg.max_retries + 1):
                if attempt:
                    retries += 1
                    self._sleep(self._delay(attempt - 1))
                try:
                    resp = http.post(url, json=body, headers=headers)
                except (httpx.TimeoutException, httpx.TransportError) as e:
                    last = f"{type(e).__name__}: {e}"
                    continue
                if resp.status_code in (401, 403):
                    raise AuthenticationError(f"endpoint rejected credentials ({resp.status_code})")
                if _is_transient(resp.status_code):
                    last = f"HTTP {resp.status_code}"
                    continue
                if resp.status_code >= 400:
                    raise LLMError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                text = _first_text(resp)
                self.last_retries = retries
                if cfg.trace:
                    with self._lock:
                        self.transcripts.append({"request": body, "response": text,
                                                 "retries": retries, "chars": len(text)})
                return text
        self.last_retries = retries
        raise TransportExhaustedError(
            f"gave up after {cfg.max_retries + 1} attempts ({last})", cfg.max_retries + 1)


def _first_text(resp: httpx.Response) -> str:
    try:
        data = resp.json()
        text = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as e:
        raise MalformedResponseError(f"response has no choices[0].message.content ({e})") from e
    if not isinstance(text, str):
        raise MalformedResponseError("choices[0].message.content is not a string")
    return text


def complete(config: LlmConfig, prompt: str) -> str:
    return ChatClient(config).complete(prompt)
