"""OpenAI-compatible chat-completions / embeddings client with retry and backoff."""
from __future__ import annotations

import logging
import os
import random
import time
from dataclasses import dataclass, field

import httpx

from ..errors import ContentError, TransportError
from .calls import ChatCall

log = logging.getLogger(__name__)

RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


@dataclass
class EndpointConfig:
    role: str
    base_url: str = ""
    model: str = ""
    api_key_env: str = "OPENAI_API_KEY"
    concurrency: int = 4
    max_retries: int = 5
    backoff_base: float = 1.0
    backoff_max: float = 30.0
    timeout: float = 120.0
    temperature: float = 1.0
    top_p: float = 1.0
    max_tokens: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def api_key(self) -> str:
        return os.environ.get(self.api_key_env, "") if self.api_key_env else ""


class OpenAIBackend:
    """Thin synchronous client; thread-safe (httpx.Client is)."""

    def __init__(self, config: EndpointConfig, transport: httpx.BaseTransport | None = None,
                 sleep=time.sleep):
        self.config = config
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self.client = httpx.Client(base_url=config.base_url.rstrip("/"), headers=headers,
                                   timeout=config.timeout, transport=transport)
        self._sleep = sleep
        self.retries = 0

    def _post(self, path: str, body: dict) -> dict:
        cfg = self.config
        last = None
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = self.client.post(path, json=body)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code < 400:
                    return resp.json()
                if resp.status_code not in RETRY_STATUS:
                    raise TransportError(f"{cfg.role}: HTTP {resp.status_code}: {resp.text[:300]}")
                last = f"HTTP {resp.status_code}"
            if attempt == cfg.max_retries:
                break
            self.retries += 1
            delay = min(cfg.backoff_max, cfg.backoff_base * 2 ** attempt) * (0.5 + random.random() / 2)
            log.warning("%s: %s, retry %d/%d in %.2fs", cfg.role, last, attempt + 1, cfg.max_retries, delay)
            self._sleep(delay)
        raise TransportError(f"{cfg.role}: retries exhausted after {cfg.max_retries} attempts ({last})")

    def complete(self, call: ChatCall) -> str:
        data = self._post("/chat/completions", call.payload())
        try:
            choice = data["choices"][0]
            text = choice["message"].get("content")
        except (KeyError, IndexError, TypeError, AttributeError):
            raise ContentError(f"{call.role}: malformed completion payload") from None
        if not text or not text.strip():
            reason = choice.get("finish_reason") if isinstance(choice, dict) else None
            raise ContentError(f"{call.role}: empty completion (finish_reason={reason})")
        return text

    def embed(self, text: str) -> list[float]:
        data = self._post("/embeddings", {"model": self.config.model, "input": text})
        try:
            vec = data["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError):
            raise ContentError(f"{self.config.role}: malformed embedding payload") from None
        if not vec:
            raise ContentError(f"{self.config.role}: empty embedding")
        return [float(x) for x in vec]

    def close(self):
        self.client.close()
