from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..records import dumps

ROLES = ("generator", "base", "rewriter", "judge", "summarizer", "embedder")


@dataclass(frozen=True)
class ChatCall:
    role: str
    model: str
    system: str
    user: str
    temperature: float = 1.0
    top_p: float = 1.0
    max_tokens: int | None = None
    extra: tuple = field(default=())  # sorted (key, value) pairs passed through verbatim

    def payload(self) -> dict:
        """Request body in the chat-completions schema."""
        messages = []
        if self.system:
            messages.append({"role": "system", "content": self.system})
        messages.append({"role": "user", "content": self.user})
        body = {"model": self.model, "messages": messages, "temperature": self.temperature, "top_p": self.top_p}
        if self.max_tokens is not None:
            body["max_tokens"] = self.max_tokens
        for k, v in self.extra:
            body[k] = json.loads(v) if isinstance(v, str) and v[:1] in "[{" else v
        return body

    @property
    def cache_key(self) -> str:
        return content_hash({"kind": "chat", "endpoint": self.role, "body": self.payload()})


def content_hash(obj) -> str:
    return hashlib.sha256(dumps(obj).encode("utf-8")).hexdigest()


def embed_key(role: str, model: str, text: str) -> str:
    return content_hash({"kind": "embed", "endpoint": role, "model": model, "input": text})


def freeze_extra(extra: dict | None) -> tuple:
    if not extra:
        return ()
    return tuple(sorted((k, v if isinstance(v, (str, int, float, bool)) or v is None else dumps(v))
                        for k, v in extra.items()))
