"""The single entry point for model calls: caching, bounded concurrency, judge parsing."""
from __future__ import annotations

import logging
import re
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..catalog import Catalog, Templates, default_catalog, default_templates
from ..errors import ContentError, GatewayError, InvalidConfigError, JudgeParseError
from .cache import DiskCache
from .calls import ChatCall, embed_key, freeze_extra
from .http import EndpointConfig

log = logging.getLogger(__name__)

SCORE_RE = re.compile(r"(?<![\d.])(10|[1-9])(?![\d.])")
JUDGE_RETRIES = 3


def parse_score(text: str) -> int | None:
    """First standalone integer in 1..10, or None."""
    m = SCORE_RE.search(text or "")
    return int(m.group(1)) if m else None


@dataclass
class JudgeVerdict:
    principle: int
    direction: int  # +1 follow, -1 avoid
    raw_text: str
    score: int
    attempts: int


@dataclass
class _Limiter:
    cap: int
    sem: threading.BoundedSemaphore = field(init=False)
    inflight: int = 0
    max_inflight: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.sem = threading.BoundedSemaphore(self.cap)

    def __enter__(self):
        self.sem.acquire()
        with self.lock:
            self.inflight += 1
            self.max_inflight = max(self.max_inflight, self.inflight)

    def __exit__(self, *exc):
        with self.lock:
            self.inflight -= 1
        self.sem.release()


class Gateway:
    """Routes calls by role to a backend, memoising every result in ``cache``.

    ``backends`` maps role -> object with ``complete(call)`` and/or
    ``embed(text)``. Role ``"base"`` falls back to ``"generator"``.
    """

    def __init__(self, backends: dict, configs: dict | None = None, cache: DiskCache | None = None,
                 catalog: Catalog | None = None, templates: Templates | None = None, max_workers: int = 8,
                 judge_retries: int = JUDGE_RETRIES):
        self.backends = dict(backends)
        self.configs = {r: c for r, c in (configs or {}).items()}
        self.cache = cache
        self.catalog = catalog or default_catalog()
        self.templates = templates or default_templates()
        self.max_workers = max_workers
        self.judge_retries = judge_retries
        self.counters: Counter = Counter()
        self._limiters: dict[str, _Limiter] = {}
        self._lock = threading.Lock()

    # plumbing ------------------------------------------------------------
    def _resolve(self, role: str) -> str:
        if role in self.backends:
            return role
        if role == "base" and "generator" in self.backends:
            return "generator"
        raise InvalidConfigError(f"no backend configured for role {role!r}")

    def config(self, role: str) -> EndpointConfig:
        role = self._resolve(role)
        return self.configs.get(role) or EndpointConfig(role=role, model=f"synthetic-{role}")

    def limiter(self, role: str) -> _Limiter:
        role = self._resolve(role)
        with self._lock:
            if role not in self._limiters:
                self._limiters[role] = _Limiter(max(1, self.config(role).concurrency))
            return self._limiters[role]

    def max_inflight(self, role: str) -> int:
        return self.limiter(role).max_inflight

    def _count(self, name: str):
        with self._lock:
            self.counters[name] += 1

    @property
    def network_calls(self) -> int:
        return sum(v for k, v in self.counters.items() if k.startswith("network:"))

    def make_call(self, role: str, system: str, user: str, **overrides) -> ChatCall:
        cfg = self.config(role)
        return ChatCall(role=role, model=cfg.model, system=system, user=user,
                        temperature=overrides.get("temperature", cfg.temperature),
                        top_p=overrides.get("top_p", cfg.top_p),
                        max_tokens=overrides.get("max_tokens", cfg.max_tokens),
                        extra=freeze_extra(cfg.extra))

    # chat ----------------------------------------------------------------
    def complete(self, call: ChatCall) -> str:
        key = call.cache_key
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                self._count("cache_hits")
                return hit
        role = self._resolve(call.role)
        with self.limiter(role):
            self._count(f"network:{role}")
            text = self.backends[role].complete(call)
        if not isinstance(text, str) or not text.strip():
            raise ContentError(f"{role}: empty completion")
        if self.cache is not None:
            self.cache.put(key, text, request=call.payload())
        return text

    def map(self, fn, items) -> list:
        """Apply ``fn`` concurrently; results in input order. The first error is re-raised after all finish."""
        items = list(items)
        if len(items) <= 1 or self.max_workers <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [pool.submit(fn, x) for x in items]
            results, first_err = [], None
            for f in futures:
                try:
                    results.append(f.result())
                except Exception as exc:  # collected so every call completes or errors
                    results.append(None)
                    first_err = first_err or exc
        if first_err is not None:
            raise first_err
        return results

    def complete_many(self, calls) -> list[str]:
        return self.map(self.complete, calls)

    # embeddings ----------------------------------------------------------
    def embed(self, text: str, role: str = "embedder") -> np.ndarray:
        if not text:
            raise InvalidConfigError("cannot embed empty text")
        cfg = self.config(role)
        key = embed_key(role, cfg.model, text)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                self._count("cache_hits")
                return np.asarray(hit, dtype=np.float64)
        r = self._resolve(role)
        with self.limiter(r):
            self._count(f"network:{r}")
            vec = self.backends[r].embed(text)
        arr = np.asarray(vec, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)) or np.linalg.norm(arr) == 0:
            raise ContentError(f"{r}: degenerate embedding")
        if self.cache is not None:
            self.cache.put(key, arr.tolist(), request={"model": cfg.model, "input": text})
        return arr

    def embed_many(self, texts) -> list[np.ndarray]:
        return self.map(self.embed, texts)

    # judging -------------------------------------------------------------
    def judge_call(self, response_text: str, principle: int, direction: int, attempt: int = 1) -> ChatCall:
        p = self.catalog.principles[principle]
        question = self.templates.get("judge_question_follow" if direction > 0 else "judge_question_avoid")
        user = self.templates.render("judge_user", name=p.name, description=p.description,
                                     direction="follow" if direction > 0 else "avoid",
                                     question=question, response=response_text)
        if attempt > 1:
            user += f"\n\n(Attempt {attempt}: your previous reply had no usable score. Reply with one integer from 1 to 10.)"
        return self.make_call("judge", self.templates.get("judge_system"), user)

    def judge_principle(self, response_text: str, principle: int, direction: int = 1) -> JudgeVerdict:
        if not 0 <= principle < len(self.catalog.principles):
            raise InvalidConfigError(f"principle index {principle} not in catalog")
        raw = ""
        for attempt in range(1, self.judge_retries + 1):
            raw = self.complete(self.judge_call(response_text, principle, direction, attempt))
            score = parse_score(raw)
            if score is not None:
                return JudgeVerdict(principle, 1 if direction > 0 else -1, raw, score, attempt)
            log.info("judge reply unparseable (attempt %d): %r", attempt, raw[:80])
        raise JudgeParseError(f"no score after {self.judge_retries} attempts", raw_text=raw)

    def judge_scores(self, response_text: str, principles=None, direction: int = 1) -> np.ndarray:
        """Follow-direction scores of one response on every (or the given) principle."""
        idx = range(len(self.catalog.principles)) if principles is None else principles
        verdicts = self.map(lambda j: self.judge_principle(response_text, j, direction), idx)
        return np.array([v.score for v in verdicts], dtype=np.float64)


def build_gateway(configs: dict, cache_dir=None, synthetic=None, **kw) -> Gateway:
    """Gateway over HTTP endpoints (``configs``: role -> EndpointConfig) or a synthetic backend for every role."""
    from .http import OpenAIBackend

    if synthetic is not None:
        backends = {r: synthetic for r in ("generator", "base", "rewriter", "judge", "summarizer", "embedder")}
    else:
        if not configs:
            raise GatewayError("no endpoints configured")
        backends = {r: OpenAIBackend(c) for r, c in configs.items()}
    cache = DiskCache(cache_dir) if cache_dir is not None else None
    return Gateway(backends, configs=configs, cache=cache, **kw)
