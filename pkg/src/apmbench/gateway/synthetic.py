"""Deterministic offline stand-in for every model role.

Each role follows a small, documented law so downstream code can be tested
without a provider:

* rewriter: returns the neutral prompt verbatim followed by one style token
  per active attribute (``#very-verbose`` / ``#not-verbose``).
* generator/base: ``"Response to: <prompt>"``, plus a marker
  ``<<principle:+>>`` / ``<<principle:->>`` when the system prompt carries a
  style instruction. Without one, it adopts the majority marker among the
  preferred exemplars or preference notes in its context, if any.
* judge: the :class:`~apmbench.calibration.SyntheticJudge` model. The
  response's latent level on principle ``j`` is ``5.5 + response_sd * z``
  with ``z`` hashed from the marker-free text; a matching marker counts as
  an instruction to follow/avoid ``j``. Noise is hashed from the full call.
* summarizer: lists style tokens (style summary) or preferred/dispreferred
  markers (preference summary).
* embedder: unit-normalised bag of hashed Gaussian token vectors; style
  tokens and markers carry ``style_weight`` times the weight of other tokens.
"""
from __future__ import annotations

import re
from collections import Counter

import numpy as np

from ..calibration import SyntheticJudge
from ..catalog import Catalog, default_catalog
from ..core import MIDPOINT
from ..rng import text_seed
from .calls import ChatCall

MARKER_RE = re.compile(r"<<([^<>]+?):([+-])>>")
TRAIT_RE = re.compile(r"^- (.+?) \(([+-])\):", re.M)
TOKEN_RE = re.compile(r"<<[^<>]+?:[+-]>>|#[a-z0-9-]+|[a-z0-9]+")


def slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def style_token(name: str, sign: int) -> str:
    return f"#very-{slug(name)}" if sign > 0 else f"#not-{slug(name)}"


def marker(name: str, direction: int) -> str:
    return f"<<{name}:{'+' if direction > 0 else '-'}>>"


def strip_markers(text: str) -> str:
    return MARKER_RE.sub("", text).strip()


def parse_markers(text: str) -> list[tuple[str, int]]:
    return [(m.group(1), 1 if m.group(2) == "+" else -1) for m in MARKER_RE.finditer(text)]


def _normal(*parts) -> float:
    return float(np.random.default_rng(text_seed(*parts)).standard_normal())


def _section(text: str, head: str, stop: str | None = None) -> str:
    i = text.find(head)
    if i < 0:
        return ""
    body = text[i + len(head):]
    if stop:
        j = body.find(stop)
        if j >= 0:
            body = body[:j]
    return body.strip()


class SyntheticBackend:
    def __init__(self, catalog: Catalog | None = None, judge: SyntheticJudge | None = None, seed: int = 0,
                 response_sd: float = 1.0, embed_dim: int = 64, style_weight: float = 4.0):
        self.catalog = catalog or default_catalog()
        m = len(self.catalog.principles)
        self.judge = judge or SyntheticJudge.uniform(m, noise_sd=1.0, compliance_gain=2.0)
        if self.judge.m != m:
            raise ValueError(f"synthetic judge covers {self.judge.m} principles, catalog has {m}")
        self.seed = seed
        self.response_sd = response_sd
        self.embed_dim = embed_dim
        self.style_weight = style_weight

    # chat --------------------------------------------------------------
    def complete(self, call: ChatCall) -> str:
        handler = {
            "rewriter": self._rewrite,
            "generator": self._generate,
            "base": self._generate,
            "judge": self._judge,
            "summarizer": self._summarize,
        }.get(call.role)
        if handler is None:
            raise ValueError(f"synthetic backend has no chat law for role {call.role!r}")
        return handler(call)

    def _rewrite(self, call: ChatCall) -> str:
        prompt = _section(call.user, "Prompt to rewrite:\n", "\n\nReply with")
        tokens = [style_token(name, 1 if s == "+" else -1) for name, s in TRAIT_RE.findall(call.user)]
        return " ".join([prompt] + tokens)

    def _generate(self, call: ChatCall) -> str:
        style = None
        for line in call.system.splitlines():
            if line.startswith("Style instruction: "):
                parsed = self.catalog.parse_instruction(line[len("Style instruction: "):])
                if parsed is not None:
                    j, d = parsed
                    style = (self.catalog.principles[j].name, d)
        if style is None:
            votes: list[tuple[str, int]] = []
            for line in call.system.splitlines():
                if line.startswith("Preferred response: "):
                    votes += parse_markers(line)
                elif line.startswith("Note ") and "Prefers:" in line:
                    votes += parse_markers(_section(line, "Prefers:", "Dislikes:"))
            if votes:
                counts = Counter(votes)
                best = max(counts.values())
                style = next(v for v in votes if counts[v] == best)
        text = f"Response to: {strip_markers(call.user)}"
        return f"{text} {marker(*style)}" if style else text

    def judge_latent(self, response: str, j: int) -> float:
        return MIDPOINT + self.response_sd * _normal(self.seed, "intrinsic", strip_markers(response), j)

    def _judge(self, call: ChatCall) -> str:
        name = _section(call.user, "Principle: ", "\n")
        direction = _section(call.user, "Direction: ", "\n")
        response = _section(call.user, "Response:\n")
        j = self.catalog.principle_index(name)
        instruction = None
        for mname, d in parse_markers(response):
            if mname == name:
                instruction = (j, d)
        latent = np.full(self.judge.m, MIDPOINT)
        latent[j] = self.judge_latent(response, j)
        noise = np.zeros(self.judge.m)
        noise[j] = _normal(self.seed, "noise", call.system, call.user)
        if direction == "avoid":
            s = self.judge.score_avoid(latent, noise, instruction)[j]
        else:
            s = self.judge.score(latent, noise, instruction)[j]
        return str(int(s)) if self.judge.integer else f"{s:.4f}"

    def _summarize(self, call: ChatCall) -> str:
        if "Preferred response:" in call.user:
            pref, dis = [], []
            for line in call.user.splitlines():
                if line.startswith("Preferred response:"):
                    pref += [marker(*m) for m in parse_markers(line)]
                elif line.startswith("Dispreferred response:"):
                    dis += [marker(*m) for m in parse_markers(line)]
            fmt = lambda ms: " ".join(dict.fromkeys(ms)) or "nothing in particular"  # noqa: E731
            return f"Prefers: {fmt(pref)}. Dislikes: {fmt(dis)}."
        toks = Counter(t for t in TOKEN_RE.findall(call.user.lower()) if t.startswith("#"))
        if not toks:
            return "Style: neutral."
        ordered = sorted(toks, key=lambda t: (-toks[t], t))
        return "Style: " + " ".join(ordered) + "."

    # embeddings ----------------------------------------------------------
    def embed(self, text: str) -> list[float]:
        vec = np.zeros(self.embed_dim)
        for tok in TOKEN_RE.findall(text.lower()):
            w = self.style_weight if tok.startswith(("#", "<<")) else 1.0
            vec += w * np.random.default_rng(text_seed(self.seed, "tok", tok)).standard_normal(self.embed_dim)
        norm = np.linalg.norm(vec)
        if norm == 0:
            vec[0] = 1.0
            norm = 1.0
        return (vec / norm).tolist()
