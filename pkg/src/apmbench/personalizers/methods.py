"""Response generation for each method, plus the training-side pair and context builders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import reward_from_preference
from ..errors import EmptyInputError, InvalidConfigError, NoPreferenceError
from .retrieval import Neighbor


@dataclass(frozen=True)
class StyleInstruction:
    principle: int
    direction: int
    text: str
    degenerate: bool = False


@dataclass(frozen=True)
class Candidate:
    principle: int
    direction: int
    text: str


@dataclass
class PreferencePair:
    prompt: str
    preferred: str
    dispreferred: str
    scores: list
    best: int
    worst: int
    degenerate: bool = False

    def to_record(self) -> dict:
        return {"prompt": self.prompt, "preferred": self.preferred, "dispreferred": self.dispreferred,
                "scores": list(self.scores), "best": self.best, "worst": self.worst, "degenerate": self.degenerate}

    @classmethod
    def from_record(cls, rec: dict) -> "PreferencePair":
        return cls(**rec)


def instruction_for(catalog, j: int, d: int, degenerate: bool = False) -> StyleInstruction:
    return StyleInstruction(j, d, catalog.principles[j].instruction(d), degenerate)


def generation_call(gateway, prompt: str, instruction: StyleInstruction | None = None, context: str | None = None,
                    role: str = "base"):
    t = gateway.templates
    parts = [t.get("generate_system")]
    if context:
        parts.append(context)
    if instruction is not None:
        parts.append(t.render("style_instruction", instruction=instruction.text))
    return gateway.make_call(role, "\n\n".join(parts), prompt)


def generate(gateway, prompt: str, instruction=None, context=None, role: str = "base") -> str:
    return gateway.complete(generation_call(gateway, prompt, instruction, context, role)).strip()


def generate_candidates(gateway, prompt: str, m: int | None = None, role: str = "generator") -> list[Candidate]:
    """One follow and one avoid response per principle, ordered ``(1,+), (1,-), (2,+), ...``."""
    m = len(gateway.catalog.principles) if m is None else m
    if m < 1:
        raise InvalidConfigError("need at least one principle")
    specs = [(j, d) for j in range(m) for d in (1, -1)]
    texts = gateway.map(lambda s: generate(gateway, prompt, instruction_for(gateway.catalog, *s), role=role), specs)
    return [Candidate(j, d, t) for (j, d), t in zip(specs, texts)]


def judge_vector(gateway, response: str, m: int | None = None) -> np.ndarray:
    """Follow-direction judge scores of ``response`` on the first ``m`` principles."""
    m = len(gateway.catalog.principles) if m is None else m
    return gateway.judge_scores(response, range(m))


def build_preference_pair(prompt: str, candidates, rewards) -> PreferencePair:
    """Best and worst candidate by reward; ties go to the earlier candidate."""
    texts = [c.text if isinstance(c, Candidate) else str(c) for c in candidates]
    r = np.asarray(rewards, dtype=np.float64)
    if len(texts) < 2 or r.shape != (len(texts),):
        raise InvalidConfigError("need at least two scored candidates")
    best = int(np.argmax(r))
    rest = [i for i in range(len(texts)) if i != best]
    worst = min(rest, key=lambda i: (r[i], i))
    return PreferencePair(prompt, texts[best], texts[worst], r.tolist(), best, worst,
                          degenerate=bool(np.all(r == r[0])))


def candidate_rewards(p, candidate_scores) -> np.ndarray:
    """Reward of each candidate (rows of judge scores) under preference ``p``."""
    return np.array([reward_from_preference(p, s) for s in candidate_scores])


def oracle_route(p, catalog) -> StyleInstruction:
    """The user's true strongest principle and its sign."""
    p = np.asarray(p, dtype=np.float64)
    if not np.any(p):
        raise NoPreferenceError("preference vector is zero")
    j = int(np.argmax(np.abs(p)))
    return instruction_for(catalog, j, 1 if p[j] > 0 else -1)


def route(features, router, catalog) -> StyleInstruction:
    label = router.predict(features)[0]
    return instruction_for(catalog, label.principle, label.direction, label.degenerate)


def build_context(neighbors: list[Neighbor], variant: str, templates) -> str | None:
    """Render neighbor payloads into a generation context; None for an empty neighbor list.

    Exemplar payloads are lists of :class:`PreferencePair`; summary payloads
    are preference-summary strings.
    """
    if not neighbors:
        return None
    if variant == "exemplar":
        blocks, idx = [templates.get("context_header_exemplar")], 0
        for nb in neighbors:
            if not nb.payload:
                raise EmptyInputError(f"neighbor {nb.user_id} has no exemplar pairs")
            for pair in nb.payload:
                idx += 1
                blocks.append(templates.render("context_exemplar", index=idx, prompt=pair.prompt,
                                               preferred=pair.preferred, dispreferred=pair.dispreferred))
        return "\n\n".join(blocks)
    if variant == "summary":
        lines = [templates.get("context_header_summary")]
        for i, nb in enumerate(neighbors, 1):
            if not nb.payload:
                raise EmptyInputError(f"neighbor {nb.user_id} has no preference summary")
            lines.append(templates.render("context_summary", index=i, summary=" ".join(str(nb.payload).split())))
        return "\n".join(lines)
    raise InvalidConfigError(f"unknown context variant {variant!r}")


def style_summary(gateway, prompts) -> str:
    t = gateway.templates
    body = "\n".join(f"- {x}" for x in prompts)
    return gateway.complete(gateway.make_call("summarizer", t.get("summarize_system"),
                                              t.render("summarize_style", prompts=body))).strip()


def preference_summary(gateway, pairs) -> str:
    t = gateway.templates
    body = "\n\n".join(f"Pair {i}\nPreferred response: {p.preferred}\nDispreferred response: {p.dispreferred}"
                       for i, p in enumerate(pairs, 1))
    return gateway.complete(gateway.make_call("summarizer", t.get("summarize_system"),
                                              t.render("summarize_preference", pairs=body))).strip()
