"""Synthetic user population: attribute vectors, styled prompt histories, bigram diagnostics."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .catalog import Catalog
from .core import AttributeVector, sample_attribute_vector
from .errors import EmptyInputError, InvalidConfigError
from .records import read_records, write_records
from .rng import derive_seed, make_rng

SPLITS = ("train", "test")


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    attributes: AttributeVector
    history: tuple  # ((neutral, rewritten), ...)
    split: str
    query: str  # held-out neutral prompt the methods answer at test time

    def __post_init__(self):
        if self.split not in SPLITS:
            raise InvalidConfigError(f"unknown split {self.split!r}")
        if any(not rewritten.strip() for _, rewritten in self.history):
            raise InvalidConfigError(f"user {self.user_id}: empty rewritten prompt")

    @property
    def prompts(self) -> list[str]:
        """The user-authored (rewritten) prompts, in order."""
        return [r for _, r in self.history]

    def history_text(self) -> str:
        return "\n".join(self.prompts)

    def to_record(self) -> dict:
        return {"user_id": self.user_id, "split": self.split, "attributes": self.attributes.to_record(),
                "history": [list(h) for h in self.history], "query": self.query}

    @classmethod
    def from_record(cls, rec: dict) -> "UserRecord":
        return cls(rec["user_id"], AttributeVector.from_record(rec["attributes"]),
                   tuple(tuple(h) for h in rec["history"]), rec["split"], rec["query"])


def read_prompts(path=None) -> list[str]:
    """One prompt per nonblank line; the bundled corpus when ``path`` is None."""
    if path is None:
        text = resources.files("apmbench").joinpath("assets/prompts.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    prompts = [line.strip() for line in text.splitlines() if line.strip()]
    if not prompts:
        raise EmptyInputError("prompt corpus is empty")
    return prompts


def rewrite_call(gateway, neutral_prompt: str, a: AttributeVector, catalog: Catalog):
    traits = "\n".join(f"- {catalog.attributes[i].name} ({'+' if s > 0 else '-'}): {catalog.attributes[i].pole(s)}"
                       for i, s in a.active())
    t = gateway.templates
    return gateway.make_call("rewriter", t.get("rewrite_system"),
                             t.render("rewrite_user", traits=traits, prompt=neutral_prompt))


def rewrite_prompt(gateway, neutral_prompt: str, a: AttributeVector, catalog: Catalog | None = None) -> str:
    """Restyle ``neutral_prompt`` to the user's active attribute poles. All-zero users pass through."""
    if a.active_count == 0:
        return neutral_prompt
    catalog = catalog or gateway.catalog
    if a.n > len(catalog.attributes):
        raise InvalidConfigError(f"attribute vector has {a.n} entries, catalog {len(catalog.attributes)}")
    return gateway.complete(rewrite_call(gateway, neutral_prompt, a, catalog)).strip()


def build_population(n_train: int, n_test: int, n: int, k: int, turns: int, prompts, seed: int,
                     gateway, catalog: Catalog | None = None) -> list[UserRecord]:
    """Sample users, draw ``turns`` history prompts plus one query per user, and rewrite the history."""
    if n_train < 0 or n_test < 0 or turns < 1:
        raise InvalidConfigError("need n_train, n_test >= 0 and turns >= 1")
    prompts = list(prompts)
    if len(prompts) < turns + 1:
        raise InvalidConfigError(f"prompt source has {len(prompts)} prompts, each user needs {turns + 1}")
    catalog = catalog or gateway.catalog
    plan = []
    for idx in range(n_train + n_test):
        split = "train" if idx < n_train else "test"
        uid = f"{split}-{idx if split == 'train' else idx - n_train:05d}"
        a = sample_attribute_vector(n, k, derive_seed(seed, "user", uid))
        drawn = make_rng(seed, "prompts", uid).choice(len(prompts), size=turns + 1, replace=False)
        plan.append((uid, split, a, [prompts[i] for i in drawn]))

    jobs = [(a, x) for _, _, a, picks in plan for x in picks[:turns]]
    rewritten = gateway.map(lambda job: rewrite_prompt(gateway, job[1], job[0], catalog), jobs)
    users, pos = [], 0
    for uid, split, a, picks in plan:
        history = tuple(zip(picks[:turns], rewritten[pos:pos + turns]))
        pos += turns
        users.append(UserRecord(uid, a, history, split, picks[turns]))
    return users


def save_population(path, users) -> int:
    return write_records(path, (u.to_record() for u in users))


def load_population(path) -> list[UserRecord]:
    return [UserRecord.from_record(r) for r in read_records(path)]


# -- bigram KL ---------------------------------------------------------------

WORD_RE = re.compile(r"[a-z0-9]+")


def bigrams(text: str) -> list[tuple[str, str]]:
    words = WORD_RE.findall(text.lower())
    return list(zip(words, words[1:]))


@dataclass
class BigramEntry:
    bigram: str
    kl_contribution: float
    frequency_ratio: float
    count: int


@dataclass
class BigramReport:
    entries: dict = field(default_factory=dict)  # (attribute, side) -> [BigramEntry]

    def table(self, top: int = 5) -> str:
        lines = ["attribute\tside\trank\tbigram\tkl\tratio"]
        for (attr, side), rows in sorted(self.entries.items()):
            for r, e in enumerate(rows[:top], 1):
                lines.append(f"{attr}\t{side}\t{r}\t{e.bigram}\t{e.kl_contribution:.4f}\t{e.frequency_ratio:.2f}")
        return "\n".join(lines) + "\n"


def _distribution(counts: Counter, vocab: list, alpha: float) -> dict:
    total = sum(counts.values()) + alpha * len(vocab)
    return {g: (counts.get(g, 0) + alpha) / total for g in vocab}


def bigram_kl_report(groups: dict, min_count: int = 2, smoothing: float = 0.5) -> BigramReport:
    """Rank bigrams by ``P(g|side) log(P(g|side)/P(g|rest))``.

    ``groups`` maps ``(attribute, side)`` to a list of texts. The comparison
    corpus for a group is every other group except both sides of the same
    attribute. Candidate bigrams must appear at least ``min_count`` times on
    the side; only positive contributions are ranked.
    """
    if smoothing <= 0:
        raise InvalidConfigError("smoothing must be positive")
    counts = {}
    for key, texts in groups.items():
        if not texts:
            raise EmptyInputError(f"group {key} is empty")
        counts[key] = Counter(g for t in texts for g in bigrams(t))
    vocab = sorted(set().union(*counts.values())) if counts else []
    if not vocab:
        raise EmptyInputError("no bigrams in corpus")
    report = BigramReport()
    for key, side_counts in counts.items():
        rest = Counter()
        for other, c in counts.items():
            if other[0] != key[0]:
                rest.update(c)
        p_side = _distribution(side_counts, vocab, smoothing)
        p_rest = _distribution(rest, vocab, smoothing)
        rows = []
        for g in vocab:
            if side_counts.get(g, 0) < min_count:
                continue
            kl = p_side[g] * math.log(p_side[g] / p_rest[g])
            if kl > 0:
                rows.append(BigramEntry(" ".join(g), kl, p_side[g] / p_rest[g], side_counts[g]))
        rows.sort(key=lambda e: (-e.kl_contribution, e.bigram))
        report.entries[key] = rows
    return report


def population_groups(users, catalog: Catalog) -> dict:
    """Rewritten prompts grouped by ``(attribute name, 'follow'|'avoid')`` for :func:`bigram_kl_report`."""
    groups: dict = {}
    for u in users:
        for i, s in u.attributes.active():
            key = (catalog.attributes[i].name, "follow" if s > 0 else "avoid")
            groups.setdefault(key, []).extend(u.prompts)
    return groups
