"""Attribute/principle catalog and prompt templates (editable text assets)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import InvalidConfigError


@dataclass(frozen=True)
class Attribute:
    name: str
    positive: str
    negative: str

    def pole(self, sign: int) -> str:
        return self.positive if sign > 0 else self.negative


@dataclass(frozen=True)
class Principle:
    name: str
    description: str
    follow: str
    avoid: str

    def instruction(self, direction: int) -> str:
        return self.follow if direction > 0 else self.avoid


@dataclass(frozen=True)
class Catalog:
    attributes: tuple
    principles: tuple

    @classmethod
    def load(cls, path=None) -> "Catalog":
        if path is None:
            text = resources.files("apmbench").joinpath("assets/catalog.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        raw = json.loads(text)
        return cls(tuple(Attribute(**a) for a in raw["attributes"]),
                   tuple(Principle(**p) for p in raw["principles"]))

    def subset(self, n: int, m: int) -> "Catalog":
        if n > len(self.attributes) or m > len(self.principles):
            raise InvalidConfigError(
                f"catalog has {len(self.attributes)} attributes / {len(self.principles)} principles; asked for {n}/{m}")
        return Catalog(self.attributes[:n], self.principles[:m])

    def principle_index(self, name: str) -> int:
        for i, p in enumerate(self.principles):
            if p.name == name:
                return i
        raise KeyError(name)

    def parse_instruction(self, text: str):
        """Inverse of :meth:`Principle.instruction`: ``(index, direction)`` or None."""
        text = text.strip()
        for i, p in enumerate(self.principles):
            if text == p.follow:
                return i, 1
            if text == p.avoid:
                return i, -1
        return None


class Templates:
    """Prompt templates, read from a directory of ``*.txt`` files (package assets by default)."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else None
        self._cache: dict[str, str] = {}

    def get(self, name: str) -> str:
        if name not in self._cache:
            if self.directory is not None and (self.directory / f"{name}.txt").exists():
                text = (self.directory / f"{name}.txt").read_text(encoding="utf-8")
            else:
                text = resources.files("apmbench").joinpath(f"assets/templates/{name}.txt").read_text(encoding="utf-8")
            self._cache[name] = text.rstrip("\n")
        return self._cache[name]

    def render(self, template: str, /, **fields) -> str:
        return self.get(template).format(**fields)


@lru_cache(maxsize=1)
def default_catalog() -> Catalog:
    return Catalog.load()


@lru_cache(maxsize=1)
def default_templates() -> Templates:
    return Templates()
