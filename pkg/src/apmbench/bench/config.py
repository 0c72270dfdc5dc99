"""Experiment configuration: one YAML file, defaults matching the reference setup."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..core import DEFAULT_TIE_EPSILON, MappingKind
from ..errors import InvalidConfigError
from ..gateway.calls import ROLES, content_hash
from ..gateway.http import EndpointConfig
from ..personalizers.labels import STRATEGIES

METHODS = ("oracle", "routing", "rag_exemplar", "rag_summary")
ROLE_DEFAULTS = {"judge": {"top_p": 0.95}}


@dataclass
class SyntheticSettings:
    judge_bias: float | list = 0.0
    noise_sd: float = 1.0
    compliance_gain: float = 2.0
    response_sd: float = 1.0
    embed_dim: int = 64
    style_weight: float = 4.0
    seed: int = 0


@dataclass
class RouterSettings:
    lr: float = 1.0
    epochs: int = 500
    l2: float = 1e-4


@dataclass
class ExperimentConfig:
    n_attributes: int = 10
    n_principles: int = 10
    k: int = 1
    n_train: int = 4000
    n_test: int = 1000
    turns: int = 2
    mapping_kind: str = "signed_permutation"
    n_mappings: int = 10
    tie_epsilon: float = DEFAULT_TIE_EPSILON
    seed: int = 0
    methods: list = field(default_factory=lambda: list(METHODS))
    labeling: str = "margin"
    retrieval_k: int = 3
    router: RouterSettings = field(default_factory=RouterSettings)
    backend: str = "synthetic"  # "synthetic" | "http"
    synthetic: SyntheticSettings = field(default_factory=SyntheticSettings)
    endpoints: dict = field(default_factory=dict)  # role -> EndpointConfig fields
    max_workers: int = 8
    prompts: str | None = None
    run_root: str = "runs"
    cache_dir: str | None = None  # default: <run_root>/cache

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            kind = MappingKind(self.mapping_kind)
        except ValueError:
            raise InvalidConfigError(f"unknown mapping_kind {self.mapping_kind!r}") from None
        if kind is MappingKind.SIGNED_PERMUTATION and self.n_attributes != self.n_principles:
            raise InvalidConfigError("signed_permutation mappings need n_attributes == n_principles")
        if self.n_attributes < 1 or self.n_principles < 1:
            raise InvalidConfigError("dimensions must be positive")
        if not 1 <= self.k <= self.n_attributes:
            raise InvalidConfigError("k must lie in [1, n_attributes]")
        if self.n_mappings < 1:
            raise InvalidConfigError("n_mappings must be >= 1")
        if self.n_train < 1 or self.n_test < 1 or self.turns < 1:
            raise InvalidConfigError("n_train, n_test and turns must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise InvalidConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if self.labeling not in STRATEGIES:
            raise InvalidConfigError(f"labeling must be one of {STRATEGIES}")
        if self.retrieval_k < 1:
            raise InvalidConfigError("retrieval_k must be >= 1")
        if self.backend not in ("synthetic", "http"):
            raise InvalidConfigError("backend must be 'synthetic' or 'http'")
        if self.backend == "http":
            missing = [r for r in ROLES if r not in self.endpoints and not (r == "base" and "generator" in self.endpoints)]
            if missing:
                raise InvalidConfigError(f"http backend needs endpoints for roles {missing}")
        unknown = set(self.endpoints) - set(ROLES)
        if unknown:
            raise InvalidConfigError(f"unknown endpoint roles {sorted(unknown)}")

    # -- (de)serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: dict | None) -> "ExperimentConfig":
        raw = dict(raw or {})
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise InvalidConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            if "router" in raw:
                raw["router"] = RouterSettings(**(raw["router"] or {}))
            if "synthetic" in raw:
                raw["synthetic"] = SyntheticSettings(**(raw["synthetic"] or {}))
            return cls(**raw)
        except TypeError as exc:
            raise InvalidConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
        if raw is not None and not isinstance(raw, dict):
            raise InvalidConfigError("config file must hold a mapping")
        return cls.from_dict(raw)

    def dump(self, path, identity_only: bool = False) -> None:
        d = self.identity() if identity_only else self.to_dict()
        Path(path).write_text(yaml.safe_dump(d, sort_keys=False), encoding="utf-8")

    def identity(self) -> dict:
        """Every field that affects results; output locations and worker counts dropped."""
        d = self.to_dict()
        for key in ("run_root", "cache_dir", "max_workers"):
            d.pop(key)
        for ep in d["endpoints"].values():
            if isinstance(ep, dict):
                ep.pop("concurrency", None)
        return d

    # -- derived -----------------------------------------------------------
    @property
    def config_hash(self) -> str:
        return content_hash(self.identity())[:16]

    @property
    def run_dir(self) -> Path:
        return Path(self.run_root) / self.config_hash

    @property
    def cache_path(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.run_root) / "cache"

    def endpoint_configs(self) -> dict:
        out = {}
        for role, fields in self.endpoints.items():
            merged = {**ROLE_DEFAULTS.get(role, {}), **(fields or {})}
            try:
                out[role] = EndpointConfig(role=role, **merged)
            except TypeError as exc:
                raise InvalidConfigError(f"endpoint {role}: {exc}") from None
        return out
