"""Benchmark orchestration: staged, resumable, content-addressed runs."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..calibration import SyntheticJudge, calibration_grid, run_grid
from ..catalog import default_catalog, default_templates
from ..core import MappingKind, compute_metrics, preference_vector, reward_from_preference, sample_mapping
from ..errors import NoPreferenceError, StageError
from ..gateway import Gateway, SyntheticBackend, build_gateway
from ..personalizers import (RetrievalIndex, build_context, build_preference_pair,
                             candidate_rewards, generate, generate_candidates, judge_vector,
                             make_label, oracle_route, preference_summary, regression_targets, route,
                             style_summary, train_router, user_principle_scores)
from ..records import read_records, write_records
from ..rng import derive_seed
from ..selection import ScoreMatrix, select_attributes
from ..users import UserRecord, build_population, read_prompts
from .config import ExperimentConfig
from .report import emit_report

log = logging.getLogger(__name__)

BASELINE = "non-personalized"


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    mapping_seeds: list
    stages: dict = field(default_factory=dict)  # name -> {status, started, finished, artifacts}

    @classmethod
    def load_or_new(cls, path, config_hash, seeds) -> "RunManifest":
        path = Path(path)
        if path.exists():
            rec = json.loads(path.read_text(encoding="utf-8"))
            return cls(rec["config_hash"], rec["mapping_seeds"], rec["stages"])
        return cls(config_hash, seeds)

    def save(self, path) -> None:
        tmp = Path(f"{path}.tmp")
        tmp.write_text(json.dumps({"config_hash": self.config_hash, "mapping_seeds": self.mapping_seeds,
                                   "stages": self.stages}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def done(self, stage: str) -> bool:
        return self.stages.get(stage, {}).get("status") == "done"

    @property
    def complete(self) -> bool:
        return bool(self.stages) and all(s.get("status") == "done" for s in self.stages.values())


def _write_atomic(path: Path, records) -> None:
    tmp = path.with_name(path.name + ".tmp")
    if tmp.exists():
        tmp.unlink()
    write_records(tmp, records)
    os.replace(tmp, path)


class BenchmarkRun:
    """One run directory. Each stage writes its records then flips its manifest entry to ``done``."""

    def __init__(self, config: ExperimentConfig, gateway: Gateway | None = None, on_stage_done=None):
        self.config = config
        self.dir = config.run_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.catalog = default_catalog().subset(config.n_attributes, config.n_principles)
        self.templates = default_templates()
        self.gateway = gateway or make_gateway(config, self.catalog)
        self.on_stage_done = on_stage_done
        seeds = [derive_seed(config.seed, "mapping", i) for i in range(config.n_mappings)]
        self.manifest_path = self.dir / "manifest.json"
        self.manifest = RunManifest.load_or_new(self.manifest_path, config.config_hash, seeds)
        if self.manifest.config_hash != config.config_hash:
            raise StageError(f"run directory {self.dir} belongs to another config")
        config.dump(self.dir / "config.yaml", identity_only=True)

    # -- stage machinery ---------------------------------------------------
    def stage(self, name: str, path: Path, produce):
        """Run ``produce() -> list[dict]`` unless ``name`` is already done; return the records."""
        if self.manifest.done(name) and path.exists():
            return list(read_records(path))
        entry = self.manifest.stages.setdefault(name, {})
        entry.update(status="running", started=time.time())
        self.manifest.save(self.manifest_path)
        try:
            records = produce()
            _write_atomic(path, records)
        except Exception as exc:
            entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            self.manifest.save(self.manifest_path)
            raise StageError(f"stage {name} failed: {exc}") from exc
        entry.update(status="done", finished=time.time(), error=None,
                     artifacts={path.name: file_digest(path)}, records=len(records))
        self.manifest.save(self.manifest_path)
        if self.on_stage_done is not None:
            self.on_stage_done(name)
        return records

    # -- mapping-independent stages ----------------------------------------
    def population(self) -> list[UserRecord]:
        cfg = self.config
        path = self.dir / "population.jsonl"

        def produce():
            users = build_population(cfg.n_train, cfg.n_test, cfg.n_attributes, cfg.k, cfg.turns,
                                     read_prompts(cfg.prompts), derive_seed(cfg.seed, "population"),
                                     self.gateway, self.catalog)
            return [u.to_record() for u in users]

        return [UserRecord.from_record(r) for r in self.stage("population", path, produce)]

    def candidates(self, train) -> dict:
        """Per train user and history turn: the 2M candidates and their judge score rows."""
        m = self.config.n_principles
        gw = self.gateway

        def one(job):
            u, t, prompt = job
            cands = generate_candidates(gw, prompt, m)
            scores = [judge_vector(gw, c.text, m).tolist() for c in cands]
            return {"user_id": u.user_id, "turn": t, "prompt": prompt,
                    "candidates": [[c.principle, c.direction, c.text] for c in cands], "scores": scores}

        def produce():
            jobs = [(u, t, x) for u in train for t, x in enumerate(u.prompts)]
            return [one(j) for j in jobs]

        out: dict = {}
        for rec in self.stage("candidates", self.dir / "candidates.jsonl", produce):
            out.setdefault(rec["user_id"], []).append(rec)
        return out

    def baseline(self, test) -> dict:
        m = self.config.n_principles
        gw = self.gateway

        def one(u):
            y = generate(gw, u.query)
            return {"user_id": u.user_id, "response": y, "scores": judge_vector(gw, y, m).tolist()}

        recs = self.stage("baseline", self.dir / "baseline.jsonl", lambda: [one(u) for u in test])
        return {r["user_id"]: r for r in recs}

    def features(self, users) -> np.ndarray:
        """Mean-pooled embedding of each user's history prompts."""
        rows = []
        for u in users:
            vecs = self.gateway.embed_many(u.prompts)
            rows.append(np.mean(vecs, axis=0))
        return np.array(rows)

    def style_summaries(self, users) -> dict:
        path = self.dir / "style_summaries.jsonl"

        def produce():
            texts = self.gateway.map(lambda u: style_summary(self.gateway, u.prompts), users)
            return [{"user_id": u.user_id, "summary": s} for u, s in zip(users, texts)]

        return {r["user_id"]: r["summary"] for r in self.stage("style_summaries", path, produce)}

    # -- per-mapping stage -------------------------------------------------
    def evaluate_mapping(self, i: int, users, cand, base) -> list[dict]:
        cfg = self.config
        m = cfg.n_principles
        gw = self.gateway
        mseed = self.manifest.mapping_seeds[i]
        mapping = sample_mapping(MappingKind(cfg.mapping_kind), m, cfg.n_attributes, mseed)
        mdir = self.dir / f"mapping-{i:02d}"
        mdir.mkdir(exist_ok=True)
        write_records(mdir / "mapping.jsonl", [mapping.to_record()])
        train = [u for u in users if u.split == "train"]
        test = [u for u in users if u.split == "test"]
        pref = {u.user_id: preference_vector(mapping.values, u.attributes.entries) for u in users}

        # training supervision: preference pairs and routing labels
        pairs, labels, targets = {}, [], []
        for u in (train if cand else []):
            p = pref[u.user_id]
            plus, minus, upairs = [], [], []
            for rec in cand[u.user_id]:
                s = np.asarray(rec["scores"])
                upairs.append(build_preference_pair(rec["prompt"], [c[2] for c in rec["candidates"]],
                                                    candidate_rewards(p, s)))
                idx = np.arange(m)
                plus.append(user_principle_scores(p, s[2 * idx, idx]))
                minus.append(user_principle_scores(p, s[2 * idx + 1, idx]))
            pairs[u.user_id] = upairs
            sp, sm = np.mean(plus, axis=0), np.mean(minus, axis=0)
            targets.append(regression_targets(sp, sm))
            if cfg.labeling != "regression":
                labels.append(make_label(cfg.labeling, sp, sm))
        if pairs:
            write_records(mdir / "pairs.jsonl", ({"user_id": uid, **pp.to_record()}
                                                  for uid, ps in pairs.items() for pp in ps))
        if labels:
            write_records(mdir / "labels.jsonl", ({"user_id": u.user_id, **lab.to_record()}
                                                   for u, lab in zip(train, labels)))

        responses = {}
        base_rewards = np.array([reward_from_preference(pref[u.user_id], base[u.user_id]["scores"]) for u in test])

        def respond(u, instruction=None, context=None):
            return generate(gw, u.query, instruction, context)

        if "oracle" in cfg.methods:
            def oracle(u):
                try:
                    return respond(u, oracle_route(pref[u.user_id], self.catalog))
                except NoPreferenceError:
                    return base[u.user_id]["response"]
            responses["oracle"] = gw.map(oracle, test)

        if "routing" in cfg.methods:
            xtr, xte = self.features(train), self.features(test)
            if cfg.labeling == "regression":
                router = train_router(xtr, np.array(targets), mode="regress")
            else:
                r = cfg.router
                router = train_router(xtr, labels, mode="classify", n_classes=2 * m, lr=r.lr, epochs=r.epochs, l2=r.l2)
            router.save(mdir / "router.json")
            instr = [route(x, router, self.catalog) for x in xte]
            responses["routing"] = gw.map(lambda job: respond(job[0], job[1]), list(zip(test, instr)))

        if "rag_exemplar" in cfg.methods:
            index = RetrievalIndex([u.user_id for u in train], self.features(train), [pairs[u.user_id] for u in train])
            qs = self.features(test)
            ctx = [build_context(index.search(q, cfg.retrieval_k)[0], "exemplar", gw.templates) for q in qs]
            responses["rag_exemplar"] = gw.map(lambda job: respond(job[0], None, job[1]), list(zip(test, ctx)))

        if "rag_summary" in cfg.methods:
            styles = self.style_summaries(users)
            prefs = gw.map(lambda u: preference_summary(gw, pairs[u.user_id]), train)
            index = RetrievalIndex([u.user_id for u in train], np.array(gw.embed_many([styles[u.user_id] for u in train])),
                                   prefs)
            qs = gw.embed_many([styles[u.user_id] for u in test])
            ctx = [build_context(index.search(q, cfg.retrieval_k)[0], "summary", gw.templates) for q in qs]
            responses["rag_summary"] = gw.map(lambda job: respond(job[0], None, job[1]), list(zip(test, ctx)))

        results = [self._result(i, BASELINE, test, base_rewards, base_rewards)]
        for method in cfg.methods:
            ys = responses[method]
            scores = gw.map(lambda y: judge_vector(gw, y, m), ys)
            rewards = np.array([reward_from_preference(pref[u.user_id], s) for u, s in zip(test, scores)])
            results.append(self._result(i, method, test, rewards, base_rewards, ys))
        return results

    def _result(self, i, method, test, rewards, base_rewards, responses=None) -> dict:
        metrics = compute_metrics(rewards, base_rewards, self.config.tie_epsilon)
        users = [{"user_id": u.user_id, "baseline": float(b), "personalized": float(r)}
                 for u, r, b in zip(test, rewards, base_rewards)]
        if responses is not None:
            for row, y in zip(users, responses):
                row["response"] = y
        return {"mapping": i, "method": method, "users": users, "metrics": metrics.to_record()}

    # -- driver ------------------------------------------------------------
    def run(self) -> list[dict]:
        users = self.population()
        train = [u for u in users if u.split == "train"]
        test = [u for u in users if u.split == "test"]
        cand = self.candidates(train) if any(x != "oracle" for x in self.config.methods) else {}
        base = self.baseline(test)
        results = []
        for i in range(self.config.n_mappings):
            results += self.stage(f"mapping-{i:02d}", self.dir / f"results-{i:02d}.jsonl",
                                  lambda i=i: self.evaluate_mapping(i, users, cand, base))
        self.stage("report", self.dir / "report.jsonl", lambda: emit_report(results, self.dir))
        return results


def make_gateway(config: ExperimentConfig, catalog=None) -> Gateway:
    catalog = catalog or default_catalog().subset(config.n_attributes, config.n_principles)
    if config.backend == "synthetic":
        s = config.synthetic
        bias = np.resize(np.asarray(s.judge_bias, dtype=np.float64), config.n_principles)
        judge = SyntheticJudge(bias, noise_sd=s.noise_sd, compliance_gain=s.compliance_gain)
        backend = SyntheticBackend(catalog, judge, seed=s.seed, response_sd=s.response_sd,
                                   embed_dim=s.embed_dim, style_weight=s.style_weight)
        return build_gateway({}, cache_dir=config.cache_path, synthetic=backend, catalog=catalog,
                             max_workers=config.max_workers)
    return build_gateway(config.endpoint_configs(), cache_dir=config.cache_path, catalog=catalog,
                         max_workers=config.max_workers)


def run_benchmark(config: ExperimentConfig, gateway: Gateway | None = None, on_stage_done=None) -> list[dict]:
    """Run (or resume) every stage; returns the per-mapping result records."""
    return BenchmarkRun(config, gateway, on_stage_done).run()


def load_results(run_dir) -> list[dict]:
    run_dir = Path(run_dir)
    files = sorted(run_dir.glob("results-*.jsonl"))
    if not files:
        raise StageError(f"no result files in {run_dir}")
    return [r for f in files for r in read_records(f)]


# -- calibration and attribute selection -------------------------------------

@dataclass
class CalibrationConfig:
    m: int = 10
    n: int = 10
    n_samples: int = 100_000
    seed: int = 0
    ks: tuple = (1, 2)
    noises: tuple = (0.0, 1.0, 3.0)
    clamps: tuple = (True,)
    negative_control: bool = True


def run_calibration(cfg: CalibrationConfig) -> dict:
    """Both history-blind checks over the grid, plus the frozen-C control.

    ``passed`` covers the main grid only; the control is expected to fail
    its zero-mean check and is reported under ``control_detected``.
    """
    cells = calibration_grid(cfg.m, noises=cfg.noises, ks=cfg.ks, clamps=cfg.clamps)
    main = run_grid(cells, m=cfg.m, n=cfg.n, n_samples=cfg.n_samples, seed=cfg.seed)
    out = {"cells": main, "passed": all(r.passed and w.passed for _, r, w in main)}
    if cfg.negative_control:
        ctrl = run_grid(cells, m=cfg.m, n=cfg.n, n_samples=cfg.n_samples, seed=derive_seed(cfg.seed, "control"),
                        negative_control=True)
        out["control"] = ctrl
        out["control_detected"] = any(abs(r.z) > 3 for _, r, _ in ctrl)
    return out


def run_attribute_selection(path, tau: float = 1.5, n_surrogates: int = 100, percentile: float = 95, k=None,
                            seed: int = 0, out_dir=None):
    report = select_attributes(ScoreMatrix.read(path), tau=tau, k=k, n_surrogates=n_surrogates,
                               percentile=percentile, seed=seed)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.write(out_dir / "selection.jsonl", out_dir / "selection.txt")
    return report
