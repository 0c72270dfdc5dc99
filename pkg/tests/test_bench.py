import filecmp
import json

import pytest

from apmbench.bench import ExperimentConfig, aggregate, emit_report, render_text, render_tsv, run_benchmark
from apmbench.bench.cli import main
from apmbench.errors import InvalidConfigError, StageError
from apmbench.selection import planted_factor_scores


def small_config(root, **kw):
    base = dict(n_attributes=3, n_principles=3, n_train=12, n_test=10, n_mappings=2, run_root=str(root),
                max_workers=4)
    base.update(kw)
    return ExperimentConfig(**base)


def metrics(wins, losses, ties, delta, wl):
    return {"wins": wins, "losses": losses, "ties": ties, "mean_delta": delta, "wl_ratio": wl,
            "half_tie_winrate": (wins + ties / 2) / (wins + losses + ties), "per_user_deltas": []}


# -- config ---------------------------------------------------------------------

def test_defaults_follow_reference_setup():
    c = ExperimentConfig()
    assert (c.n_attributes, c.n_principles, c.k, c.n_train, c.n_test, c.turns, c.n_mappings) == (10, 10, 1, 4000, 1000, 2, 10)
    assert c.mapping_kind == "signed_permutation" and c.retrieval_k == 3


@pytest.mark.parametrize("bad", [dict(n_attributes=3, n_principles=4), dict(n_mappings=0), dict(methods=["dpo"]),
                                 dict(labeling="vote"), dict(mapping_kind="uniform"), dict(backend="http")])
def test_config_validation(bad):
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(**bad)


def test_config_yaml_round_trip(tmp_path):
    c = small_config(tmp_path, mapping_kind="gaussian", n_attributes=3, n_principles=4)
    c.dump(tmp_path / "c.yaml")
    back = ExperimentConfig.load(tmp_path / "c.yaml")
    assert back.to_dict() == c.to_dict() and back.config_hash == c.config_hash
    (tmp_path / "bad.yaml").write_text("colour: blue\n")
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.load(tmp_path / "bad.yaml")


def test_config_hash_ignores_locations(tmp_path):
    assert small_config(tmp_path / "a").config_hash == small_config(tmp_path / "b", max_workers=1).config_hash
    assert small_config(tmp_path).config_hash != small_config(tmp_path, seed=1).config_hash


# -- report -----------------------------------------------------------------------

def test_report_single_row_and_undefined_wl(tmp_path):
    rows = aggregate([{"method": "routing", "mapping": 0, "metrics": metrics(5, 0, 1, 0.7, None)}])
    assert len(rows) == 1 and rows[0]["delta_sd"] is None
    assert "undef(5/0)" in render_text(rows) and "undef(5/0)" in render_tsv(rows)
    emit_report([{"method": "routing", "mapping": 0, "metrics": metrics(5, 0, 1, 0.7, None)}], tmp_path)
    assert (tmp_path / "report.tsv").read_text().splitlines()[0].split("\t")[:3] == ["method", "n_mappings", "wl_mean"]


def test_report_mean_and_sample_sd():
    res = [{"method": "m", "mapping": i, "metrics": metrics(4, 2, 0, d, 2.0)} for i, d in enumerate([1.0, 3.0])]
    row = aggregate(res)[0]
    assert row["delta_mean"] == 2.0 and row["delta_sd"] == pytest.approx(2 ** 0.5)
    assert row["wl_mean"] == 2.0 and row["wins"] == 8


# -- runs --------------------------------------------------------------------------

def test_small_run_and_warm_cache_determinism(tmp_path):
    cache = tmp_path / "cache"
    c1 = small_config(tmp_path / "r1", cache_dir=str(cache))
    res = run_benchmark(c1)
    methods = [r["method"] for r in res if r["mapping"] == 0]
    assert methods == ["non-personalized", "oracle", "routing", "rag_exemplar", "rag_summary"]
    base = [r for r in res if r["method"] == "non-personalized"]
    assert all(r["metrics"]["half_tie_winrate"] == 0.5 and r["metrics"]["ties"] == 10 for r in base)

    c2 = small_config(tmp_path / "r2", cache_dir=str(cache))
    from apmbench.bench import make_gateway
    gw = make_gateway(c2)
    run_benchmark(c2, gateway=gw)
    assert gw.network_calls == 0
    for name in ["population.jsonl", "results-00.jsonl", "results-01.jsonl", "report.tsv", "report.txt"]:
        assert filecmp.cmp(c1.run_dir / name, c2.run_dir / name, shallow=False), name


def test_rerun_completed_manifest_is_noop(tmp_path):
    c = small_config(tmp_path, n_mappings=1, methods=["oracle"])
    run_benchmark(c)
    before = (c.run_dir / "manifest.json").read_text()
    from apmbench.bench import make_gateway
    gw = make_gateway(c)
    run_benchmark(c, gateway=gw)
    assert gw.network_calls == 0 and gw.counters["cache_hits"] == 0
    assert (c.run_dir / "manifest.json").read_text() == before


def test_kill_and_resume_matches_uninterrupted(tmp_path):
    full = small_config(tmp_path / "full", cache_dir=str(tmp_path / "c1"))
    run_benchmark(full)

    part = small_config(tmp_path / "part", cache_dir=str(tmp_path / "c2"))

    class Killed(BaseException):
        pass

    def kill(stage):
        if stage == "mapping-00":
            raise Killed

    with pytest.raises(Killed):
        run_benchmark(part, on_stage_done=kill)
    manifest = json.loads((part.run_dir / "manifest.json").read_text())
    assert manifest["stages"]["mapping-00"]["status"] == "done" and "mapping-01" not in manifest["stages"]
    run_benchmark(part)
    for name in ["results-00.jsonl", "results-01.jsonl", "report.tsv"]:
        assert filecmp.cmp(full.run_dir / name, part.run_dir / name, shallow=False)


def test_stage_failure_marked_and_resumable(tmp_path, monkeypatch):
    c = small_config(tmp_path, n_mappings=1, methods=["oracle"])
    from apmbench.bench import runner

    def boom(*a, **k):
        raise RuntimeError("judge offline")

    monkeypatch.setattr(runner.BenchmarkRun, "evaluate_mapping", boom)
    with pytest.raises(StageError):
        run_benchmark(c)
    manifest = json.loads((c.run_dir / "manifest.json").read_text())
    assert manifest["stages"]["mapping-00"]["status"] == "failed"
    assert manifest["stages"]["population"]["status"] == "done"
    monkeypatch.undo()
    run_benchmark(c)
    manifest = json.loads((c.run_dir / "manifest.json").read_text())
    assert all(s["status"] == "done" for s in manifest["stages"].values())


# -- CLI ---------------------------------------------------------------------------

def test_cli_benchmark_report_and_cache(tmp_path, capsys):
    cfg = small_config(tmp_path / "runs", n_mappings=1, methods=["oracle"])
    cfg.dump(tmp_path / "c.yaml")
    assert main(["benchmark", str(tmp_path / "c.yaml")]) == 0
    assert "oracle" in capsys.readouterr().out
    assert main(["report", str(cfg.run_dir)]) == 0
    assert main(["cache", "inspect", "--dir", str(cfg.cache_path)]) == 0
    assert "entries" in capsys.readouterr().out
    assert main(["cache", "clear", "--dir", str(cfg.cache_path)]) == 0


def test_cli_exit_codes(tmp_path):
    (tmp_path / "bad.yaml").write_text("n_attributes: 3\nn_principles: 5\n")
    assert main(["benchmark", str(tmp_path / "bad.yaml")]) == 1
    assert main(["report", str(tmp_path / "nothing")]) == 2
    matrix, _ = planted_factor_scores(n_rows=300, seed=0)
    matrix.write(tmp_path / "s.csv")
    assert main(["select-attributes", str(tmp_path / "s.csv"), "--tau", "9", "--surrogates", "5"]) == 2
    assert main(["select-attributes", str(tmp_path / "s.csv"), "--surrogates", "10",
                 "--out", str(tmp_path / "sel")]) == 0
    assert (tmp_path / "sel" / "selection.txt").exists()


def test_cli_calibrate_tiny_passes_with_low_power(tmp_path, capsys):
    code = main(["calibrate", "--samples", "300", "--dims", "3", "--out", str(tmp_path / "cal.jsonl")])
    out = capsys.readouterr().out
    assert "cells pass" in out and code in (0, 3)
    rec = json.loads((tmp_path / "cal.jsonl").read_text().splitlines()[0])
    assert rec["reward"]["flags"]["info_low_power"] is True


def test_run_dir_config_records_identity_only(tmp_path):
    c = small_config(tmp_path / "runs", n_mappings=1, methods=["oracle"])
    run_benchmark(c)
    saved = ExperimentConfig.load(c.run_dir / "config.yaml")
    assert saved.config_hash == c.config_hash
    assert "run_root" not in (c.run_dir / "config.yaml").read_text()
