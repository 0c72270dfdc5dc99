"""``apmbench`` command line: benchmark, calibrate, select-attributes, report, cache."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..calibration import format_grid
from ..errors import ApmError, InvalidConfigError, StageError
from ..gateway import DiskCache
from ..records import write_records
from .config import ExperimentConfig
from .report import emit_report, render_text
from .runner import CalibrationConfig, load_results, run_attribute_selection, run_benchmark, run_calibration

EXIT_OK, EXIT_CONFIG, EXIT_STAGE, EXIT_ACCEPTANCE = 0, 1, 2, 3


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "run_root", None):
        cfg.run_root = args.run_root
    if getattr(args, "cache_dir", None):
        cfg.cache_dir = args.cache_dir
    return cfg


def cmd_benchmark(args) -> int:
    cfg = _load_config(args)
    run_benchmark(cfg)
    print(f"run directory: {cfg.run_dir}")
    print((cfg.run_dir / "report.txt").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = CalibrationConfig(n_samples=args.samples, seed=args.seed, m=args.dims, n=args.dims,
                            clamps=(True, False) if args.both_clamps else (True,),
                            negative_control=not args.no_control)
    out = run_calibration(cfg)
    print(format_grid(out["cells"]))
    if "control" in out:
        print(f"negative control (frozen C): {'detected' if out['control_detected'] else 'NOT detected'}")
    if args.out:
        recs = [{"cell": c.label, "reward": r.to_record(), "winrate": w.to_record()} for c, r, w in out["cells"]]
        write_records(args.out, recs)
    failed = sum(not (r.passed and w.passed) for _, r, w in out["cells"])
    print(f"{len(out['cells']) - failed}/{len(out['cells'])} cells pass")
    ok = failed == 0 and out.get("control_detected", True)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_select(args) -> int:
    report = run_attribute_selection(args.scores, tau=args.tau, n_surrogates=args.surrogates,
                                     percentile=args.percentile, k=args.k, seed=args.seed, out_dir=args.out)
    print(report.table())
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    rows = emit_report(load_results(run_dir), run_dir)
    print(render_text(rows), end="")
    return EXIT_OK


def cmd_cache(args) -> int:
    cache = DiskCache(args.dir)
    if args.action == "inspect":
        print(f"{args.dir}: {len(cache)} entries, {cache.size_bytes()} bytes")
    else:
        n = cache.clear()
        print(f"removed {n} entries from {args.dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="apmbench", description="Arbitrary preference mapping benchmark harness.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("benchmark", help="run or resume a benchmark from a YAML config")
    b.add_argument("config", nargs="?")
    b.add_argument("--run-root")
    b.add_argument("--cache-dir")
    b.set_defaults(fn=cmd_benchmark)

    c = sub.add_parser("calibrate", help="Monte Carlo checks of the zero-reward and 50%% win-rate baselines")
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--dims", type=int, default=10)
    c.add_argument("--both-clamps", action="store_true", help="also run every cell without clamping")
    c.add_argument("--no-control", action="store_true", help="skip the frozen-mapping negative control")
    c.add_argument("--out", help="write per-cell records (JSONL)")
    c.set_defaults(fn=cmd_calibrate)

    s = sub.add_parser("select-attributes", help="entropy filter, parallel analysis, Varimax, representatives")
    s.add_argument("scores", help="CSV/TSV score matrix with a header of attribute names")
    s.add_argument("--tau", type=float, default=1.5)
    s.add_argument("--surrogates", type=int, default=100)
    s.add_argument("--percentile", type=float, default=95)
    s.add_argument("--k", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_select)

    r = sub.add_parser("report", help="re-emit the table for an existing run directory")
    r.add_argument("run_dir")
    r.set_defaults(fn=cmd_report)

    k = sub.add_parser("cache", help="inspect or clear a response cache")
    k.add_argument("action", choices=("inspect", "clear"))
    k.add_argument("--dir", default="runs/cache")
    k.set_defaults(fn=cmd_cache)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StageError, ApmError, OSError) as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
