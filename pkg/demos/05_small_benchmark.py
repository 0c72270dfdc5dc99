"""
A small benchmark, start to finish
==================================

Four attributes, four principles, synthetic backends. The run directory is
addressed by the config hash, so running this twice reuses everything.
"""
import sys
import tempfile
from pathlib import Path

from apmbench.bench import ExperimentConfig, load_results, render_text, aggregate, run_benchmark

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
cfg = ExperimentConfig(n_attributes=4, n_principles=4, n_train=30, n_test=60, n_mappings=3, run_root=str(root))
cfg.synthetic.compliance_gain = 2.0

run_benchmark(cfg)
print("run directory:", cfg.run_dir)
print(render_text(aggregate(load_results(cfg.run_dir))))

for p in sorted(cfg.run_dir.iterdir()):
    print(" ", p.name)
