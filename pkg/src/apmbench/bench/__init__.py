from .config import METHODS, ExperimentConfig, RouterSettings, SyntheticSettings
from .report import aggregate, emit_report, render_text, render_tsv
from .runner import (BASELINE, BenchmarkRun, CalibrationConfig, RunManifest, load_results, make_gateway,
                     run_attribute_selection, run_benchmark, run_calibration)

__all__ = [
    "BASELINE", "METHODS", "BenchmarkRun", "CalibrationConfig", "ExperimentConfig", "RouterSettings", "RunManifest",
    "SyntheticSettings", "aggregate", "emit_report", "load_results", "make_gateway", "render_text", "render_tsv",
    "run_attribute_selection", "run_benchmark", "run_calibration",
]
