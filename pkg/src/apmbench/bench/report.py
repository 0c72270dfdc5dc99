"""Table-1-style aggregation across mappings."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..errors import EmptyInputError

COLUMNS = ("method", "n_mappings", "wl_mean", "wl_sd", "delta_mean", "delta_sd", "wins", "losses", "ties",
           "winrate_mean")


def _mean_sd(values) -> tuple[float, float | None]:
    v = np.asarray(values, dtype=np.float64)
    return float(v.mean()), (float(v.std(ddof=1)) if v.size > 1 else None)


def aggregate(results) -> list[dict]:
    """One row per method in first-seen order: mean and sample sd across mappings, summed counts."""
    results = list(results)
    if not results:
        raise EmptyInputError("no results to report")
    by_method: dict = {}
    for rec in results:
        by_method.setdefault(rec["method"], []).append(rec["metrics"])
    rows = []
    for method, ms in by_method.items():
        wins, losses, ties = (sum(m[key] for m in ms) for key in ("wins", "losses", "ties"))
        wl = [m["wl_ratio"] for m in ms]
        d_mean, d_sd = _mean_sd([m["mean_delta"] for m in ms])
        w_mean, _ = _mean_sd([m["half_tie_winrate"] for m in ms])
        row = {"method": method, "n_mappings": len(ms), "delta_mean": d_mean, "delta_sd": d_sd,
               "wins": wins, "losses": losses, "ties": ties, "winrate_mean": w_mean}
        if any(x is None for x in wl):
            row["wl_mean"], row["wl_sd"] = None, None
        else:
            row["wl_mean"], row["wl_sd"] = _mean_sd(wl)
        rows.append(row)
    return rows


def _num(x, fmt="{:.3f}") -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else fmt.format(x)


def wl_cell(row) -> str:
    if row["wl_mean"] is None:
        return f"undef({row['wins']}/{row['losses']})"
    return _num(row["wl_mean"]) + (f" ± {_num(row['wl_sd'])}" if row["wl_sd"] is not None else "")


def render_tsv(rows) -> str:
    lines = ["\t".join(COLUMNS)]
    for r in rows:
        cells = [r["method"], str(r["n_mappings"]),
                 wl_cell(r) if r["wl_mean"] is None else _num(r["wl_mean"], "{:.6f}"), _num(r["wl_sd"], "{:.6f}"),
                 _num(r["delta_mean"], "{:.6f}"), _num(r["delta_sd"], "{:.6f}"),
                 str(r["wins"]), str(r["losses"]), str(r["ties"]), _num(r["winrate_mean"], "{:.6f}")]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def render_text(rows) -> str:
    header = ("Method", "W/L", "Delta", "W/L/T", "Win-rate")
    body = []
    for r in rows:
        delta = f"{r['delta_mean']:+.3f}" + (f" ± {r['delta_sd']:.3f}" if r["delta_sd"] is not None else "")
        body.append((r["method"], wl_cell(r), delta, f"{r['wins']}/{r['losses']}/{r['ties']}",
                     f"{r['winrate_mean']:.3f}"))
    widths = [max(len(str(x[i])) for x in [header, *body]) for i in range(len(header))]
    fmt = lambda cols: "  ".join(str(c).ljust(w) for c, w in zip(cols, widths)).rstrip()  # noqa: E731
    lines = [fmt(header), fmt(["-" * w for w in widths]), *map(fmt, body)]
    n = rows[0]["n_mappings"]
    lines.append(f"(mean ± sample sd over {n} mapping{'s' if n != 1 else ''}; W/L/T summed)")
    return "\n".join(lines) + "\n"


def emit_report(results, out_dir=None) -> list[dict]:
    """Aggregate, write ``report.tsv`` and ``report.txt`` into ``out_dir``, return the rows."""
    rows = aggregate(results)
    if out_dir is not None:
        out = Path(out_dir)
        (out / "report.tsv").write_text(render_tsv(rows), encoding="utf-8")
        (out / "report.txt").write_text(render_text(rows), encoding="utf-8")
    return rows
