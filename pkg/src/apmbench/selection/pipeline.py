"""End-to-end attribute selection: entropy filter -> correlation -> eigen -> parallel analysis -> PCA -> Varimax -> representatives."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatchError, EmptyInputError, InvalidConfigError
from ..records import write_records
from .eigen import jacobi_eigh
from .factor import (
    ENTROPY_THRESHOLD,
    correlation_matrix,
    entropy_filter,
    explained_variance,
    parallel_analysis,
    pca_loadings,
    select_representatives,
    sort_components,
    varimax_rotate,
)


@dataclass
class ScoreMatrix:
    scores: np.ndarray  # (texts, attributes)
    names: list

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim != 2:
            raise DimensionMismatchError("score matrix must be 2-d")
        if len(self.names) != self.scores.shape[1]:
            raise DimensionMismatchError("one name per attribute column required")
        if np.any(~np.isfinite(self.scores)):
            raise InvalidConfigError("score matrix has missing or non-finite entries")

    @classmethod
    def read(cls, path, delimiter: str | None = None) -> "ScoreMatrix":
        """Header row of attribute names, then one text per row."""
        path = Path(path)
        if delimiter is None:
            delimiter = "\t" if path.suffix in (".tsv", ".tab") else ","
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
        if not rows:
            raise EmptyInputError(f"{path} is empty")
        header, body = rows[0], [r for r in rows[1:] if r]
        if any(len(r) != len(header) for r in body):
            raise DimensionMismatchError(f"{path}: ragged rows")
        try:
            data = np.array([[float(x) for x in r] for r in body])
        except ValueError as exc:
            raise InvalidConfigError(f"{path}: non-numeric or missing score ({exc})") from None
        return cls(data.reshape(len(body), len(header)), header)

    def write(self, path, delimiter: str = ",") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, delimiter=delimiter)
            w.writerow(self.names)
            for row in self.scores:
                w.writerow([f"{x:g}" for x in row])


@dataclass
class SelectionReport:
    names: list
    entropies: np.ndarray
    retained: list
    k_max: int
    k: int
    representatives: list  # indices into the full attribute list
    explained_variance: float
    eigenvalues: np.ndarray
    thresholds: np.ndarray
    loadings: np.ndarray  # initial, retained attributes x k
    rotated: np.ndarray  # retained attributes x k, components sorted by SSL
    rotated_flag: bool
    criterion_trace: list = field(default_factory=list)

    @property
    def representative_names(self) -> list:
        return [self.names[i] for i in self.representatives]

    def to_record(self) -> dict:
        return {
            "names": list(self.names), "entropies": self.entropies, "retained": list(self.retained),
            "k_max": self.k_max, "k": self.k, "representatives": list(self.representatives),
            "representative_names": self.representative_names,
            "explained_variance": self.explained_variance, "eigenvalues": self.eigenvalues,
            "thresholds": self.thresholds, "rotated": self.rotated, "rotated_flag": self.rotated_flag,
        }

    def table(self, top: int = 5) -> str:
        """Per-component top loadings with the attribute's score mean/std/entropy."""
        lines = [f"retained {len(self.retained)}/{len(self.names)} attributes; k_max={self.k_max}; "
                 f"k={self.k}; explained variance {100 * self.explained_variance:.1f}%",
                 f"{'Component':<28} {'Attribute':<28} {'Loading':>8} {'Entropy':>8}"]
        for j in range(self.k):
            col = self.rotated[:, j]
            order = np.lexsort((np.arange(col.size), -np.abs(col)))[:top]
            rep = self.names[self.representatives[j]]
            ssl = float(np.sum(col ** 2))
            for r, a in enumerate(order):
                name = self.names[self.retained[a]]
                head = f"RC{j + 1} ({rep})" if r == 0 else (f"SSL: {ssl:.3f}" if r == 1 else "")
                lines.append(f"{head:<28} {name:<28} {col[a]:+8.3f} {self.entropies[self.retained[a]]:8.3f}")
        return "\n".join(lines)

    def write(self, record_path, table_path=None) -> None:
        write_records(record_path, [self.to_record()])
        if table_path is not None:
            Path(table_path).write_text(self.table() + "\n", encoding="utf-8")


def select_attributes(matrix: ScoreMatrix, tau: float = ENTROPY_THRESHOLD, k: int | None = None,
                      n_surrogates: int = 100, percentile: float = 95.0, seed: int = 0,
                      normalize: bool = True, pa_rule: str = "leading") -> SelectionReport:
    """Run the full selection. ``k=None`` uses ``k_max``."""
    keep, ent = entropy_filter(matrix.scores, tau)
    if keep.size == 0:
        raise EmptyInputError(f"no attribute reaches entropy threshold {tau}")
    sub = matrix.scores[:, keep]
    if sub.shape[0] <= sub.shape[1]:
        raise DimensionMismatchError(f"need more texts than retained attributes ({sub.shape[0]} <= {sub.shape[1]})")
    w, v = jacobi_eigh(correlation_matrix(sub))
    pa = parallel_analysis(w, sub.shape[0], n_cols=sub.shape[1], n_surrogates=n_surrogates,
                           percentile=percentile, seed=seed, rule=pa_rule)
    k_max = pa.k_max
    k = k_max if k is None else int(k)
    if k < 1:
        raise InvalidConfigError("parallel analysis retained no components")
    if k > k_max:
        raise InvalidConfigError(f"requested k={k} exceeds k_max={k_max}")
    load = pca_loadings(w, v, k)
    trace: list = []
    if k >= 2:
        vm = varimax_rotate(load, normalize=normalize)
        rotated, _ = sort_components(vm.loadings, vm.rotation)
        trace = vm.criterion_trace
    else:
        rotated = load.copy()
    reps = select_representatives(rotated, k)
    return SelectionReport(
        names=list(matrix.names), entropies=ent, retained=keep.tolist(), k_max=k_max, k=k,
        representatives=[int(keep[i]) for i in reps], explained_variance=explained_variance(w, k),
        eigenvalues=w, thresholds=pa.thresholds, loadings=load, rotated=rotated, rotated_flag=k >= 2,
        criterion_trace=trace,
    )
