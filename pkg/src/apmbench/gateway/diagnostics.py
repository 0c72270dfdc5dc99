"""Judge quality diagnostics computed from paired follow/avoid scores."""
from __future__ import annotations

import numpy as np

from ..core import SCORE_MAX, SCORE_MIN
from ..errors import DimensionMismatchError, EmptyInputError


def _pair(plus, minus):
    sp, sm = np.asarray(plus, dtype=np.float64), np.asarray(minus, dtype=np.float64)
    if sp.shape != sm.shape or sp.ndim != 1:
        raise DimensionMismatchError("follow and avoid scores must be equal-length vectors")
    if sp.size == 0:
        raise EmptyInputError("no score pairs")
    return sp, sm


def judge_balance(scores_plus, scores_minus) -> float:
    """Mean |s+ + s- - 11|: zero for a judge whose two questions mirror each other exactly."""
    sp, sm = _pair(scores_plus, scores_minus)
    return float(np.mean(np.abs(sp + sm - (SCORE_MIN + SCORE_MAX))))


def judge_anticorrelation(scores_plus, scores_minus) -> float:
    """Pearson correlation of s+ and s- across responses; NaN when either side is constant."""
    sp, sm = _pair(scores_plus, scores_minus)
    if sp.size < 2:
        return float("nan")
    dp, dm = sp - sp.mean(), sm - sm.mean()
    denom = np.sqrt(np.sum(dp * dp) * np.sum(dm * dm))
    if denom == 0:
        return float("nan")
    return float(np.clip(np.sum(dp * dm) / denom, -1.0, 1.0))
