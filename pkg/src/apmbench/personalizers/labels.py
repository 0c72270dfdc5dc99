"""Routing labels: which (principle, direction) a training user most wants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import MIDPOINT
from ..errors import DimensionMismatchError, InvalidConfigError

STRATEGIES = ("margin", "two_sided", "one_sided", "regression")


@dataclass(frozen=True)
class RoutingLabel:
    principle: int  # 0-based
    direction: int  # +1 follow, -1 avoid
    degenerate: bool = False

    def __post_init__(self):
        if self.principle < 0 or self.direction not in (1, -1):
            raise InvalidConfigError(f"bad routing label ({self.principle}, {self.direction})")

    @property
    def class_index(self) -> int:
        return label_to_class(self.principle, self.direction)

    def to_record(self) -> dict:
        return {"principle": self.principle, "direction": self.direction, "degenerate": self.degenerate}

    @classmethod
    def from_record(cls, rec: dict) -> "RoutingLabel":
        return cls(rec["principle"], rec["direction"], rec.get("degenerate", False))


def label_to_class(j: int, d: int) -> int:
    """Class ``2j`` for follow, ``2j + 1`` for avoid."""
    return 2 * j + (0 if d > 0 else 1)


def class_to_label(c: int, degenerate: bool = False) -> RoutingLabel:
    return RoutingLabel(int(c) // 2, 1 if int(c) % 2 == 0 else -1, degenerate)


def _pair(plus, minus):
    sp = np.asarray(plus, dtype=np.float64)
    sm = np.asarray(minus, dtype=np.float64)
    if sp.ndim != 1 or sp.shape != sm.shape or sp.size == 0:
        raise DimensionMismatchError("need equal-length, nonempty follow/avoid score vectors")
    return sp, sm


def margin_label(scores_plus, scores_minus) -> RoutingLabel:
    """``j* = argmax |m_j|`` with ``m_j = s_j^+ - s_j^-``; direction is the sign of ``m_{j*}``."""
    sp, sm = _pair(scores_plus, scores_minus)
    m = sp - sm
    j = int(np.argmax(np.abs(m)))  # first maximum, i.e. lowest index
    if m[j] == 0:
        return RoutingLabel(0, 1, degenerate=True)
    return RoutingLabel(j, 1 if m[j] > 0 else -1)


def two_sided_label(scores_plus, scores_minus) -> RoutingLabel:
    """Best of all 2M candidates by raw score; ties go to the lowest principle, follow first."""
    sp, sm = _pair(scores_plus, scores_minus)
    flat = np.column_stack([sp, sm]).ravel()  # class order 2j, 2j+1
    c = int(np.argmax(flat))
    return class_to_label(c, degenerate=bool(np.all(flat == flat[0])))


def one_sided_label(scores_plus, midpoint: float = MIDPOINT) -> RoutingLabel:
    """Follow-side score farthest from the scale midpoint; exact-midpoint entries never win."""
    sp = np.asarray(scores_plus, dtype=np.float64)
    if sp.ndim != 1 or sp.size == 0:
        raise DimensionMismatchError("need a nonempty follow-score vector")
    dev = sp - midpoint
    mag = np.where(dev == 0, -np.inf, np.abs(dev))
    j = int(np.argmax(mag))
    if not np.isfinite(mag[j]):
        return RoutingLabel(0, 1, degenerate=True)
    return RoutingLabel(j, 1 if dev[j] > 0 else -1)


def regression_targets(scores_plus, scores_minus) -> np.ndarray:
    """``[s_1^+, s_1^-, s_2^+, s_2^-, ...]``: the same interleaving as the class index."""
    sp, sm = _pair(scores_plus, scores_minus)
    return np.column_stack([sp, sm]).ravel()


def split_targets(vec):
    v = np.asarray(vec, dtype=np.float64)
    if v.ndim != 1 or v.size % 2:
        raise DimensionMismatchError("target vector must have even length")
    return v[0::2], v[1::2]


def regression_label(predicted) -> RoutingLabel:
    """Route a predicted target vector: ``argmax_j |s_j^+ - s_j^-|``, sign of that difference."""
    return margin_label(*split_targets(predicted))


def user_principle_scores(p, judge_scores, midpoint: float = MIDPOINT) -> np.ndarray:
    """How a user with preference ``p`` perceives judge scores: ``c + p_j (J_j - c)``.

    Raw judge scores do not depend on the user, so labels are computed on
    this user-signed view. It equals the judge score for ``p_j = 1``, the
    mirrored score for ``p_j = -1`` and the midpoint for ``p_j = 0``.
    """
    p = np.asarray(p, dtype=np.float64)
    j = np.asarray(judge_scores, dtype=np.float64)
    return midpoint + p * (j - midpoint)


def make_label(strategy: str, scores_plus, scores_minus) -> RoutingLabel:
    if strategy == "margin":
        return margin_label(scores_plus, scores_minus)
    if strategy == "two_sided":
        return two_sided_label(scores_plus, scores_minus)
    if strategy == "one_sided":
        return one_sided_label(scores_plus)
    raise InvalidConfigError(f"unknown classification strategy {strategy!r}")
