"""Attribute vectors, mapping matrices, the reward functional and benchmark metrics."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidConfigError,
    InvalidDimensionError,
    ScoreRangeError,
)
from .rng import make_rng

SCORE_MIN = 1.0
SCORE_MAX = 10.0
MIDPOINT = (SCORE_MIN + SCORE_MAX) / 2  # 5.5
DEFAULT_TIE_EPSILON = 1e-9


class MappingKind(str, enum.Enum):
    SIGNED_PERMUTATION = "signed_permutation"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True, eq=False)
class AttributeVector:
    entries: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 1 or e.size == 0:
            raise InvalidDimensionError("attribute vector must be a nonempty 1-d array")
        if not np.all(np.isin(e, (-1, 0, 1))):
            raise InvalidConfigError("attribute entries must lie in {-1, 0, +1}")
        object.__setattr__(self, "entries", e.astype(np.int8))

    @property
    def n(self) -> int:
        return int(self.entries.size)

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.entries))

    def active(self) -> list[tuple[int, int]]:
        """(index, sign) pairs of the nonzero entries."""
        idx = np.flatnonzero(self.entries)
        return [(int(i), int(self.entries[i])) for i in idx]

    def __eq__(self, other):
        return isinstance(other, AttributeVector) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def to_record(self) -> dict:
        return {"kind": "attribute", "seed": self.seed, "dims": [self.n],
                "values": [float(v) for v in self.entries]}

    @classmethod
    def from_record(cls, rec: dict) -> "AttributeVector":
        vals = np.asarray(rec["values"], dtype=float)
        if list(vals.shape) != list(rec["dims"]):
            raise DimensionMismatchError("record dims do not match values")
        return cls(vals.astype(np.int8), seed=rec.get("seed"))


@dataclass(frozen=True, eq=False)
class MappingMatrix:
    values: np.ndarray
    kind: MappingKind
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or 0 in v.shape:
            raise InvalidDimensionError("mapping matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(v)):
            raise InvalidConfigError("mapping matrix entries must be finite")
        kind = MappingKind(self.kind)
        if kind is MappingKind.SIGNED_PERMUTATION and not is_signed_permutation(v):
            raise InvalidConfigError("values are not a signed permutation matrix")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", kind)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        return (isinstance(other, MappingMatrix) and self.kind == other.kind
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.kind, self.values.tobytes()))

    def to_record(self) -> dict:
        return {"kind": self.kind.value, "seed": self.seed, "dims": list(self.shape),
                "values": [float(x) for x in self.values.ravel()]}

    @classmethod
    def from_record(cls, rec: dict) -> "MappingMatrix":
        m, n = rec["dims"]
        vals = np.asarray(rec["values"], dtype=np.float64)
        if vals.size != m * n:
            raise DimensionMismatchError("record dims do not match values")
        return cls(vals.reshape(m, n), MappingKind(rec["kind"]), seed=rec.get("seed"))


def is_signed_permutation(values: np.ndarray) -> bool:
    v = np.asarray(values)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        return False
    nz = v != 0
    return (bool(np.all(np.isin(v, (-1.0, 0.0, 1.0))))
            and bool(np.all(nz.sum(axis=0) == 1)) and bool(np.all(nz.sum(axis=1) == 1)))


def _check_dim(*dims):
    for d in dims:
        if int(d) < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {d}")


def signed_permutation_values(n: int, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(n)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    out = np.zeros((n, n))
    out[perm, np.arange(n)] = signs
    return out


def sample_signed_permutation(n: int, seed: int) -> MappingMatrix:
    """Uniform random permutation structure with independent uniform signs.

    Column ``i`` (attribute ``i``) has its single nonzero in row ``perm[i]``.
    """
    _check_dim(n)
    return MappingMatrix(signed_permutation_values(n, make_rng(seed)), MappingKind.SIGNED_PERMUTATION, seed)


def sample_gaussian_mapping(m: int, n: int, seed: int) -> MappingMatrix:
    _check_dim(m, n)
    return MappingMatrix(make_rng(seed).standard_normal((m, n)), MappingKind.GAUSSIAN, seed)


def sample_mapping(kind, m: int, n: int, seed: int) -> MappingMatrix:
    kind = MappingKind(kind)
    if kind is MappingKind.SIGNED_PERMUTATION:
        if m != n:
            raise InvalidConfigError("signed permutation mappings require M == N")
        return sample_signed_permutation(n, seed)
    return sample_gaussian_mapping(m, n, seed)


def attribute_values(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    support = rng.choice(n, size=k, replace=False)
    out = np.zeros(n, dtype=np.int8)
    out[support] = rng.choice(np.array([-1, 1], dtype=np.int8), size=k)
    return out


def sample_attribute_vector(n: int, k: int, seed: int) -> AttributeVector:
    """Uniform support of size ``k`` with independent fair signs, so ``a`` and ``-a`` are equally likely."""
    _check_dim(n)
    if not 1 <= k <= n:
        raise InvalidConfigError(f"need 1 <= k <= n, got k={k}, n={n}")
    return AttributeVector(attribute_values(n, k, make_rng(seed)), seed=seed)


def _as_array(x) -> np.ndarray:
    if isinstance(x, AttributeVector):
        return x.entries.astype(np.float64)
    if isinstance(x, MappingMatrix):
        return x.values
    return np.asarray(x, dtype=np.float64)


def preference_vector(c, a) -> np.ndarray:
    """p = C a."""
    cv, av = _as_array(c), _as_array(a)
    if cv.ndim != 2 or av.ndim != 1 or cv.shape[1] != av.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {cv.shape} by {av.shape}")
    return cv @ av


def check_scores(scores, lo: float = SCORE_MIN, hi: float = SCORE_MAX) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise InvalidDimensionError("score vector must be 1-d")
    if np.any(~np.isfinite(s)) or np.any(s < lo) or np.any(s > hi):
        raise ScoreRangeError(f"scores must lie within [{lo}, {hi}]")
    return s


def reward(a, c, scores) -> float:
    """r = a^T C^T J(y) = sum_j p_j J_j(y)."""
    cv, av, sv = _as_array(c), _as_array(a), np.asarray(scores, dtype=np.float64)
    if cv.ndim != 2 or cv.shape != (sv.shape[0], av.shape[0]):
        raise DimensionMismatchError(f"C {cv.shape} incompatible with a {av.shape} and scores {sv.shape}")
    return float(av @ (cv.T @ sv))


def reward_from_preference(p, scores) -> float:
    p, s = np.asarray(p, dtype=np.float64), np.asarray(scores, dtype=np.float64)
    if p.shape != s.shape:
        raise DimensionMismatchError(f"preference {p.shape} vs scores {s.shape}")
    return float(p @ s)


@dataclass
class MetricsSummary:
    mean_delta: float
    wins: int
    losses: int
    ties: int
    wl_ratio: float | None
    half_tie_winrate: float
    per_user_deltas: np.ndarray = field(repr=False)

    @property
    def n_users(self) -> int:
        return self.wins + self.losses + self.ties

    @property
    def wl_defined(self) -> bool:
        return self.wl_ratio is not None

    def to_record(self) -> dict:
        return {"mean_delta": self.mean_delta, "wins": self.wins, "losses": self.losses,
                "ties": self.ties, "wl_ratio": self.wl_ratio,
                "half_tie_winrate": self.half_tie_winrate,
                "per_user_deltas": [float(d) for d in self.per_user_deltas]}

    @classmethod
    def from_record(cls, rec: dict) -> "MetricsSummary":
        return cls(rec["mean_delta"], rec["wins"], rec["losses"], rec["ties"], rec["wl_ratio"],
                   rec["half_tie_winrate"], np.asarray(rec["per_user_deltas"], dtype=float))


def compute_metrics(personalized, baseline, tie_epsilon: float = DEFAULT_TIE_EPSILON) -> MetricsSummary:
    """Per-user deltas, win/loss/tie counts, W/L ratio (ties excluded) and half-tie win-rate.

    ``wl_ratio`` is None when there are no losses.
    """
    pers = np.asarray(personalized, dtype=np.float64)
    base = np.asarray(baseline, dtype=np.float64)
    if pers.size == 0 or base.size == 0:
        raise EmptyInputError("need at least one user")
    if pers.shape != base.shape or pers.ndim != 1:
        raise DimensionMismatchError("personalized and baseline rewards must be equal-length vectors")
    if tie_epsilon < 0:
        raise InvalidConfigError("tie_epsilon must be >= 0")
    delta = pers - base
    wins = int(np.sum(delta > tie_epsilon))
    losses = int(np.sum(delta < -tie_epsilon))
    ties = delta.size - wins - losses
    return MetricsSummary(
        mean_delta=float(delta.mean()),
        wins=wins,
        losses=losses,
        ties=ties,
        wl_ratio=wins / losses if losses > 0 else None,
        half_tie_winrate=(wins + 0.5 * ties) / delta.size,
        per_user_deltas=delta,
    )


def sign_balanced_principle_score(per_principle_scores, seed: int) -> float:
    """Average of per-principle scores after flipping each to ``11 - s`` with probability 1/2."""
    s = check_scores(per_principle_scores)
    if s.size == 0:
        raise EmptyInputError("need at least one principle score")
    flips = make_rng(seed).random(s.size) < 0.5
    return float(np.where(flips, SCORE_MIN + SCORE_MAX - s, s).mean())
