"""Monte Carlo checks that history-blind policies score zero reward and a 50% half-tie win-rate.

The simulated world: a history-blind response has a latent per-principle
style level ``base_level + response_sd * z + style_leak * (L @ a)``. The
``L`` term lets the response (through the user's styled prompt) correlate
with the user's attributes, which both results allow. A
:class:`SyntheticJudge` turns latents into 1-10 scores with an arbitrary
per-principle bias, Gaussian noise and optional clamping/rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .core import MIDPOINT, SCORE_MAX, SCORE_MIN, MappingKind, sample_mapping
from .errors import InvalidConfigError, InvalidDimensionError
from .rng import derive_seed, make_rng


@dataclass
class SyntheticJudge:
    bias: np.ndarray
    noise_sd: float = 0.0
    compliance_gain: float = 0.0
    clamp: bool = True
    integer: bool = True

    def __post_init__(self):
        self.bias = np.atleast_1d(np.asarray(self.bias, dtype=np.float64))
        if self.bias.ndim != 1 or self.bias.size == 0:
            raise InvalidDimensionError("judge bias must be a nonempty vector")
        if self.noise_sd < 0:
            raise InvalidConfigError("noise_sd must be >= 0")

    @classmethod
    def uniform(cls, m: int, bias: float = 0.0, **kw) -> "SyntheticJudge":
        return cls(np.full(m, float(bias)), **kw)

    @property
    def m(self) -> int:
        return self.bias.size

    def finish(self, raw: np.ndarray) -> np.ndarray:
        out = np.rint(raw) if self.integer else raw
        if self.clamp:
            out = np.clip(out, SCORE_MIN, SCORE_MAX)
        return out

    def score(self, latent, noise, instruction=None) -> np.ndarray:
        """Scores for one or many responses.

        ``latent`` and ``noise`` are ``(..., M)`` arrays; ``noise`` is
        standard normal and gets scaled by ``noise_sd``. ``instruction`` is an
        optional ``(principle, direction)`` pair (or a pair of index arrays
        for batches) naming the principle the response was told to follow
        (+1) or avoid (-1); the judge shifts that principle by
        ``direction * compliance_gain``.
        """
        raw = np.asarray(latent, dtype=np.float64) + self.bias + self.noise_sd * np.asarray(noise)
        if instruction is not None and self.compliance_gain:
            j, d = instruction
            raw = np.array(raw, copy=True)
            if raw.ndim == 1:
                raw[int(j)] += float(d) * self.compliance_gain
            else:
                rows = np.arange(raw.shape[0])
                raw[rows, np.asarray(j)] += np.asarray(d, dtype=np.float64) * self.compliance_gain
        return self.finish(raw)

    def score_avoid(self, latent, noise, instruction=None) -> np.ndarray:
        """Score for the "avoids the principle" question: the mirror ``11 - s`` before finishing."""
        raw = np.asarray(latent, dtype=np.float64) + self.bias + self.noise_sd * np.asarray(noise)
        if instruction is not None and self.compliance_gain:
            j, d = instruction
            raw = np.array(raw, copy=True)
            raw[..., int(j)] += float(d) * self.compliance_gain
        return self.finish(SCORE_MIN + SCORE_MAX - raw)


@dataclass
class SimulationReport:
    name: str
    n_samples: int
    mean_reward: float
    reward_std_error: float
    half_tie_winrate: float | None = None
    winrate_std_error: float | None = None
    strict_winrate: float | None = None
    tie_fraction: float | None = None
    confidence_level: float = 0.99
    flags: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def z(self) -> float:
        return NormalDist().inv_cdf(0.5 + self.confidence_level / 2)

    def reward_ci(self) -> tuple[float, float]:
        h = self.z * self.reward_std_error
        return self.mean_reward - h, self.mean_reward + h

    def winrate_ci(self) -> tuple[float, float]:
        if self.half_tie_winrate is None:
            raise ValueError("report carries no win-rate")
        h = self.z * self.winrate_std_error
        return self.half_tie_winrate - h, self.half_tie_winrate + h

    @property
    def passed(self) -> bool:
        return all(v for k, v in self.flags.items() if not k.startswith("info_"))

    def to_record(self) -> dict:
        return {"name": self.name, "n_samples": self.n_samples, "mean_reward": self.mean_reward,
                "reward_std_error": self.reward_std_error, "half_tie_winrate": self.half_tie_winrate,
                "winrate_std_error": self.winrate_std_error, "strict_winrate": self.strict_winrate,
                "tie_fraction": self.tie_fraction, "confidence_level": self.confidence_level,
                "flags": dict(self.flags), "params": dict(self.params), "passed": self.passed}


class _Moments:
    """Streaming mean/variance with Chan's parallel merge."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        nb = x.size
        if nb == 0:
            return
        mb = float(x.mean())
        m2b = float(((x - mb) ** 2).sum())
        n = self.n + nb
        d = mb - self.mean
        self.mean += d * nb / n
        self.m2 += m2b + d * d * self.n * nb / n
        self.n = n

    @property
    def std_error(self) -> float:
        if self.n < 2:
            return math.inf
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


# -- batched samplers --------------------------------------------------------

def batch_attributes(n_samples: int, n: int, k: int, rng) -> np.ndarray:
    if not 1 <= k <= n:
        raise InvalidConfigError(f"need 1 <= k <= n, got k={k}, n={n}")
    support = np.argsort(rng.random((n_samples, n)), axis=1)[:, :k]
    a = np.zeros((n_samples, n))
    np.put_along_axis(a, support, rng.choice(np.array([-1.0, 1.0]), size=(n_samples, k)), axis=1)
    return a


def batch_preferences(kind, m: int, n: int, a: np.ndarray, rng) -> np.ndarray:
    """p = C a for a fresh C per row of ``a``."""
    kind = MappingKind(kind)
    s = a.shape[0]
    if kind is MappingKind.SIGNED_PERMUTATION:
        if m != n:
            raise InvalidConfigError("signed permutation mappings require M == N")
        perm = np.argsort(rng.random((s, n)), axis=1)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(s, n))
        p = np.zeros((s, m))
        np.put_along_axis(p, perm, signs * a, axis=1)
        return p
    c = rng.standard_normal((s, m, n))
    return np.einsum("smn,sn->sm", c, a)


def oracle_instruction(p: np.ndarray):
    """Batched (j*, sign) with j* = argmax |p_j| (lowest index on ties)."""
    j = np.argmax(np.abs(p), axis=1)
    d = np.sign(p[np.arange(p.shape[0]), j])
    d[d == 0] = 1.0
    return j, d


def _leak_matrix(m: int, n: int, seed: int) -> np.ndarray:
    return make_rng(seed, "leak").standard_normal((m, n))


def _validate(judge: SyntheticJudge, n_samples: int, dims):
    m, n = dims
    if m < 1 or n < 1:
        raise InvalidDimensionError("degenerate dimensions")
    if judge.m != m:
        raise InvalidDimensionError(f"judge covers {judge.m} principles, dims ask for {m}")
    if n_samples < 1:
        raise InvalidConfigError("n_samples must be >= 1")


def _chunks(n_samples: int, chunk: int):
    start = 0
    idx = 0
    while start < n_samples:
        size = min(chunk, n_samples - start)
        yield idx, size
        start += size
        idx += 1


def _responses(s, m, a, leak, style_leak, response_sd, rng):
    latent = MIDPOINT + response_sd * rng.standard_normal((s, m))
    if style_leak:
        latent += style_leak * (a @ leak.T)
    return latent


def simulate_baseline_reward(judge: SyntheticJudge, n_samples: int, mapping_kind, dims, k: int, seed: int, *,
                             style_leak: float = 0.5, response_sd: float = 1.0, freeze_mapping: bool = False,
                             confidence: float = 0.99, chunk_size: int = 25_000) -> SimulationReport:
    """Mean reward of a history-blind policy under freshly sampled mappings.

    ``freeze_mapping=True`` draws one C for the whole run (negative control).
    """
    _validate(judge, n_samples, dims)
    m, n = dims
    leak = _leak_matrix(m, n, seed)
    frozen = sample_mapping(mapping_kind, m, n, derive_seed(seed, "frozen")).values if freeze_mapping else None
    mom = _Moments()
    for idx, size in _chunks(n_samples, chunk_size):
        rng = make_rng(seed, "chunk", idx)
        a = batch_attributes(size, n, k, rng)
        p = a @ frozen.T if freeze_mapping else batch_preferences(mapping_kind, m, n, a, rng)
        latent = _responses(size, m, a, leak, style_leak, response_sd, rng)
        scores = judge.score(latent, rng.standard_normal((size, m)))
        mom.add(np.sum(p * scores, axis=1))
    rep = SimulationReport("baseline_reward", n_samples, mom.mean, mom.std_error, confidence_level=confidence,
                           params=_params(judge, mapping_kind, dims, k, seed, style_leak, response_sd,
                                          freeze_mapping=freeze_mapping))
    lo, hi = rep.reward_ci()
    rep.flags["zero_in_ci"] = bool(lo <= 0.0 <= hi)
    if n_samples < 1000:
        rep.flags["info_low_power"] = True
    return rep


def simulate_baseline_winrate(judge: SyntheticJudge, n_samples: int, mapping_kind, dims, k: int, seed: int, *,
                              advantage=None, style_leak: float = 0.5, response_sd: float = 1.0,
                              confidence: float = 0.99, chunk_size: int = 25_000) -> SimulationReport:
    """Half-tie win-rate of history-blind response A over history-blind response B.

    ``advantage`` is a per-principle latent offset for A (defaults to the
    judge's own bias, i.e. A is the kind of response the judge favours).
    """
    _validate(judge, n_samples, dims)
    m, n = dims
    adv = judge.bias if advantage is None else np.broadcast_to(np.asarray(advantage, dtype=float), (m,))
    leak = _leak_matrix(m, n, seed)
    w_half, r_mom = _Moments(), _Moments()
    strict = ties = 0
    for idx, size in _chunks(n_samples, chunk_size):
        rng = make_rng(seed, "chunk", idx)
        a = batch_attributes(size, n, k, rng)
        p = batch_preferences(mapping_kind, m, n, a, rng)
        lat_a = _responses(size, m, a, leak, style_leak, response_sd, rng) + adv
        lat_b = _responses(size, m, a, leak, style_leak, response_sd, rng)
        d = judge.score(lat_a, rng.standard_normal((size, m))) - judge.score(lat_b, rng.standard_normal((size, m)))
        s = np.sum(p * d, axis=1)
        r_mom.add(s)
        # S is exactly integral for signed permutations with integer scores; otherwise
        # exact zeros only happen when d == 0.
        win = (s > 0).astype(float)
        tie = (s == 0).astype(float)
        w_half.add(win + 0.5 * tie)
        strict += int(win.sum())
        ties += int(tie.sum())
    integer_s = MappingKind(mapping_kind) is MappingKind.SIGNED_PERMUTATION and judge.integer
    rep = SimulationReport("baseline_winrate", n_samples, r_mom.mean, r_mom.std_error,
                           half_tie_winrate=w_half.mean, winrate_std_error=w_half.std_error,
                           strict_winrate=strict / n_samples, tie_fraction=ties / n_samples,
                           confidence_level=confidence,
                           params=_params(judge, mapping_kind, dims, k, seed, style_leak, response_sd))
    lo, hi = rep.winrate_ci()
    rep.flags["half_in_ci"] = bool(lo <= 0.5 <= hi)
    if integer_s:
        rep.flags["strict_le_half"] = bool(rep.strict_winrate <= 0.5)
    return rep


def simulate_oracle_policy(judge: SyntheticJudge, n_samples: int, dims, k: int, seed: int, *,
                           mapping_kind=MappingKind.SIGNED_PERMUTATION, style_leak: float = 0.5,
                           response_sd: float = 1.0, confidence: float = 0.99,
                           chunk_size: int = 25_000) -> SimulationReport:
    """A policy told the user's true top principle and direction, compared against the history-blind baseline.

    ``mean_reward`` is the oracle response's reward; the win-rate is oracle vs baseline.
    """
    _validate(judge, n_samples, dims)
    m, n = dims
    leak = _leak_matrix(m, n, seed)
    r_mom, w_half = _Moments(), _Moments()
    for idx, size in _chunks(n_samples, chunk_size):
        rng = make_rng(seed, "chunk", idx)
        a = batch_attributes(size, n, k, rng)
        p = batch_preferences(mapping_kind, m, n, a, rng)
        latent = _responses(size, m, a, leak, style_leak, response_sd, rng)
        j, d = oracle_instruction(p)
        oracle_scores = judge.score(latent, rng.standard_normal((size, m)), instruction=(j, d))
        base_scores = judge.score(latent, rng.standard_normal((size, m)))
        r_mom.add(np.sum(p * oracle_scores, axis=1))
        s = np.sum(p * (oracle_scores - base_scores), axis=1)
        w_half.add((s > 0) + 0.5 * (s == 0))
    rep = SimulationReport("oracle_policy", n_samples, r_mom.mean, r_mom.std_error,
                           half_tie_winrate=w_half.mean, winrate_std_error=w_half.std_error,
                           confidence_level=confidence,
                           params=_params(judge, mapping_kind, dims, k, seed, style_leak, response_sd))
    lo_r, _ = rep.reward_ci()
    lo_w, _ = rep.winrate_ci()
    separated = lo_r > 0 and lo_w > 0.5
    rep.flags["info_separated"] = bool(separated)
    rep.flags["info_indistinguishable"] = not separated
    return rep


def _params(judge, kind, dims, k, seed, style_leak, response_sd, **extra):
    return {"bias": [float(b) for b in judge.bias], "noise_sd": judge.noise_sd,
            "compliance_gain": judge.compliance_gain, "clamp": judge.clamp, "integer": judge.integer,
            "mapping_kind": MappingKind(kind).value, "dims": list(dims), "k": k, "seed": seed,
            "style_leak": style_leak, "response_sd": response_sd, **extra}


# -- grid ---------------------------------------------------------------------

BIAS_LEVELS = (-4.0, -2.0, 0.0, 2.0, 4.0)
NOISE_LEVELS = (0.0, 1.0, 3.0)


def bias_patterns(m: int, levels=BIAS_LEVELS) -> dict[str, np.ndarray]:
    """Uniform bias at every level plus one mixed pattern cycling through the levels."""
    pats = {f"{lv:+g}": np.full(m, lv) for lv in levels}
    pats["mixed"] = np.resize(np.asarray(levels, dtype=float), m)
    return pats


@dataclass(frozen=True)
class GridCell:
    bias_name: str
    noise_sd: float
    mapping_kind: str
    k: int
    clamp: bool = True

    @property
    def label(self) -> str:
        return f"bias={self.bias_name} noise={self.noise_sd:g} {self.mapping_kind} k={self.k} clamp={self.clamp}"


def calibration_grid(m: int = 10, levels=BIAS_LEVELS, noises=NOISE_LEVELS,
                     kinds=(MappingKind.SIGNED_PERMUTATION, MappingKind.GAUSSIAN),
                     ks=(1, 2), clamps=(True,)) -> list[GridCell]:
    names = list(bias_patterns(m, levels))
    return [GridCell(b, float(s), MappingKind(kd).value, int(k), bool(c))
            for b, s, kd, k, c in itertools.product(names, noises, kinds, ks, clamps)]


def run_grid(cells, *, m: int = 10, n: int = 10, n_samples: int = 100_000, seed: int = 0,
             levels=BIAS_LEVELS, negative_control: bool = False, **kw) -> list[tuple[GridCell, SimulationReport, SimulationReport]]:
    """Run both checks for every cell; returns ``(cell, reward_report, winrate_report)`` triples.

    With ``negative_control=True`` the reward check freezes C and the win-rate
    check is skipped (``None``).
    """
    pats = bias_patterns(m, levels)
    out = []
    for i, cell in enumerate(cells):
        judge = SyntheticJudge(pats[cell.bias_name], noise_sd=cell.noise_sd, clamp=cell.clamp)
        cseed = derive_seed(seed, "cell", i)
        r = simulate_baseline_reward(judge, n_samples, cell.mapping_kind, (m, n), cell.k, cseed,
                                     freeze_mapping=negative_control, **kw)
        w = None if negative_control else simulate_baseline_winrate(
            judge, n_samples, cell.mapping_kind, (m, n), cell.k, derive_seed(cseed, "winrate"), **kw)
        out.append((cell, r, w))
    return out


def format_grid(results) -> str:
    lines = [f"{'cell':<60} {'mean_r':>9} {'se':>7} {'W~':>7} {'se':>7} {'strict':>7} ok"]
    for cell, r, w in results:
        wr = f"{w.half_tie_winrate:7.4f} {w.winrate_std_error:7.4f} {w.strict_winrate:7.4f}" if w else " " * 23
        ok = r.passed and (w is None or w.passed)
        lines.append(f"{cell.label:<60} {r.mean_reward:9.4f} {r.reward_std_error:7.4f} {wr} {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines)
