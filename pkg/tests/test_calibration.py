import itertools

import numpy as np
import pytest

from apmbench.calibration import (
    SyntheticJudge, batch_attributes, batch_preferences, calibration_grid, oracle_instruction, run_grid,
    simulate_baseline_reward, simulate_baseline_winrate, simulate_oracle_policy,
)
from apmbench.core import MappingKind, preference_vector
from apmbench.errors import InvalidDimensionError


def test_judge_finish_and_compliance():
    j = SyntheticJudge.uniform(3, bias=1.0, compliance_gain=2.0)
    s = j.score(np.array([5.5, 9.8, 1.0]), np.zeros(3), instruction=(0, -1))
    assert s.tolist() == [4.0, 10.0, 2.0]
    assert j.score_avoid(np.full(3, 5.5), np.zeros(3)).tolist() == [4.0, 4.0, 4.0]


def test_batch_attributes_have_k_active():
    a = batch_attributes(500, 6, 2, np.random.default_rng(0))
    assert np.all(np.count_nonzero(a, axis=1) == 2)


def test_batch_signed_permutation_preserves_structure():
    rng = np.random.default_rng(1)
    a = batch_attributes(400, 5, 1, rng)
    p = batch_preferences(MappingKind.SIGNED_PERMUTATION, 5, 5, a, rng)
    assert np.all(np.count_nonzero(p, axis=1) == 1)
    assert np.all(np.abs(p).sum(axis=1) == 1)


def test_exact_enumeration_zero_reward_for_any_scores():
    # all 2x2 signed permutations and all k=1 attribute vectors, arbitrary attribute-dependent scores
    perms = [np.array(pm) for pm in ([[1, 0], [0, 1]], [[0, 1], [1, 0]])]
    signs = list(itertools.product([-1, 1], repeat=2))
    avecs = [np.array(v) for v in ([1, 0], [-1, 0], [0, 1], [0, -1])]
    rng = np.random.default_rng(3)
    score_of = {tuple(a): rng.integers(1, 11, 2) for a in avecs}
    total = 0.0
    for pm, sg in itertools.product(perms, signs):
        c = pm * np.array(sg)[:, None]
        for a in avecs:
            total += preference_vector(c, a) @ score_of[tuple(a)]
    assert total == 0.0


def test_baseline_reward_small_run_passes_and_is_deterministic():
    judge = SyntheticJudge.uniform(4, bias=3.0, noise_sd=1.0)
    r1 = simulate_baseline_reward(judge, 20_000, "signed_permutation", (4, 4), 1, 5)
    r2 = simulate_baseline_reward(judge, 20_000, "signed_permutation", (4, 4), 1, 5)
    assert r1.mean_reward == r2.mean_reward
    assert r1.passed


def test_low_power_flag_is_informational():
    judge = SyntheticJudge.uniform(3)
    r = simulate_baseline_reward(judge, 200, "gaussian", (3, 3), 1, 0)
    assert r.flags["info_low_power"]
    lo, hi = r.reward_ci()
    assert hi - lo > 0.2


def test_winrate_small_run():
    judge = SyntheticJudge.uniform(4, bias=2.0, noise_sd=1.0)
    w = simulate_baseline_winrate(judge, 20_000, "signed_permutation", (4, 4), 1, 2)
    assert w.passed and w.strict_winrate <= 0.5 and w.tie_fraction > 0


def test_frozen_mapping_with_leak_detected():
    judge = SyntheticJudge.uniform(4, noise_sd=0.0, integer=False, clamp=False)
    r = simulate_baseline_reward(judge, 20_000, "gaussian", (4, 4), 1, 0, style_leak=1.0, freeze_mapping=True)
    assert abs(r.mean_reward) > 3 * r.reward_std_error


def test_oracle_separates():
    judge = SyntheticJudge.uniform(4, noise_sd=1.0, compliance_gain=2.0)
    r = simulate_oracle_policy(judge, 5000, (4, 4), 1, 0)
    assert r.flags["info_separated"] and r.half_tie_winrate > 0.6


def test_oracle_instruction_ties_lowest_index():
    j, d = oracle_instruction(np.array([[0.5, -0.5], [0.0, 0.0], [0.1, -0.9]]))
    assert j.tolist() == [0, 0, 1] and d.tolist() == [1, 1, -1]


def test_grid_shape_and_dimension_check():
    assert len(calibration_grid(10)) == 6 * 3 * 2 * 2
    with pytest.raises(InvalidDimensionError):
        simulate_baseline_reward(SyntheticJudge.uniform(3), 10, "gaussian", (4, 4), 1, 0)


def test_run_grid_small():
    cells = calibration_grid(4, noises=(1.0,), ks=(1,))
    out = run_grid(cells, m=4, n=4, n_samples=3000, seed=0)
    assert len(out) == len(cells)
    assert all(w is not None for _, _, w in out)
