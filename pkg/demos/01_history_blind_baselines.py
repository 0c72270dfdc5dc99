"""
History-blind policies under random mappings
============================================

A response that never looks at the user should earn zero reward on average
once the attribute-to-principle mapping is resampled, no matter how biased
or noisy the judge is. This script checks a few grid cells and then freezes
the mapping to show what goes wrong without resampling.
"""
import numpy as np

from apmbench.calibration import (SyntheticJudge, bias_patterns, simulate_baseline_reward,
                                  simulate_baseline_winrate, simulate_oracle_policy)

m = n = 10
samples = 50_000

# a judge that loves every principle (+4 on all of them) and is noisy
judge = SyntheticJudge(np.full(m, 4.0), noise_sd=1.0)

for kind in ("signed_permutation", "gaussian"):
    r = simulate_baseline_reward(judge, samples, kind, (m, n), k=1, seed=1)
    w = simulate_baseline_winrate(judge, samples, kind, (m, n), k=1, seed=2)
    lo, hi = r.reward_ci()
    print(f"{kind:>19}: mean reward {r.mean_reward:+.4f}  99% CI [{lo:+.4f}, {hi:+.4f}]  "
          f"half-tie win-rate {w.half_tie_winrate:.4f}  strict {w.strict_winrate:.4f}")

# A judge whose bias differs by principle. The simulated responses pick up
# some of the user's style, so with one mapping shared by every sample that
# correlation no longer averages out.
mixed = SyntheticJudge(bias_patterns(m)["mixed"], noise_sd=1.0)
for freeze in (False, True):
    r = simulate_baseline_reward(mixed, samples, "gaussian", (m, n), k=1, seed=2, freeze_mapping=freeze)
    print(f"{'frozen' if freeze else 'resampled'} mapping: mean reward {r.mean_reward:+.3f}, "
          f"{abs(r.mean_reward) / r.reward_std_error:.1f} standard errors from zero")

# A policy that is told the user's top principle does separate.
compliant = SyntheticJudge(np.zeros(m), noise_sd=1.0, compliance_gain=2.0)
oracle = simulate_oracle_policy(compliant, samples, (m, n), k=1, seed=3)
print(f"oracle: mean reward {oracle.mean_reward:+.3f}, win-rate vs baseline {oracle.half_tie_winrate:.3f}")
