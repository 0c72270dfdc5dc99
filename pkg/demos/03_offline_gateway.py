"""
The offline gateway
===================

Every model role has a deterministic synthetic stand-in. Here we rewrite a
prompt in a user's style, generate an instructed response, judge it from
both sides and look at the judge diagnostics.
"""
import tempfile

import numpy as np

from apmbench.calibration import SyntheticJudge
from apmbench.catalog import default_catalog
from apmbench.core import sample_attribute_vector
from apmbench.gateway import SyntheticBackend, build_gateway, judge_anticorrelation, judge_balance
from apmbench.personalizers import generate, instruction_for
from apmbench.users import rewrite_prompt

catalog = default_catalog().subset(4, 4)
judge = SyntheticJudge(np.zeros(4), noise_sd=1.0, compliance_gain=2.0)
gw = build_gateway({}, cache_dir=tempfile.mkdtemp(), synthetic=SyntheticBackend(catalog, judge), catalog=catalog)

a = sample_attribute_vector(4, 2, seed=11)
print("attributes:", a.entries, "->", rewrite_prompt(gw, "How do tides work?", a))

plain = generate(gw, "How do tides work?")
steered = generate(gw, "How do tides work?", instruction_for(catalog, 2, +1))
print("plain:  ", plain)
print("steered:", steered)
print("judge (plain):  ", gw.judge_scores(plain))
print("judge (steered):", gw.judge_scores(steered))

# One response is noisy. Averaged over prompts the instruction moves
# principle 2 by about the compliance gain and leaves the rest alone.
qs = [f"Tell me about topic {i}." for i in range(100)]
base = np.mean([gw.judge_scores(generate(gw, q)) for q in qs], axis=0)
told = np.mean([gw.judge_scores(generate(gw, q, instruction_for(catalog, 2, +1))) for q in qs], axis=0)
print("mean shift per principle:", np.round(told - base, 2))

# Repeat a call: it comes from the cache.
before = gw.network_calls
gw.judge_scores(steered)
print("extra backend calls on repeat:", gw.network_calls - before)

# Follow vs avoid framing. A consistent judge gives s+ + s- close to 11.
texts = [generate(gw, f"Question {i}") for i in range(200)]
plus = np.array([gw.judge_scores(t, [0])[0] for t in texts])
minus = np.array([gw.judge_scores(t, [0], direction=-1)[0] for t in texts])
print(f"balance {judge_balance(plus, minus):.3f}, anticorrelation {judge_anticorrelation(plus, minus):+.3f}")
