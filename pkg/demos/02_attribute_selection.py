"""
Picking a small set of user attributes
======================================

Planted data: two independent latent factors, six attributes each. The
entropy filter, parallel analysis and Varimax should find two components
and pick the strongest attribute of each block.
"""
import numpy as np

from apmbench.selection import (correlation_matrix, jacobi_eigh, parallel_analysis, planted_factor_scores,
                                select_attributes)

matrix, planted = planted_factor_scores(n_rows=5000, seed=0)
print("attributes:", matrix.names)

# The eigenvalues tell most of the story already.
w, _ = jacobi_eigh(correlation_matrix(matrix.scores))
pa = parallel_analysis(w, matrix.scores.shape[0], n_surrogates=50, seed=0)
print("observed eigenvalues:", np.round(w[:4], 3))
print("95th pct of noise:   ", np.round(pa.thresholds[:4], 3))
print("k_max =", pa.k_max)

report = select_attributes(matrix, n_surrogates=50, seed=0)
print()
print(report.table(top=3))
print("chosen:", report.representative_names, " planted:", [matrix.names[i] for i in planted])

trace = np.array(report.criterion_trace)
print("varimax criterion per sweep:", np.round(trace, 5))
