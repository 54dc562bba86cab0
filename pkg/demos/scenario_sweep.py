"""
A scenario sweep on a surrogate texture corpus
==============================================

Smooth-gradient cells play the positive class and noise cells the negative
class. Five balanced bootstrap samples are drawn, each split 70/30, and a
model is trained for each of the twenty scenarios on each sample.
"""

import tempfile

import numpy as np

from motolbp import build_samples, lbp_feature, run_sweep, scenario_table
from motolbp.synthetic import texture_corpus

images, labels = texture_corpus(n_per_class=800, seed=7)
X = np.array([lbp_feature(img) for img in images])
print("feature matrix:", X.shape)

samples = build_samples(labels, X, n_samples=5, master_seed=11)
print("train / test per sample:", len(samples[0].y_train), "/", len(samples[0].y_test))

report = run_sweep(samples, scenario_table())
print(len(report.records), "records")
print(report.summary(master_seed=11))

out = tempfile.mkdtemp(prefix="sweep-")
report.write(out, master_seed=11)
print("tables written to", out)
