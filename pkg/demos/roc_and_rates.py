"""
Contingency tables, rates and AUC
=================================

Rates come from hard labels; AUC comes from the continuous decision scores,
with tied scores collapsed into one ROC vertex.
"""

import numpy as np

from motolbp import ContingencyTable, rates, roc_auc, roc_curve

# A classifier that gets 198 of 216 cells right in each class.
t = ContingencyTable(tp=198, fp=18, fn=18, tn=198)
r = rates(t)
print(f"precision {r.precision:.3f}  accuracy {r.accuracy:.3f}  tnr {r.tnr:.3f}")

# Precision is undefined, not zero, when nothing is predicted positive.
print("precision with no positive calls:", rates(ContingencyTable(0, 0, 5, 5)).precision)

rng = np.random.default_rng(1)
truth = np.array(["positive"] * 50 + ["negative"] * 50)
scores = np.r_[rng.normal(1.0, 1.0, 50), rng.normal(-1.0, 1.0, 50)].round(1)  # rounding creates ties
fpr, tpr = roc_curve(scores, truth)
print("ROC vertices:", fpr.size, " AUC:", roc_auc(scores, truth))
print("negated scores give 1 - AUC:", roc_auc(-scores, truth))
