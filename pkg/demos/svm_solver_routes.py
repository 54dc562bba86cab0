"""
Three routes through the linear SVM
===================================

Every scenario is dispatched to one of three coordinate solvers. Here we
train each on the same small problem and look at what they report.
"""

import warnings

import numpy as np

from motolbp import SvmScenario, objective_value, predict, train

rng = np.random.default_rng(3)
X = rng.normal(size=(60, 4))
y = np.where(X @ np.array([1.5, -1.0, 0.0, 0.0]) + 0.3 * rng.normal(size=60) > 0, 1, -1)

scenarios = {
    "L2 squared hinge, dual CD": SvmScenario(C=1.0),
    "L2 hinge, dual CD": SvmScenario(C=1.0, loss="hinge"),
    "L1 squared hinge, primal CDN": SvmScenario(C=1.0, penalty="l1", dual=False),
    "Crammer-Singer": SvmScenario(C=1.0, multi_class="crammer_singer"),
}

for name, scenario in scenarios.items():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = train(X, y, scenario)
    d = model.diagnostics
    accuracy = np.mean(predict(model, X) == y)
    print(f"{name:30s} solver={d['solver']:15s} passes={d['iterations']:4d} "
          f"objective={objective_value(model, X, y):8.4f} train acc={accuracy:.3f}")

# The L1 penalty zeroes out the two irrelevant features exactly.
sparse = train(X, y, SvmScenario(C=0.05, penalty="l1", dual=False))
print("L1 weights at C=0.05:", np.round(sparse.weights, 4))

# A hard-margin toy case with a closed-form answer: w = (1, 0), objective 0.5.
toy = train(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, -1]),
            SvmScenario(C=150, loss="hinge", fit_intercept=False))
print("two-point weights:", toy.weights, "objective:", toy.diagnostics["final_objective"])
