"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

import itertools
import time
import warnings

import numpy as np
import pytest

from motolbp.harness import build_samples, run_sweep, scenario_table
from motolbp.lbp import LbpParams, lbp_code, lbp_feature, lbp_map, uniform_code
from motolbp.metrics import ContingencyTable, rates, roc_auc
from motolbp.svm import ConvergenceWarning, SvmScenario, objective_value, predict, train
from motolbp.synthetic import texture_corpus

from oracles import brute_auc, crammer_singer_reference, l1_primal_reference, l2_dual_reference


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_c1_metric_identity(verdict):
    n = 216
    worst = 0.0
    for tpr, fpr, precision, accuracy in [(0.916, 0.273, 0.771, 0.821), (0.917, 0.085, 0.916, 0.916)]:
        tp, fp = round(tpr * n), round(fpr * n)
        r = rates(ContingencyTable(tp, fp, n - tp, n - fp))
        worst = max(worst, abs(r.precision - precision), abs(r.accuracy - accuracy))
    verdict(1, "precision/accuracy from published TPR/FPR", worst <= 0.002, f"max deviation {worst:.4f}")


def _binary(rng, n, d):
    X = rng.normal(size=(n, d))
    y = np.where(X @ rng.normal(size=d) + 0.5 * rng.normal(size=n) > 0, 1, -1)
    y[:2] = [1, -1]
    return X, y


def _multiclass(rng, n, d, K):
    X = rng.normal(size=(n, d))
    y = np.argmax(X @ rng.normal(size=(d, K)) + 0.5 * rng.normal(size=(n, K)), axis=1)
    y[:K] = np.arange(K)
    return X, y


def test_c2_solver_oracles(verdict):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    Cs = (0.1, 1.0, 150.0)
    worst, kkt_ok, count = 0.0, True, 0
    tight = dict(tol=1e-10, max_iter=200_000)
    cases = []
    for i in range(36):
        loss = ("hinge", "squared_hinge")[i % 2]
        dual = loss == "hinge" or i % 4 != 1
        cases.append(("l2", SvmScenario(C=Cs[i % 3], loss=loss, dual=dual, **tight)))
    for i in range(12):
        cases.append(("l1", SvmScenario(C=Cs[i % 3], penalty="l1", dual=False, tol=1e-9, max_iter=200_000)))
    for i in range(12):
        cases.append((2 + i % 2, SvmScenario(C=Cs[i % 3], multi_class="crammer_singer", **tight)))

    for kind, sc in cases:
        n, d = int(rng.integers(5, 31)), int(rng.integers(1, 6))
        if kind in ("l2", "l1"):
            X, y = _binary(rng, n, d)
        else:
            X, y = _multiclass(rng, n, d, kind)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            model = train(X, y, sc, classes=tuple(range(kind)) if isinstance(kind, int) else None)
        if kind == "l2":
            ref, _ = l2_dual_reference(X, y, sc.C, sc.loss, max_iter=20_000)
        elif kind == "l1":
            ref, _ = l1_primal_reference(X, y, sc.C, max_iter=20_000)
        else:
            ref, _ = crammer_singer_reference(X, y, kind, sc.C, max_iter=20_000)
        obj = objective_value(model, X, y)
        worst = max(worst, abs(obj - ref) / max(abs(ref), 1e-300))
        diag = model.diagnostics
        if diag["converged"] and not diag["max_kkt_violation"] < sc.tol:
            kkt_ok = False
        count += 1
    elapsed = time.perf_counter() - start
    ok = count >= 50 and worst <= 1e-6 and kkt_ok and elapsed < 120
    verdict(2, "trainers match independent reference solvers", ok,
            f"{count} instances, worst relative gap {worst:.2e}, KKT ok {kkt_ok}, {elapsed:.1f}s")


def test_c3_analytic_svm(verdict):
    X2, y2 = np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, -1])
    hard = train(X2, y2, SvmScenario(C=150, loss="hinge", fit_intercept=False))
    ok_w = np.max(np.abs(hard.weights - [1, 0])) <= 1e-6
    ok_obj = abs(objective_value(hard, X2, y2) - 0.5) <= 1e-6
    l1 = {C: train(np.array([[1.0]]), np.array([1]),
                   SvmScenario(C=C, penalty="l1", dual=False, fit_intercept=False)).weights[0]
          for C in (0.25, 150)}
    ok_l1 = l1[0.25] == 0.0 and abs(l1[150] - 0.99667) <= 1e-5
    verdict(3, "closed-form SVM instances", ok_w and ok_obj and ok_l1,
            f"w={hard.weights.round(9).tolist()}, L1 w={l1[0.25]:g}/{l1[150]:.6f}")


def test_c4_lbp_fixtures_and_properties(verdict):
    rng = np.random.default_rng(4)
    checks = {}
    checks["constant"] = bool(np.all(lbp_map(np.full((120, 210), 93, np.uint8)) == 0))
    fixture = np.array([[1, 2, 3], [4, 5, 6], [7, 8, 9]], np.uint8)
    checks["fixture"] = lbp_code(fixture, 1, 1, LbpParams(4, 1)) == 2
    invariant = normalized = True
    for _ in range(100):
        h, w = rng.integers(8, 40, size=2)
        img = rng.integers(0, 200, (h, w), dtype=np.uint8)
        base = lbp_map(img)
        shift = int(rng.integers(1, 56))
        invariant &= np.array_equal(base, lbp_map(img + np.uint8(shift)))
        # nonlinear increasing lookup; checked where neighbors sit on the lattice
        lut = np.cumsum(rng.integers(1, 3, size=256))
        small = img // 2
        for params in (LbpParams(4, 1), LbpParams(4, 2)):
            invariant &= np.array_equal(lbp_map(small, params), lbp_map(lut[small], params))
        f = lbp_feature(img)
        normalized &= f.shape == (26,) and abs(f.sum() - 1) <= 1e-9 and bool(np.all(f >= 0))
    checks["monotone"] = bool(invariant)
    checks["normalized"] = bool(normalized)
    rotation = True
    for value in range(1 << 8):
        bits = [(value >> k) & 1 for k in range(8)]
        code = uniform_code(bits)
        rotation &= all(uniform_code(bits[s:] + bits[:s]) == code for s in range(8))
    checks["rotation"] = bool(rotation)
    failed = [k for k, v in checks.items() if not v]
    verdict(4, "LBP fixtures and properties", not failed, "all checks hold" if not failed else f"failed {failed}")


def test_c5_auc_pair_counting(verdict):
    rng = np.random.default_rng(5)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(2, 201))
        # scores from a small alphabet guarantee ties
        scores = rng.integers(0, max(2, n // 4), size=n) / 7.0
        mask = rng.random(n) < rng.uniform(0.2, 0.8)
        mask[0], mask[1] = True, False
        truth = np.where(mask, "positive", "negative")
        if roc_auc(scores, truth) != brute_auc(scores, mask):
            mismatches += 1
    verdict(5, "trapezoidal AUC equals pair counting", mismatches == 0, f"{mismatches} mismatches in 100 sets")


@pytest.fixture(scope="module")
def surrogate():
    start = time.perf_counter()
    images, labels = texture_corpus(800, seed=7)
    X = np.array([lbp_feature(img) for img in images])
    samples = build_samples(labels, X, n_samples=5, master_seed=11)
    report = run_sweep(samples, scenario_table())
    return samples, report, time.perf_counter() - start


def test_c6_harness_shape(verdict, surrogate):
    samples, report, elapsed = surrogate
    sizes_ok = all(
        len(s.pool_index) == 1442
        and len(s.y_train) == 1010 and len(s.y_test) == 432
        and sum(v == "positive" for v in s.y_train) == 505
        and sum(v == "positive" for v in s.y_test) == 216
        for s in samples)
    cells = {(r["scenario_id"], r["sample_id"]) for r in report.records}
    ok = len(report.records) == 100 and len(cells) == 100 and sizes_ok and elapsed < 300
    verdict(6, "20 scenarios x 5 samples sweep shape", ok,
            f"{len(report.records)} records, sizes ok {sizes_ok}, {elapsed:.1f}s")


def test_c7_surrogate_end_to_end(verdict, surrogate):
    _, report, elapsed = surrogate
    best = report.best_scenario()
    means = report.scenario_means()[best]
    ok = means["accuracy"] >= 0.95 and means["auc"] >= 0.95 and elapsed < 300
    verdict(7, "default LBP + best scenario on texture corpus", ok,
            f"best {best}: accuracy {means['accuracy']:.4f}, AUC {means['auc']:.4f}")


def test_c8_dual_route_agreement(verdict, surrogate):
    samples, _, _ = surrogate
    table = scenario_table()
    identical = True
    for s in samples:
        preds = []
        for sc in (table[0], table[3]):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                sc = SvmScenario(**{**sc.to_dict(), "random_state": s.solver_seed})
                model = train(s.X_train, s.y_train, sc, classes=("negative", "positive"))
            preds.append(list(predict(model, s.X_test)))
        identical &= preds[0] == preds[1]
    verdict(8, "S0 and S3 give identical test predictions", bool(identical), f"{len(samples)} samples compared")
