import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from motolbp.ingest import InvalidInputError
from motolbp.metrics import ContingencyTable, contingency, metrics_record, rates, roc_auc, roc_curve

from oracles import brute_auc

P, N = "positive", "negative"


def scored_sets(max_size=200):
    # small integer score alphabet forces plenty of ties
    return st.integers(2, max_size).flatmap(lambda n: st.tuples(
        st.lists(st.integers(-6, 6), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n),
    )).filter(lambda t: any(t[1]) and not all(t[1]))


def test_perfect_classifier_at_test_size():
    truth = [P] * 216 + [N] * 216
    t = contingency(truth, truth)
    assert (t.tp, t.fp, t.fn, t.tn) == (216, 0, 0, 216)
    r = rates(t)
    assert (r.tpr, r.fpr, r.tnr, r.precision, r.accuracy) == (1, 0, 1, 1, 1)


def test_all_predicted_positive():
    truth = [P, N, N, P, N]
    t = contingency([P] * 5, truth)
    assert t.fn == 0 and t.tn == 0 and t.yes == t.P + t.N == 5


def test_mixed_four_items():
    t = contingency([P, P, N, N], [P, N, P, N])
    assert (t.tp, t.fp, t.fn, t.tn) == (1, 1, 1, 1)
    assert (t.P, t.N, t.yes, t.no, t.total) == (2, 2, 2, 2, 4)


def test_boolean_labels_accepted():
    assert contingency([True, False], [True, True]) == ContingencyTable(1, 0, 1, 0)


def test_contingency_errors():
    with pytest.raises(InvalidInputError):
        contingency([], [])
    with pytest.raises(InvalidInputError):
        contingency([P], [P, N])
    with pytest.raises(ValueError):
        ContingencyTable(-1, 0, 0, 0)


@pytest.mark.parametrize("tpr, fpr, precision, accuracy", [(0.916, 0.273, 0.771, 0.821), (0.917, 0.085, 0.916, 0.916)])
def test_rates_reproduce_published_rows(tpr, fpr, precision, accuracy):
    n = 216
    t = ContingencyTable(round(tpr * n), round(fpr * n), n - round(tpr * n), n - round(fpr * n))
    r = rates(t)
    assert r.precision == pytest.approx(precision, abs=0.002)
    assert r.accuracy == pytest.approx(accuracy, abs=0.002)


def test_precision_undefined_when_nothing_predicted_positive():
    r = rates(ContingencyTable(0, 0, 3, 4))
    assert math.isnan(r.precision) and r.tpr == 0 and r.accuracy == 4 / 7


def test_rates_need_both_classes():
    with pytest.raises(InvalidInputError):
        rates(ContingencyTable(3, 0, 0, 0))


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_rates_algebra(tp, fp, fn, tn):
    t = ContingencyTable(tp, fp, fn, tn)
    if t.P == 0 or t.N == 0:
        return
    r = rates(t)
    assert r.tpr + fn / t.P == 1 or abs(r.tpr + fn / t.P - 1) < 1e-15
    assert abs(r.fpr + r.tnr - 1) < 1e-15
    assert r.accuracy == pytest.approx((r.tpr * t.P + r.tnr * t.N) / t.total, abs=1e-15)


@pytest.mark.parametrize("pos, neg, expected", [
    ([0.9, 0.8], [0.7, 0.1], 1.0),
    ([0.8, 0.4], [0.6, 0.2], 0.75),
    ([0.3, 0.3], [0.3, 0.3, 0.3], 0.5),
])
def test_auc_examples(pos, neg, expected):
    assert roc_auc(pos + neg, [P] * len(pos) + [N] * len(neg)) == expected


def test_roc_curve_groups_ties_into_one_vertex():
    fpr, tpr = roc_curve([0.5, 0.5, 0.2, 0.9], [P, N, N, P])
    assert list(zip(fpr, tpr)) == [(0, 0), (0, 0.5), (0.5, 1), (1, 1)]


def test_auc_errors():
    with pytest.raises(InvalidInputError):
        roc_auc([0.1, 0.2], [P, P])
    with pytest.raises(InvalidInputError):
        roc_auc([0.1, np.inf], [P, N])


@settings(max_examples=100, deadline=None)
@given(scored_sets())
def test_auc_equals_pair_counting(data):
    scores, mask = data
    truth = [P if m else N for m in mask]
    assert roc_auc(scores, truth) == brute_auc(scores, mask)


@settings(max_examples=50, deadline=None)
@given(scored_sets(60))
def test_auc_invariant_under_increasing_transform(data):
    scores, mask = data
    truth = [P if m else N for m in mask]
    s = np.asarray(scores, float)
    assert roc_auc(np.exp(s / 3) * 7 - 2, truth) == roc_auc(s, truth)
    assert roc_auc(np.arctan(s), truth) == roc_auc(s, truth)


@settings(max_examples=50, deadline=None)
@given(scored_sets(60))
def test_auc_complement(data):
    scores, mask = data
    truth = [P if m else N for m in mask]
    assert roc_auc(-np.asarray(scores), truth) == pytest.approx(1 - roc_auc(scores, truth), abs=1e-15)


def test_metrics_record_fields():
    rec = metrics_record([2.0, -1.0, 0.5, -3.0], [P, N, P, N], [P, N, N, N])
    assert list(rec) == ["tp", "fp", "fn", "tn", "tpr", "fpr", "tnr", "precision", "accuracy", "auc"]
    assert rec["tp"] == 1 and rec["fp"] == 1 and rec["auc"] == 1.0
