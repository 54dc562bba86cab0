"""Linear SVM training and inference.

Three solvers cover every combination of loss, penalty, solver route and
multi-class strategy that the scenario sweep needs:

* ``train_dual_cd``: dual coordinate descent, L2 penalty, hinge or squared hinge.
* ``train_primal_l1``: coordinate Newton with line search, L1 penalty, squared hinge.
* ``train_crammer_singer``: sequential dual method for the joint multi-class SVM.

When ``fit_intercept`` is set, a constant column equal to
``intercept_scaling`` is appended to the features and the intercept is the
weight learned on it, so the intercept is regularized like any other weight.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import _kernels

FORMAT_VERSION = 1


class ConfigurationError(ValueError):
    """Invalid combination of scenario parameters."""


class ConvergenceWarning(UserWarning):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class SvmScenario:
    """Training configuration for one linear SVM.

    Coordinates are visited in a fresh random order each pass, drawn from
    ``random_state`` (seed 0 when unset); ``shuffle=False`` keeps the plain
    cyclic order instead.
    """

    C: float = 1.0
    tol: float = 1e-4
    loss: str = "squared_hinge"
    penalty: str = "l2"
    dual: bool = True
    multi_class: str = "ovr"
    max_iter: int = 1000
    fit_intercept: bool = True
    intercept_scaling: float = 1.0
    class_weights: dict | None = None
    random_state: int | None = None
    shuffle: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.loss not in ("hinge", "squared_hinge"):
            raise ConfigurationError(f"loss must be 'hinge' or 'squared_hinge', got {self.loss!r}")
        if self.penalty not in ("l1", "l2"):
            raise ConfigurationError(f"penalty must be 'l1' or 'l2', got {self.penalty!r}")
        if self.multi_class not in ("ovr", "crammer_singer"):
            raise ConfigurationError(f"multi_class must be 'ovr' or 'crammer_singer', got {self.multi_class!r}")
        if not self.C > 0:
            raise ConfigurationError("C must be positive")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError("max_iter must be an integer >= 1")
        if self.fit_intercept and not self.intercept_scaling > 0:
            raise ConfigurationError("intercept_scaling must be positive")
        if self.class_weights and any(not v > 0 for v in self.class_weights.values()):
            raise ConfigurationError("class weights must be positive")
        if self.multi_class == "crammer_singer":
            return
        if self.penalty == "l1" and self.loss != "squared_hinge":
            raise ConfigurationError("penalty='l1' requires loss='squared_hinge'")
        if self.penalty == "l1" and self.dual:
            raise ConfigurationError("penalty='l1' requires dual=False")
        if self.loss == "hinge" and not self.dual:
            raise ConfigurationError("loss='hinge' requires dual=True")

    @property
    def route(self) -> str:
        if self.multi_class == "crammer_singer":
            return "crammer_singer"
        return "primal_l1" if self.penalty == "l1" else "dual_cd"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SvmScenario":
        return cls(**d)


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray          # (d,) binary, (K, d) crammer_singer
    intercept: Any               # float binary, (K,) crammer_singer
    classes: tuple
    scenario: SvmScenario
    diagnostics: dict = field(default_factory=dict)
    feature_params: dict | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[-1]

    @property
    def is_multiclass(self) -> bool:
        return self.weights.ndim == 2


# -- data handling ----------------------------------------------------------

def _check_X(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"features must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return X


def _resolve_classes(y, classes) -> tuple:
    present = sorted(set(np.asarray(y).tolist()))
    if classes is None:
        if set(present) <= {-1, 1}:
            return (-1, 1)
        return tuple(present)
    classes = tuple(classes)
    missing = set(present) - set(classes)
    if missing:
        raise ValueError(f"labels {sorted(missing)} not in classes {classes}")
    return classes


def _augment(X, scenario: SvmScenario) -> np.ndarray:
    if not scenario.fit_intercept:
        return np.ascontiguousarray(X)
    return np.ascontiguousarray(np.hstack([X, np.full((X.shape[0], 1), scenario.intercept_scaling)]))


def _sample_costs(labels, classes, scenario: SvmScenario) -> np.ndarray:
    cw = scenario.class_weights or {}
    return np.array([scenario.C * float(cw.get(lab, cw.get(str(lab), 1.0))) for lab in labels])


DEFAULT_SHUFFLE_SEED = 0


def _shuffle_seed(scenario: SvmScenario):
    if not scenario.shuffle:
        return None
    return DEFAULT_SHUFFLE_SEED if scenario.random_state is None else scenario.random_state


def _orders(n: int, scenario: SvmScenario):
    """Yield the coordinate order for each pass: a fresh seeded permutation, or plain cyclic order."""
    seed = _shuffle_seed(scenario)
    if seed is None:
        order = np.arange(n, dtype=np.int64)
        while True:
            yield order
    rng = np.random.default_rng(seed)
    while True:
        yield rng.permutation(n).astype(np.int64)


def _split_aug(w_aug, scenario):
    if scenario.fit_intercept:
        return w_aug[..., :-1].copy(), w_aug[..., -1] * scenario.intercept_scaling
    return w_aug.copy(), np.zeros(w_aug.shape[:-1]) if w_aug.ndim == 2 else 0.0


def _run_passes(step, n_coords, scenario, objective):
    """Drive a pass kernel until the violation drops below ``tol``."""
    history = []
    viol = np.inf
    it = 0
    orders = _orders(n_coords, scenario)
    for it in range(1, scenario.max_iter + 1):
        viol = step(next(orders))
        history.append(objective())
        if viol < scenario.tol:
            break
    converged = bool(viol < scenario.tol)
    if not converged:
        warnings.warn(f"solver did not converge in {scenario.max_iter} passes "
                      f"(max violation {viol:.3g} >= tol {scenario.tol:g})", ConvergenceWarning, stacklevel=3)
    return {"iterations": it, "max_kkt_violation": float(viol), "converged": converged,
            "shuffle_seed": _shuffle_seed(scenario), "history": history}


def _finish(w_aug, classes, scenario, diag, X, y):
    weights, intercept = _split_aug(w_aug, scenario)
    if np.ndim(intercept) == 0:
        intercept = float(intercept)
    model = LinearModel(weights, intercept, classes, scenario, diag)
    diag["final_objective"] = objective_value(model, X, y)
    return model


# -- solvers ------------------------------------------------------------------

def train_dual_cd(X, y, scenario: SvmScenario, classes=None) -> LinearModel:
    """Minimize ``0.5*|w|^2 + C * sum(loss_i)`` through its box-constrained dual."""
    if scenario.penalty != "l2" or scenario.multi_class != "ovr":
        raise ConfigurationError("train_dual_cd handles penalty='l2', multi_class='ovr' only")
    X = _check_X(X)
    classes = _resolve_classes(y, classes)
    if len(classes) != 2:
        raise ValueError(f"binary training needs exactly 2 classes, got {classes}")
    ysign = np.where(np.asarray(y) == classes[1], 1.0, -1.0)
    Xa = _augment(X, scenario)
    Z = np.ascontiguousarray(Xa * ysign[:, None])
    cvec = _sample_costs(y, classes, scenario)
    if scenario.loss == "hinge":
        upper, diag = cvec, np.zeros_like(cvec)
    else:
        upper, diag = np.full_like(cvec, np.inf), 1.0 / (2.0 * cvec)
    qii = np.einsum("ij,ij->i", Z, Z) + diag
    alpha = np.zeros(Xa.shape[0])
    w = np.zeros(Xa.shape[1])

    def objective():
        return 0.5 * w @ w + 0.5 * np.sum(diag * alpha * alpha) - alpha.sum()

    diag_info = _run_passes(lambda order: _kernels.dual_cd_pass(Z, alpha, w, order, upper, diag, qii),
                            Xa.shape[0], scenario, objective)
    diag_info.update(solver="dual_cd", history_kind="dual", alpha=alpha.copy())
    return _finish(w, classes, scenario, diag_info, X, y)


def train_primal_l1(X, y, scenario: SvmScenario, classes=None) -> LinearModel:
    """Minimize ``|w|_1 + C * sum(max(0, 1 - y_i w.x_i)^2)`` by cyclic coordinate Newton steps."""
    if scenario.penalty != "l1" or scenario.loss != "squared_hinge" or scenario.dual:
        raise ConfigurationError("train_primal_l1 needs penalty='l1', loss='squared_hinge', dual=False")
    X = _check_X(X)
    classes = _resolve_classes(y, classes)
    if len(classes) != 2:
        raise ValueError(f"binary training needs exactly 2 classes, got {classes}")
    ysign = np.where(np.asarray(y) == classes[1], 1.0, -1.0)
    Xa = _augment(X, scenario)
    cvec = _sample_costs(y, classes, scenario)
    w = np.zeros(Xa.shape[1])
    b = np.ones(Xa.shape[0])

    def objective():
        return np.abs(w).sum() + np.sum(cvec * np.maximum(b, 0.0) ** 2)

    diag_info = _run_passes(
        lambda order: _kernels.primal_l1_pass(Xa, ysign, cvec, w, b, order, 0.01, 0.5, 30),
        Xa.shape[1], scenario, objective)
    diag_info.update(solver="primal_l1", history_kind="primal")
    return _finish(w, classes, scenario, diag_info, X, y)


def train_crammer_singer(X, y, scenario: SvmScenario, classes=None) -> LinearModel:
    """Joint multi-class SVM, one weight vector per class."""
    if scenario.multi_class != "crammer_singer":
        raise ConfigurationError("train_crammer_singer needs multi_class='crammer_singer'")
    X = _check_X(X)
    classes = _resolve_classes(y, classes)
    if len(classes) < 2:
        raise ValueError("crammer_singer needs at least 2 classes")
    index = {c: k for k, c in enumerate(classes)}
    yi = np.array([index[v] for v in np.asarray(y).tolist()], dtype=np.int64)
    Xa = _augment(X, scenario)
    cvec = _sample_costs(y, classes, scenario)
    sqnorm = np.einsum("ij,ij->i", Xa, Xa)
    K = len(classes)
    alpha = np.zeros((Xa.shape[0], K))
    W = np.zeros((K, Xa.shape[1]))
    off_target = np.ones((Xa.shape[0], K))
    off_target[np.arange(Xa.shape[0]), yi] = 0.0

    def objective():
        return 0.5 * np.sum(W * W) + np.sum(off_target * alpha)

    diag_info = _run_passes(
        lambda order: _kernels.crammer_singer_pass(Xa, yi, cvec, alpha, W, order, sqnorm),
        Xa.shape[0], scenario, objective)
    diag_info.update(solver="crammer_singer", history_kind="dual")
    return _finish(W, classes, scenario, diag_info, X, y)


def train(X, y, scenario: SvmScenario | None = None, classes=None) -> LinearModel:
    """Validate ``scenario`` and dispatch to the matching solver."""
    scenario = scenario or SvmScenario()
    scenario.validate()
    route = scenario.route
    if route == "crammer_singer":
        return train_crammer_singer(X, y, scenario, classes)
    if route == "primal_l1":
        return train_primal_l1(X, y, scenario, classes)
    return train_dual_cd(X, y, scenario, classes)


# -- inference ----------------------------------------------------------------

def decision_function(model: LinearModel, X):
    """``w.x + b`` per sample; shape ``(n, K)`` for multi-class models."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.ndim != 2 or X2.shape[1] != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got shape {X.shape}")
    scores = X2 @ model.weights.T + model.intercept
    return scores[0] if single else scores


def predict(model: LinearModel, X):
    scores = decision_function(model, X)
    classes = np.asarray(model.classes, dtype=object)
    if model.is_multiclass:
        return classes[np.argmax(scores, axis=-1)] if np.ndim(scores) == 2 else model.classes[int(np.argmax(scores))]
    if np.ndim(scores) == 0:
        return model.classes[1] if scores > 0 else model.classes[0]
    return np.where(scores > 0, classes[1], classes[0])


def positive_score(model: LinearModel, X, positive=None):
    """Scalar ranking score for ``positive`` (default the last class)."""
    scores = decision_function(model, X)
    if not model.is_multiclass:
        if positive is not None and positive != model.classes[1]:
            return -scores
        return scores
    k = model.classes.index(positive) if positive is not None else len(model.classes) - 1
    others = np.delete(np.atleast_2d(scores), k, axis=1).max(axis=1)
    out = np.atleast_2d(scores)[:, k] - others
    return out[0] if np.ndim(scores) == 1 else out


def objective_value(model: LinearModel, X, y) -> float:
    """Primal objective of ``model`` on ``(X, y)`` for its scenario."""
    X = _check_X(X)
    if X.shape[1] != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got {X.shape[1]}")
    sc = model.scenario
    cvec = _sample_costs(y, model.classes, sc)
    scale = sc.intercept_scaling if sc.fit_intercept else 1.0
    bias_w = np.asarray(model.intercept, dtype=np.float64) / scale if sc.fit_intercept else 0.0
    scores = decision_function(model, X)
    if model.is_multiclass:
        index = {c: k for k, c in enumerate(model.classes)}
        yi = np.array([index[v] for v in np.asarray(y).tolist()])
        rows = np.arange(X.shape[0])
        target = scores[rows, yi]
        rival = scores.copy()
        rival[rows, yi] = -np.inf
        loss = np.maximum(0.0, 1.0 + rival.max(axis=1) - target)
        reg = 0.5 * (np.sum(model.weights ** 2) + np.sum(bias_w ** 2))
        return float(reg + np.sum(cvec * loss))
    ysign = np.where(np.asarray(y) == model.classes[1], 1.0, -1.0)
    slack = np.maximum(0.0, 1.0 - ysign * scores)
    loss = slack if sc.loss == "hinge" else slack ** 2
    if sc.penalty == "l1":
        reg = np.abs(model.weights).sum() + abs(bias_w)
    else:
        reg = 0.5 * (model.weights @ model.weights + bias_w ** 2)
    return float(reg + np.sum(cvec * loss))


# -- persistence --------------------------------------------------------------

def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def model_to_dict(model: LinearModel) -> dict:
    d = {
        "format_version": FORMAT_VERSION,
        "scenario": model.scenario.to_dict(),
        "classes": [_plain(c) for c in model.classes],
    }
    if model.is_multiclass:
        d["weights_per_class"] = model.weights.tolist()
        d["intercepts"] = np.asarray(model.intercept).tolist()
    else:
        d["weights"] = model.weights.tolist()
        d["intercepts"] = [float(model.intercept)]
    diag = model.diagnostics
    d["diagnostics"] = {k: _plain(diag.get(k)) for k in ("iterations", "final_objective",
                                                         "max_kkt_violation", "converged")}
    if model.feature_params is not None:
        d["feature_params"] = model.feature_params
    return d


def model_from_dict(d: dict) -> LinearModel:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {d.get('format_version')!r}")
    scenario = SvmScenario.from_dict(d["scenario"])
    if "weights_per_class" in d:
        weights = np.array(d["weights_per_class"], dtype=np.float64)
        intercept = np.array(d["intercepts"], dtype=np.float64)
    else:
        weights = np.array(d["weights"], dtype=np.float64)
        intercept = float(d["intercepts"][0])
    return LinearModel(weights, intercept, tuple(d["classes"]), scenario,
                       dict(d.get("diagnostics", {})), d.get("feature_params"))


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def with_feature_params(model: LinearModel, params: dict | None) -> LinearModel:
    return replace(model, feature_params=params)
