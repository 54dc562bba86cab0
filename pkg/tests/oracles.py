"""Independent reference solvers and brute-force checks used only by the tests.

None of these share code with the package's solvers: the L2 and
Crammer-Singer references run accelerated projected gradient on the full
dual QP, the L1 reference runs accelerated proximal gradient on the primal.
"""

import itertools

import numpy as np


def _augment(X, fit_intercept, scaling=1.0):
    X = np.asarray(X, dtype=float)
    return np.hstack([X, np.full((len(X), 1), scaling)]) if fit_intercept else X


def _fista(grad, value, prox, x0, L, max_iter, tol):
    """FISTA with function-value restart; returns the best iterate."""
    x = x0.copy()
    z = x0.copy()
    t = 1.0
    fx = value(x)
    for _ in range(max_iter):
        x_new = prox(z - grad(z) / L)
        f_new = value(x_new)
        if f_new > fx:  # restart momentum
            z = x.copy()
            t = 1.0
            continue
        step = np.max(np.abs(x_new - x))
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        z = x_new + ((t - 1) / t_new) * (x_new - x)
        x, fx, t = x_new, f_new, t_new
        if step < tol:
            break
    return x, fx


def l2_dual_reference(X, y, C, loss="hinge", fit_intercept=True, max_iter=400_000, tol=1e-15):
    """Optimal primal objective of an L2-regularized (squared) hinge SVM via its dual.

    ``y`` holds +1/-1. Returns ``(objective, w_aug)`` where the objective is
    the dual value at the reference solution (equal to the primal optimum).
    """
    Z = _augment(X, fit_intercept) * np.asarray(y, float)[:, None]
    n = len(Z)
    d = np.zeros(n) if loss == "hinge" else np.full(n, 1.0 / (2 * C))
    upper = np.full(n, C if loss == "hinge" else np.inf)
    L = np.linalg.eigvalsh(Z @ Z.T).max() + d.max()

    def value(a):
        w = Z.T @ a
        return 0.5 * w @ w + 0.5 * np.sum(d * a * a) - a.sum()

    def grad(a):
        return Z @ (Z.T @ a) + d * a - 1.0

    a, f = _fista(grad, value, lambda a: np.clip(a, 0.0, upper), np.zeros(n), L, max_iter, tol)
    return -f, Z.T @ a


def l1_primal_reference(X, y, C, fit_intercept=True, max_iter=400_000, tol=1e-15):
    """Optimal value of ``|w|_1 + C sum max(0, 1 - y w.x)^2`` by proximal gradient."""
    A = _augment(X, fit_intercept) * np.asarray(y, float)[:, None]
    L = 2 * C * np.linalg.eigvalsh(A.T @ A).max()

    def smooth(w):
        return C * np.sum(np.maximum(0.0, 1.0 - A @ w) ** 2)

    def value(w):
        return np.abs(w).sum() + smooth(w)

    def grad(w):
        return -2 * C * A.T @ np.maximum(0.0, 1.0 - A @ w)

    def prox(v):
        return np.sign(v) * np.maximum(np.abs(v) - 1.0 / L, 0.0)

    w, f = _fista(grad, value, prox, np.zeros(A.shape[1]), L, max_iter, tol)
    return f, w


def project_simplex(v, total):
    """Euclidean projection of each row of ``v`` onto ``{b >= 0, sum(b) = total}``."""
    v = np.atleast_2d(v)
    total = np.broadcast_to(np.asarray(total, float), (v.shape[0],))
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - total[:, None]
    k = np.arange(1, v.shape[1] + 1)
    cond = u - css / k > 0
    rho = cond.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def crammer_singer_reference(X, y, K, C, fit_intercept=True, max_iter=400_000, tol=1e-15):
    """Optimal primal value of the Crammer-Singer SVM from its dual QP.

    The dual variable of example ``i`` is ``alpha_i = C e_{y_i} - beta_i``
    with ``beta_i`` on the simplex of mass ``C``.
    """
    Xa = _augment(X, fit_intercept)
    y = np.asarray(y)
    n = len(Xa)
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y] = 1.0
    off = 1.0 - onehot
    L = np.linalg.eigvalsh(Xa @ Xa.T).max()

    def alpha(b):
        return C * onehot - b

    def value(b):
        W = alpha(b).T @ Xa
        return 0.5 * np.sum(W * W) + np.sum(off * alpha(b))

    def grad(b):
        W = alpha(b).T @ Xa
        return -(Xa @ W.T + off)

    b0 = C * onehot
    b, f = _fista(grad, value, lambda b: project_simplex(b, C), b0, L, max_iter, tol)
    return -f, alpha(b).T @ Xa


def brute_auc(scores, positive_mask):
    """Tie-adjusted Mann-Whitney over every positive x negative pair, as an exact fraction."""
    scores = np.asarray(scores)
    pos = scores[np.asarray(positive_mask, bool)]
    neg = scores[~np.asarray(positive_mask, bool)]
    twice = 0
    for p, q in itertools.product(pos.tolist(), neg.tolist()):
        twice += 2 if p > q else (1 if p == q else 0)
    return twice / (2 * len(pos) * len(neg))
