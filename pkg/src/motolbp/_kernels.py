"""Compiled single-pass kernels for the coordinate-descent solvers.

Every kernel performs exactly one sweep over ``order`` in place and returns
the largest optimality violation it saw before each coordinate update.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dual_cd_pass(Z, alpha, w, order, upper, diag, qii):
    """One pass of dual coordinate descent for L2-regularized (squared) hinge.

    ``Z`` rows are ``y_i * x_i``; ``upper`` is the box bound (``inf`` for the
    squared hinge) and ``diag`` the extra diagonal term of the dual Hessian.
    """
    d = Z.shape[1]
    max_viol = 0.0
    for idx in range(order.shape[0]):
        i = order[idx]
        g = -1.0 + diag[i] * alpha[i]
        for j in range(d):
            g += Z[i, j] * w[j]
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= upper[i]:
            pg = max(g, 0.0)
        else:
            pg = g
        if abs(pg) > max_viol:
            max_viol = abs(pg)
        if pg == 0.0:
            continue
        if qii[i] > 0.0:
            new = min(max(a - g / qii[i], 0.0), upper[i])
        else:
            # zero row: the dual is linear in alpha_i with slope -1
            new = upper[i]
        step = new - a
        if step != 0.0:
            alpha[i] = new
            for j in range(d):
                w[j] += step * Z[i, j]
    return max_viol


@njit(cache=True)
def primal_l1_pass(X, y, cvec, w, b, order, sigma, beta, max_search):
    """One CDN pass for L1-regularized squared-hinge loss.

    ``b`` holds ``1 - y_i w.x_i`` and is kept in sync with ``w``.
    """
    n = X.shape[0]
    max_viol = 0.0
    for idx in range(order.shape[0]):
        j = order[idx]
        g = 0.0
        h = 0.0
        for i in range(n):
            if b[i] > 0.0:
                xij = X[i, j]
                g -= 2.0 * cvec[i] * y[i] * xij * b[i]
                h += 2.0 * cvec[i] * xij * xij
        h = max(h, 1e-12)
        gp = g + 1.0
        gn = g - 1.0
        wj = w[j]
        if wj == 0.0:
            if gp < 0.0:
                viol = -gp
            elif gn > 0.0:
                viol = gn
            else:
                viol = 0.0
        elif wj > 0.0:
            viol = abs(gp)
        else:
            viol = abs(gn)
        if viol > max_viol:
            max_viol = viol

        if gp < h * wj:
            d = -gp / h
        elif gn > h * wj:
            d = -gn / h
        else:
            d = -wj
        if abs(d) < 1e-15:
            continue

        delta = abs(wj + d) - abs(wj) + g * d
        lam = 1.0
        accepted = False
        for _ in range(max_search):
            step = lam * d
            # summed per sample as t*(2b + t) to avoid cancellation near the optimum
            change = abs(wj + step) - abs(wj)
            for i in range(n):
                t = -step * y[i] * X[i, j]
                bi = b[i]
                bn = bi + t
                if bi > 0.0 and bn > 0.0:
                    change += cvec[i] * t * (2.0 * bi + t)
                elif bn > 0.0:
                    change += cvec[i] * bn * bn
                elif bi > 0.0:
                    change -= cvec[i] * bi * bi
            if change <= sigma * lam * delta:
                accepted = True
                break
            lam *= beta
        if not accepted:
            continue
        step = lam * d
        w[j] = wj + step
        for i in range(n):
            b[i] -= step * y[i] * X[i, j]
    return max_viol


@njit(cache=True)
def _cs_subproblem(A, B, yi, c_yi, out):
    # min 0.5*A*|a|^2 + B.a  s.t.  sum(a) = 0, a_m <= 0 (m != yi), a_yi <= c_yi
    k = B.shape[0]
    D = B.copy()
    D[yi] += A * c_yi
    D = -np.sort(-D)
    beta = D[0] - A * c_yi
    r = 1
    while r < k and beta < r * D[r]:
        beta += D[r]
        r += 1
    beta /= r
    for m in range(k):
        bound = c_yi if m == yi else 0.0
        out[m] = min(bound, (beta - B[m]) / A)


@njit(cache=True)
def crammer_singer_pass(X, y, cvec, alpha, W, order, sqnorm):
    """One pass of the sequential dual method for Crammer-Singer.

    ``alpha`` is ``(n, K)`` with rows summing to zero; ``W`` is ``(K, d)``.
    """
    k, d = W.shape
    G = np.empty(k)
    B = np.empty(k)
    new = np.empty(k)
    max_viol = 0.0
    for idx in range(order.shape[0]):
        i = order[idx]
        A = sqnorm[i]
        if A <= 0.0:
            continue
        yi = y[i]
        for m in range(k):
            s = 0.0 if m == yi else 1.0
            for j in range(d):
                s += W[m, j] * X[i, j]
            G[m] = s
        gmax = -np.inf
        gmin = np.inf
        for m in range(k):
            if G[m] > gmax:
                gmax = G[m]
            bound = cvec[i] if m == yi else 0.0
            if alpha[i, m] < bound and G[m] < gmin:
                gmin = G[m]
        viol = gmax - gmin
        if viol > max_viol:
            max_viol = viol
        if viol <= 1e-14:
            continue
        for m in range(k):
            B[m] = G[m] - A * alpha[i, m]
        _cs_subproblem(A, B, yi, cvec[i], new)
        for m in range(k):
            step = new[m] - alpha[i, m]
            if step != 0.0:
                alpha[i, m] = new[m]
                for j in range(d):
                    W[m, j] += step * X[i, j]
    return max_viol
