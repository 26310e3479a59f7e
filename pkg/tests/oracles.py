"""Independent reference computations used only by the tests."""

import math

import mpmath
import numpy as np

mpmath.mp.dps = 50


def mp_matrix(a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in a])


def normal_equations_beta(X, y):
    """Solve X'X b = X'y in 50-digit arithmetic."""
    Xm = mp_matrix(X)
    ym = mpmath.matrix([mpmath.mpf(float(v)) for v in y])
    b = mpmath.lu_solve(Xm.T * Xm, Xm.T * ym)
    return np.array([float(v) for v in b])


def explicit_hat_diag(X):
    Xm = mp_matrix(X)
    H = Xm * mpmath.inverse(Xm.T * Xm) * Xm.T
    return np.array([float(H[i, i]) for i in range(H.rows)])


def spd_solve(A, b):
    x = mpmath.lu_solve(mp_matrix(A), mpmath.matrix([mpmath.mpf(float(v)) for v in b]))
    return np.array([float(v) for v in x])


def prefix_refit(X, y, k):
    """Batch least squares on the first k rows via SVD-based lstsq."""
    Xk, yk = X[:k], y[:k]
    beta = np.linalg.lstsq(Xk, yk, rcond=None)[0]
    resid = yk - Xk @ beta
    sse = float(resid @ resid)
    p = X.shape[1]
    sigma2 = sse / (k - p) if k > p else float("nan")
    sst = float(np.sum((yk - yk.mean()) ** 2))
    r2 = 1 - sse / sst if k > p and sst > 0 else float("nan")
    return beta, sigma2, r2


def bisect_boundary(alpha, lo=1e-6, hi=10.0, tol=1e-10):
    """Step-halving root search for 1 - Phi(3a) + exp(-4a^2) Phi(a) = alpha/2."""
    def phi(x):
        return 0.5 * (1 + math.erf(x / math.sqrt(2)))

    def f(a):
        return 1 - phi(3 * a) + math.exp(-4 * a * a) * phi(a) - alpha / 2

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def delete_one_influence(X, y):
    """Cook distance and DFFITS by literally refitting without each row."""
    n, p = X.shape
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    resid = y - X @ beta
    s2 = resid @ resid / (n - p)
    h = np.diag(X @ np.linalg.inv(X.T @ X) @ X.T)
    cook, dffits = np.empty(n), np.empty(n)
    for i in range(n):
        keep = np.arange(n) != i
        b_i = np.linalg.lstsq(X[keep], y[keep], rcond=None)[0]
        r_i = y[keep] - X[keep] @ b_i
        s2_i = r_i @ r_i / (n - 1 - p)
        diff = X @ (beta - b_i)
        cook[i] = diff @ diff / (p * s2)
        dffits[i] = (X[i] @ beta - X[i] @ b_i) / math.sqrt(s2_i * h[i])
    return cook, dffits
