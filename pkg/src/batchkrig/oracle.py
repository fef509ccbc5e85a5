"""Brute-force Simple Kriging used as ground truth.

Everything here refits from scratch on the full design.  The factorization
and the substitutions are written out by hand instead of going through
:mod:`batchkrig.linalg`, so a defect in the fast path cannot hide behind
the same defect in its reference.  Only :mod:`batchkrig.kernels` is shared.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import NotPositiveDefinite


@dataclass(frozen=True)
class FullWeights:
    """Simple Kriging weights of the full ``(n + k)``-point system.

    ``lambda_old`` holds the weights of the first ``n`` (old) observations
    and ``lambda_new`` those of the last ``k`` (new) ones.
    """

    lambda_old: np.ndarray
    lambda_new: np.ndarray

    @property
    def all(self):
        return np.concatenate([self.lambda_old, self.lambda_new])


def naive_cholesky(A):
    """Row-by-row Cholesky-Banachiewicz factorization."""
    n = A.shape[0]
    L = np.zeros_like(A, dtype=float)
    for i in range(n):
        for j in range(i):
            L[i, j] = (A[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
        pivot = A[i, i] - L[i, :i] @ L[i, :i]
        if not pivot > 0:
            raise NotPositiveDefinite(f"oracle: pivot {i} is {pivot:.3g}")
        L[i, i] = math.sqrt(pivot)
    return L


def forward(L, b):
    """Solve ``L y = b``; ``b`` may have several columns."""
    y = np.zeros(np.shape(b))
    for i in range(len(b)):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    return y


def backward(L, y):
    """Solve ``L.T x = y``."""
    n = len(y)
    x = np.zeros(np.shape(y))
    for i in reversed(range(n)):
        x[i] = (y[i] - L[i + 1 :, i] @ x[i + 1 :]) / L[i, i]
    return x


def _system(kernel, X_all, jitter):
    X_all = kernels.as_points(X_all)
    K = kernels.gram(kernel, X_all) + jitter * np.eye(X_all.shape[0])
    return X_all, naive_cholesky(K)


def _queries(x, d=None):
    # a single point gives scalars back, a 2-D array of points gives arrays
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        return kernels.as_points(x, d=d), False
    return kernels.as_point(x, d=d)[None, :], True


def refit_predict(kernel, X_all, Z_all, x, y=None, jitter=0.0):
    """Mean, variance and optionally covariance by a fresh full refit.

    Returns ``(mean, variance, covariance)`` at ``x``; the covariance is
    between ``x`` and ``y`` and is ``None`` when ``y`` is not given.
    ``x`` may also be an ``(m, d)`` array of query points (and ``y`` an
    array of the same shape), in which case every entry is an array.
    Nothing is clamped.
    """
    Z_all = np.asarray(Z_all, dtype=float).reshape(-1)
    X_all = kernels.as_points(X_all)
    d = X_all.shape[1] if X_all.shape[0] else None
    Q, single = _queries(x, d)
    prior = np.array([kernels.evaluate(kernel, q, q) for q in Q])
    if y is not None:
        P = _queries(y, Q.shape[1])[0]
        if P.shape != Q.shape:
            raise ValueError("x and y must hold the same number of points")
        cov = np.array([kernels.evaluate(kernel, q, p) for q, p in zip(Q, P)])
    if Z_all.size != X_all.shape[0]:
        raise ValueError(f"{X_all.shape[0]} points but {Z_all.size} observations")
    if Z_all.size == 0:
        mean, var = np.zeros(len(Q)), prior
    else:
        X_all, L = _system(kernel, X_all, jitter)
        c_x = kernels.cross(kernel, X_all, Q)
        lam = backward(L, forward(L, c_x))
        mean = lam.T @ Z_all
        var = prior - np.sum(lam * c_x, axis=0)
        if y is not None:
            cov = cov - np.sum(lam * kernels.cross(kernel, X_all, P), axis=0)
    if y is None:
        cov = None
    if single:
        return float(mean[0]), float(var[0]), None if cov is None else float(cov[0])
    return mean, var, cov


def full_weights(kernel, X_all, x, n_old, jitter=0.0):
    """Weights of all observations at ``x``, split after the first ``n_old``.

    For an ``(m, d)`` array of query points the weight vectors are the
    columns of ``(n_old, m)`` and ``(k, m)`` arrays.
    """
    X_all, L = _system(kernel, X_all, jitter)
    if not 0 <= n_old <= X_all.shape[0]:
        raise ValueError(f"split index {n_old} outside 0..{X_all.shape[0]}")
    Q, single = _queries(x, X_all.shape[1])
    lam = backward(L, forward(L, kernels.cross(kernel, X_all, Q)))
    if single:
        lam = lam[:, 0]
    return FullWeights(lam[:n_old].copy(), lam[n_old:].copy())
