"""Simple Kriging with batch-sequential updates.

A :class:`KrigingState` is the posterior of a centered Gaussian field given
``n`` noiseless observations.  Assimilating a batch of ``k`` more
observations does not refit: the update works with the conditional
covariance ``Sigma_new`` of the new observations given the old ones (a
``k x k`` matrix) and the conditional cross-covariances
``sigma_old(X_new, x)``::

    m_new(x)      = m_old(x)      + s(x)^T Sigma_new^{-1} (Z_new - m_old(X_new))
    var_new(x)    = var_old(x)    - s(x)^T Sigma_new^{-1} s(x)
    cov_new(x, y) = cov_old(x, y) - s(x)^T Sigma_new^{-1} s(y)

with ``s(x) = sigma_old(X_new, x)``.  Equivalently, with the weights
``lam(x) = Sigma_new^{-1} s(x)`` of the new observations in the
``(n + k)``-point predictor, the variance drops by ``lam^T Sigma_new lam``.
The per-point formula ``sum_i lam_i^2 Sigma_new[i, i]`` that ignores the
off-diagonal of ``Sigma_new`` is kept as ``update_variance_emery`` /
``update_cov_emery``.  It is wrong for ``k > 1`` and only exists as a
reference to regress against.

Under a Gaussian assumption these are conditional moments; for any
square-integrable field the same formulas give the best linear predictor
and its error (co)variances.

When a state carries a jitter ``j``, every factored covariance is
``K + j I`` and ``Sigma_new`` is used as ``Sigma_new + j I``; ``j = 0`` is
the exact noiseless model.
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import as_point, as_points
from .linalg import (
    CholeskyFactor,
    NotPositiveDefinite,
    block_extend,
    cholesky,
    extend_parts,
    solve,
    solve_lower,
)

logger = logging.getLogger(__name__)

#: Negative variances within this fraction of the prior variance are roundoff.
CLAMP_RTOL = 1e-9


class DegenerateNewPoint(ValueError):
    """The new observation is already (numerically) known under the posterior."""


@dataclass(frozen=True, eq=False)
class KrigingState:
    """Simple Kriging posterior given ``n >= 0`` observations.

    Attributes
    ----------
    kernel : Kernel
        Prior covariance of the centered field.
    X : ndarray, shape (n, d)
        Design points.
    Z : ndarray, shape (n,)
        Observed values.
    factor : CholeskyFactor
        Factor of ``gram(X) + jitter * I``; empty when ``n = 0``.
    jitter : float
        Nugget added to the Gram diagonal.
    whitened : ndarray, shape (n,)
        ``L^{-1} Z``, kept so that means cost one triangular solve and can
        be extended in ``O(nk)`` on assimilation.
    dim : int or None
        Point dimension; ``None`` for a prior state that has not been told
        its dimension (any query dimension is then accepted).
    """

    kernel: kernels.Kernel
    X: np.ndarray
    Z: np.ndarray
    factor: CholeskyFactor
    jitter: float
    whitened: np.ndarray
    dim: int = None

    @property
    def n(self):
        return self.X.shape[0]

    def points(self, Q):
        return as_points(Q, d=self.dim)

    def point(self, x):
        return as_point(x, d=self.dim)


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and variance; scalars or arrays over query points."""

    mean: object
    variance: object


@dataclass(frozen=True, eq=False)
class UpdateBatch:
    """``k >= 1`` new design points and their observed values."""

    X_new: np.ndarray
    Z_new: np.ndarray

    def __post_init__(self):
        X = as_points(self.X_new)
        Z = np.atleast_1d(np.asarray(self.Z_new, dtype=float))
        if X.shape[0] == 0:
            raise ValueError("an update batch needs at least one point")
        if Z.shape != (X.shape[0],):
            raise ValueError(f"{X.shape[0]} new points but {Z.size} new values")
        if not np.isfinite(Z).all():
            raise ValueError("observed values must be finite")
        object.__setattr__(self, "X_new", X)
        object.__setattr__(self, "Z_new", Z)

    @property
    def k(self):
        return self.X_new.shape[0]


@dataclass(frozen=True, eq=False)
class ConditionalBlock:
    """Conditional covariance of a batch of new points given a state.

    Attributes
    ----------
    state : KrigingState
        The state being conditioned on.
    X_new : ndarray, shape (k, d)
    sigma_new : ndarray, shape (k, k)
        ``Sigma_new[i, j] = predict_cov(state, X_new[i], X_new[j])``.
    factor : CholeskyFactor
        Factor of ``sigma_new + state.jitter * I``.
    white_cross : ndarray, shape (n, k)
        ``L^{-1} gram(X_old, X_new)`` with ``L`` the state's factor.
    """

    state: KrigingState
    X_new: np.ndarray
    sigma_new: np.ndarray
    factor: CholeskyFactor
    white_cross: np.ndarray

    @property
    def k(self):
        return self.X_new.shape[0]

    def cross_old(self, Q):
        """``sigma_old(X_new, q)`` for every query row, shape ``(k, m)``."""
        Q = self.state.points(Q)
        S = kernels.cross(self.state.kernel, self.X_new, Q)
        if self.state.n:
            S = S - self.white_cross.T @ _white(self.state, Q)
        return S

    def effective_diag(self):
        # diagonal of the matrix actually factored, Sigma_new + j I
        return np.einsum("ij,ij->i", self.factor.L, self.factor.L)

    def decorrelated(self):
        """The same block with the off-diagonal of ``Sigma_new`` dropped.

        This is the situation where the per-point variance update of
        :func:`update_variance_emery` is exact.
        """
        sigma = np.diag(np.diag(self.sigma_new))
        factor = cholesky(sigma, self.state.jitter)
        return ConditionalBlock(self.state, self.X_new, sigma, factor, self.white_cross)


def fit(kernel, X=(), Z=(), jitter=0.0, dim=None):
    """Condition the centered prior on observations ``Z`` at ``X``.

    With no observations the returned state is the prior itself.

    Raises
    ------
    NotPositiveDefinite
        If the Gram matrix is numerically singular (e.g. a repeated point
        with ``jitter = 0``).
    """
    X = as_points(X, d=dim)
    Z = np.atleast_1d(np.asarray(Z, dtype=float)).reshape(-1)
    if Z.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} points but {Z.shape[0]} observations")
    if not np.isfinite(Z).all():
        raise ValueError("observed values must be finite")
    if X.shape[0]:
        dim = X.shape[1]
        factor = cholesky(kernels.gram(kernel, X), jitter)
    else:
        factor = cholesky(np.empty((0, 0)), jitter)
    whitened = solve_lower(factor, Z)
    return KrigingState(kernel, X, Z, factor, float(jitter), whitened, dim)


def _white(state, Q):
    """``L^{-1} gram(X_old, Q)``, shape ``(n, m)``."""
    if state.n == 0:
        return np.empty((0, Q.shape[0]))
    return solve_lower(state.factor, kernels.cross(state.kernel, state.X, Q))


def _clamp(raw, prior):
    """Zero out negative variances that are within roundoff of zero."""
    raw = np.asarray(raw, dtype=float)
    out = raw.copy()
    neg = out < 0
    if not neg.any():
        return out
    small = neg & (out > -CLAMP_RTOL * prior)
    if small.any():
        logger.warning(
            "clamped %d negative variance(s) to 0 (smallest %.3g)", small.sum(), out[small].min()
        )
        out[small] = 0.0
    if (neg & ~small).any():
        logger.warning("variance below -%g x prior variance: %.3g", CLAMP_RTOL, out[neg].min())
    return out


def predict(state, Q):
    """Posterior mean and variance at every row of ``Q`` (arrays)."""
    Q = state.points(Q)
    V = _white(state, Q)
    mean = V.T @ state.whitened
    prior = kernels.diag(state.kernel, Q)
    var = prior - np.einsum("ij,ij->j", V, V)
    return Prediction(mean, _clamp(var, prior))


def predict_mean(state, x):
    """Posterior mean ``m_old(x)``; zero for the prior."""
    x = state.point(x)
    return float(predict(state, x[None, :]).mean[0])


def predict_variance(state, x):
    """Posterior variance ``var_old(x)``, clamped at zero for roundoff."""
    x = state.point(x)
    return float(predict(state, x[None, :]).variance[0])


def predict_cov(state, x, y):
    """Posterior covariance ``cov_old(x, y)``."""
    x = state.point(x)
    y = as_point(y, d=x.size)
    V = _white(state, np.vstack([x, y]))
    return kernels.evaluate(state.kernel, x, y) - float(V[:, 0] @ V[:, 1])


def conditional_block(state, X_new):
    """Conditional covariance ``Sigma_new`` of observations at ``X_new``.

    ``Sigma_new`` is the Schur complement of the old Gram block in the Gram
    matrix of all ``n + k`` points; it is factored with the state's jitter.

    Raises
    ------
    NotPositiveDefinite
        If a new point repeats another new point or an old one.
    """
    X_new = state.points(X_new)
    if X_new.shape[0] == 0:
        raise ValueError("conditional_block needs at least one new point")
    C = kernels.gram(state.kernel, X_new)
    if state.n:
        B = kernels.cross(state.kernel, state.X, X_new)
    else:
        B = np.empty((0, X_new.shape[0]))
    W, L22, sigma = extend_parts(state.factor, B, C, state.jitter)
    return ConditionalBlock(state, X_new, sigma, CholeskyFactor(L22, state.jitter), W)


def _check(state, block, batch=None):
    if block.state is not state:
        raise ValueError("conditional block was computed for a different state")
    if batch is not None and not (
        batch.X_new.shape == block.X_new.shape and np.array_equal(batch.X_new, block.X_new)
    ):
        raise ValueError("update batch points differ from the conditional block points")


def weights_new(block, x):
    """Weights of the new observations in the ``(n + k)``-point predictor.

    Solves ``Sigma_new lam = sigma_old(X_new, x)``; the result is the last
    ``k`` entries of the full Simple Kriging weight vector at ``x``.
    """
    x = block.state.point(x)
    return solve(block.factor, block.cross_old(x[None, :]))[:, 0]


def _whitened_cross(block, Q):
    # U = Lb^{-1} sigma_old(X_new, Q): quadratic forms become dot products
    return solve_lower(block.factor, block.cross_old(Q))


def update_predict(state, block, batch, Q):
    """Updated mean and variance at every row of ``Q``, without refitting."""
    _check(state, block, batch)
    Q = state.points(Q)
    old = predict(state, Q)
    innovation = batch.Z_new - predict(state, block.X_new).mean
    U = _whitened_cross(block, Q)
    mean = old.mean + U.T @ solve_lower(block.factor, innovation)
    prior = kernels.diag(state.kernel, Q)
    var = old.variance - np.einsum("ij,ij->j", U, U)
    return Prediction(mean, _clamp(var, prior))


def update_mean(state, block, batch, x):
    """Posterior mean after assimilating ``batch``."""
    x = state.point(x)
    return float(update_predict(state, block, batch, x[None, :]).mean[0])


def update_variance_corrected(state, block, x, *, clamp=True):
    """Posterior variance after conditioning on the block's points.

    ``var_old(x) - s^T Sigma_new^{-1} s`` with ``s = sigma_old(X_new, x)``,
    evaluated as a squared norm after one triangular solve.  Does not
    depend on the new values.  ``clamp=False`` returns the raw value, which
    is only useful with a modified block such as
    :meth:`ConditionalBlock.decorrelated`.
    """
    _check(state, block)
    x = state.point(x)
    u = _whitened_cross(block, x[None, :])[:, 0]
    var = predict_variance(state, x) - float(u @ u)
    if not clamp:
        return var
    return float(_clamp(var, kernels.evaluate(state.kernel, x, x)))


def update_cov_corrected(state, block, x, y):
    """Posterior covariance after conditioning on the block's points."""
    _check(state, block)
    x = state.point(x)
    y = state.point(y)
    U = _whitened_cross(block, np.vstack([x, y]))
    return predict_cov(state, x, y) - float(U[:, 0] @ U[:, 1])


def update_variance_emery(state, block, x):
    """Per-point variance update, INCORRECT for batches of more than one point.

    ``var_old(x) - sum_i lam_i(x)^2 Sigma_new[i, i]``: the cross terms
    ``lam_i lam_j Sigma_new[i, j]`` are dropped, so the value is too large
    whenever ``Sigma_new`` is not diagonal.  Reference only; use
    :func:`update_variance_corrected`.
    """
    _check(state, block)
    lam = weights_new(block, x)
    return predict_variance(state, x) - float(np.sum(lam**2 * block.effective_diag()))


def update_cov_emery(state, block, x, y):
    """Per-point covariance update, INCORRECT for batches; reference only."""
    _check(state, block)
    lam_x = weights_new(block, x)
    lam_y = weights_new(block, y)
    return predict_cov(state, x, y) - float(np.sum(lam_x * lam_y * block.effective_diag()))


def assimilate(state, batch):
    """State conditioned on the old observations and ``batch``.

    The old factor is extended by ``k`` rows (:func:`~batchkrig.linalg.block_extend`),
    never refactored.

    Raises
    ------
    NotPositiveDefinite
        If the batch repeats a point, either within itself or from the
        state.
    """
    X_new = state.points(batch.X_new)
    n, k = state.n, batch.k
    C = kernels.gram(state.kernel, X_new)
    if n:
        B = kernels.cross(state.kernel, state.X, X_new)
    else:
        B = np.empty((0, k))
    factor = block_extend(state.factor, B, C, state.jitter)
    L21 = factor.L[n:, :n]
    L22 = CholeskyFactor(factor.L[n:, n:])
    tail = solve_lower(L22, batch.Z_new - L21 @ state.whitened)
    return KrigingState(
        state.kernel,
        np.vstack([state.X, X_new]) if n else X_new,
        np.concatenate([state.Z, batch.Z_new]),
        factor,
        state.jitter,
        np.concatenate([state.whitened, tail]),
        X_new.shape[1],
    )


def single_point_update(state, x_new, z_new, x):
    """Classic one-observation update of the mean and variance at ``x``.

    ``lam = cov_old(x_new, x) / var_old(x_new)``, then
    ``mean = m_old(x) + lam (z_new - m_old(x_new))`` and
    ``var = var_old(x) - lam^2 var_old(x_new)``.  With a jittered state the
    denominator is ``var_old(x_new) + jitter``, matching the batch path.

    Raises
    ------
    DegenerateNewPoint
        If ``var_old(x_new)`` is at roundoff level, i.e. ``x_new`` is
        already observed.
    """
    x_new = state.point(x_new)
    x = state.point(x)
    try:
        block = conditional_block(state, x_new[None, :])
    except NotPositiveDefinite as exc:
        raise DegenerateNewPoint(f"new point is already observed: {exc}") from None
    pivot = float(block.sigma_new[0, 0]) + state.jitter
    if pivot <= 1e-12 * kernels.evaluate(state.kernel, x_new, x_new):
        raise DegenerateNewPoint(
            f"posterior variance at the new point is {pivot:.3g}; it is already observed"
        )
    lam = float(block.cross_old(x[None, :])[0, 0]) / pivot
    mean = predict_mean(state, x) + lam * (float(z_new) - predict_mean(state, x_new))
    var = predict_variance(state, x) - lam**2 * pivot
    return Prediction(mean, float(_clamp(var, kernels.evaluate(state.kernel, x, x))))
