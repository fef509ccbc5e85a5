"""Cholesky factors of covariance matrices and their block extension.

The dense kernels (factorization, triangular solves) are LAPACK calls
through :mod:`scipy.linalg`.  :func:`block_extend` is what makes batch
assimilation cheap: appending ``k`` rows and columns to an ``n x n``
factored matrix costs ``O(n^2 k + n k^2 + k^3)`` instead of a fresh
``O((n + k)^3)`` factorization.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class NotPositiveDefinite(np.linalg.LinAlgError):
    """A factorization met a numerically nonpositive pivot.

    In a noiseless covariance model this means the design is singular,
    usually a repeated point.  Adding jitter is the caller's decision.
    """


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T`` equal to the factored matrix.

    ``jitter`` records the nugget that was added to the diagonal, so
    ``L @ L.T == A + jitter * I``.  An empty ``(0, 0)`` factor stands for
    the prior, i.e. no observations.
    """

    L: np.ndarray
    jitter: float = 0.0

    def __post_init__(self):
        self.L.setflags(write=False)

    @property
    def n(self):
        return self.L.shape[0]

    @classmethod
    def empty(cls, jitter=0.0):
        return cls(np.empty((0, 0)), float(jitter))

    def reconstruct(self):
        return self.L @ self.L.T


def _pivot_floor(diagonal, size):
    # pivots at or below roundoff level of the diagonal count as zero
    scale = np.max(np.abs(diagonal)) if diagonal.size else 0.0
    return size * np.finfo(float).eps * scale


def _check_square(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * scale:
        raise ValueError(f"{name} is not symmetric")
    return A


def _factor(A, floor, what):
    try:
        L = sla.cholesky(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{what} is not positive definite ({exc})") from None
    pivots = np.diag(L) ** 2
    bad = np.flatnonzero(pivots <= floor)
    if bad.size:
        raise NotPositiveDefinite(
            f"{what} is numerically singular: pivot {bad[0]} is {pivots[bad[0]]:.3g}"
        )
    return L


def cholesky(A, jitter=0.0):
    """Factor ``A + jitter * I``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is nonpositive up to roundoff.
    ValueError
        If ``A`` is not square and symmetric, or ``jitter`` is negative.
    """
    if jitter < 0:
        raise ValueError(f"jitter must be nonnegative, got {jitter}")
    A = _check_square(A)
    n = A.shape[0]
    if n == 0:
        return CholeskyFactor.empty(jitter)
    M = A + jitter * np.eye(n)
    L = _factor(M, _pivot_floor(np.diag(M), n), f"{n}x{n} matrix")
    return CholeskyFactor(L, float(jitter))


def solve_lower(F, B):
    """Forward substitution, ``L^{-1} B``."""
    B = np.asarray(B, dtype=float)
    if B.shape[0] != F.n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, factor has size {F.n}")
    if F.n == 0:
        return B.copy()
    return sla.solve_triangular(F.L, B, lower=True, check_finite=False)


def solve(F, B):
    """Return ``A^{-1} B`` by forward then backward substitution."""
    Y = solve_lower(F, B)
    if F.n == 0:
        return Y
    return sla.solve_triangular(F.L, Y, lower=True, trans="T", check_finite=False)


def schur_complement(F, B, C):
    """``C - B.T A^{-1} B`` where ``F`` factors ``A``.

    Returned symmetrized.  Also returns ``W = L^{-1} B``, the transposed
    off-diagonal block of the extended factor.
    """
    C = _check_square(C, "new block")
    B = np.asarray(B, dtype=float).reshape(F.n, C.shape[0])
    W = solve_lower(F, B)
    S = C - W.T @ W
    S = 0.5 * (S + S.T)
    return S, W


def extend_parts(F, B, C, jitter=None):
    """Blocks of the extended factor without assembling it.

    Returns ``(W, L22, S)``: ``W = L^{-1} B`` (so the new off-diagonal rows
    are ``W.T``), the trailing factor ``L22`` of ``S + jitter * I``, and the
    Schur complement ``S = C - B.T A^{-1} B`` itself.  Singularity is judged
    against the diagonal of ``C``, not of ``S``, since a tiny Schur pivot
    is exactly what a repeated point looks like.
    """
    jitter = F.jitter if jitter is None else float(jitter)
    if jitter < 0:
        raise ValueError(f"jitter must be nonnegative, got {jitter}")
    C = _check_square(C, "new block")
    k = C.shape[0]
    if k == 0:
        raise ValueError("block_extend needs at least one new row")
    S, W = schur_complement(F, B, C)
    floor = _pivot_floor(np.diag(C) + jitter, F.n + k)
    L22 = _factor(S + jitter * np.eye(k), floor, f"Schur complement of the {k} new rows")
    return W, L22, S


def block_extend(F, B, C, jitter=None):
    """Factor of ``[[A, B], [B.T, C]]`` from the factor ``F`` of ``A``.

    The old factor is reused as is.  The off-diagonal block comes from one
    triangular solve and the trailing block from a Cholesky factorization
    of the Schur complement.  ``jitter`` (default: the jitter of ``F``) is
    added to the trailing diagonal only, so extending a jittered factor
    with its own jitter reproduces the factor of the jittered full matrix.

    Raises
    ------
    NotPositiveDefinite
        If the Schur complement is numerically singular, which signals new
        rows that duplicate each other or old rows.
    """
    jitter = F.jitter if jitter is None else float(jitter)
    W, L22, _ = extend_parts(F, B, C, jitter)
    n, k = F.n, L22.shape[0]
    # match the memory order of F.L (LAPACK output is column-major); a
    # cross-order copy of the old block would dominate the update cost
    L = np.zeros((n + k, n + k), order="F" if F.L.flags.f_contiguous else "C")
    L[:n, :n] = F.L
    L[n:, :n] = W.T
    L[n:, n:] = L22
    return CholeskyFactor(L, jitter)
