"""Covariance kernels and the matrices built from them.

Points are handled as numpy arrays.  A *design* (a set of points) is an
``(n, d)`` array; a single point is a ``(d,)`` array.  Scalars and flat
sequences are accepted wherever the meaning is unambiguous, see
:func:`as_points` and :func:`as_point`.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

FAMILIES = ("brownian", "se", "matern52")

_ALIASES = {
    "brownian": "brownian",
    "wiener": "brownian",
    "min": "brownian",
    "se": "se",
    "squared-exponential": "se",
    "squared_exponential": "se",
    "rbf": "se",
    "matern52": "matern52",
    "matern-5/2": "matern52",
    "matern": "matern52",
}


def as_points(X, d=None):
    """Coerce ``X`` to an ``(n, d)`` float array.

    A 1-D input is read as ``n`` scalar points (``d = 1``); a scalar is a
    single scalar point.  Empty input gives a ``(0, d)`` array, with ``d``
    taken from the argument (default 1).
    """
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        width = d if d is not None else (X.shape[1] if X.ndim == 2 else 1)
        return np.empty((0, width))
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1)
    elif X.ndim != 2:
        raise ValueError(f"a design must be at most 2-D, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {X.shape[1]}")
    if not np.isfinite(X).all():
        raise ValueError("point coordinates must be finite")
    return X


def as_point(x, d=None):
    """Coerce ``x`` to a single point, a ``(d,)`` float array."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"a point must be a scalar or a flat vector, got shape {x.shape}")
    if d is not None and x.size != d:
        raise ValueError(f"expected a point of dimension {d}, got {x.size}")
    if not np.isfinite(x).all():
        raise ValueError("point coordinates must be finite")
    return x


@dataclass(frozen=True)
class Kernel:
    """A positive-definite covariance function.

    Parameters
    ----------
    family : str
        ``"brownian"`` (Wiener process, ``variance * min(x, y)`` on
        ``[0, inf)``, one-dimensional only), ``"se"`` (squared exponential)
        or ``"matern52"`` (Matern with smoothness 5/2).  A few common
        aliases are accepted and normalized.
    variance : float
        Scale factor of the covariance; the prior variance for the
        stationary families.
    lengthscale : float
        Isotropic lengthscale; ignored by ``"brownian"``.
    """

    family: str = "se"
    variance: float = 1.0
    lengthscale: float = 1.0

    def __post_init__(self):
        key = str(self.family).strip().lower()
        if key not in _ALIASES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", _ALIASES[key])
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "lengthscale", float(self.lengthscale))
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValueError(f"variance must be positive, got {self.variance}")
        if not (np.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")

    def check_design(self, X):
        if self.family == "brownian":
            if X.shape[1] != 1:
                raise ValueError(f"brownian kernel is defined for d = 1 only, got d = {X.shape[1]}")
            if (X < 0).any():
                raise ValueError("brownian kernel requires nonnegative coordinates")

    def _matrix(self, X, Y):
        self.check_design(X)
        self.check_design(Y)
        if self.family == "brownian":
            return self.variance * np.minimum(X[:, 0][:, None], Y[:, 0][None, :])
        sq = cdist(X, Y, "sqeuclidean")
        if self.family == "se":
            return self.variance * np.exp(-0.5 * sq / self.lengthscale**2)
        r = np.sqrt(5.0 * sq) / self.lengthscale
        return self.variance * (1.0 + r + r**2 / 3.0) * np.exp(-r)

    def __call__(self, X, Y=None):
        """Covariance matrix between the designs ``X`` and ``Y``."""
        if Y is None:
            return gram(self, X)
        return cross(self, X, Y)


def _pair(X, Y):
    X = as_points(X)
    Y = as_points(Y, d=X.shape[1])
    return X, Y


def evaluate(kernel, x, y):
    """Covariance ``kernel(x, y)`` between two single points."""
    x = as_point(x)
    y = as_point(y, d=x.size)
    return float(kernel._matrix(x[None, :], y[None, :])[0, 0])


def gram(kernel, X):
    """Gram matrix of ``X``, symmetric to the bit.

    The upper triangle is computed and mirrored, so roundoff in the kernel
    evaluation can never break symmetry.
    """
    X = as_points(X)
    if X.shape[0] == 0:
        raise ValueError("gram needs a nonempty design")
    K = kernel._matrix(X, X)
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def cross(kernel, X, Y):
    """Cross-covariance matrix, ``out[i, j] = kernel(X[i], Y[j])``."""
    X, Y = _pair(X, Y)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise ValueError("cross needs nonempty designs")
    return kernel._matrix(X, Y)


def diag(kernel, X):
    """Prior variances ``kernel(x, x)`` for every row of ``X``."""
    X = as_points(X)
    kernel.check_design(X)
    if kernel.family == "brownian":
        return kernel.variance * X[:, 0].copy()
    return np.full(X.shape[0], kernel.variance)
