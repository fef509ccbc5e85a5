"""Wall-clock comparison of batch assimilation against a full refit."""
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import kernels, kriging

COLUMNS = ("n", "k", "update_time_s", "refit_time_s", "speedup")

#: Scaled disagreement above which timings are not reported.
AGREEMENT_TOL = 1e-8


class DisagreementError(RuntimeError):
    """The update path and the refit predict different posteriors."""


@dataclass(frozen=True)
class BenchRow:
    n: int
    k: int
    update_time_s: float
    refit_time_s: float

    @property
    def speedup(self):
        return self.refit_time_s / self.update_time_s

    def as_tuple(self):
        return (self.n, self.k, self.update_time_s, self.refit_time_s, self.speedup)


def _median_time(fn, trials):
    fn()  # warm-up, discarded
    times = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def check_agreement(updated, refit, rng, queries=50):
    """Largest scaled difference between two states' predictions."""
    d = updated.X.shape[1]
    Q = rng.uniform(0.0, 1.0, (queries, d))
    if updated.kernel.family == "brownian":
        Q = Q + 0.01
    a = kriging.predict(updated, Q)
    b = kriging.predict(refit, Q)
    z_scale = max(np.max(np.abs(refit.Z)), np.finfo(float).tiny)
    prior = kernels.diag(refit.kernel, Q)
    mean_err = np.max(np.abs(a.mean - b.mean) / (np.abs(b.mean) + z_scale))
    var_err = np.max(np.abs(a.variance - b.variance) / (np.abs(b.variance) + prior))
    return max(mean_err, var_err)


def run_case(kernel, n, k, d=1, trials=5, jitter=1e-10, rng=None):
    """Time ``assimilate`` of ``k`` points into an ``n``-point state vs. ``fit``.

    Both paths are checked to agree before anything is timed.

    Raises
    ------
    DisagreementError
        If the two posteriors differ by more than :data:`AGREEMENT_TOL`.
    """
    rng = np.random.default_rng() if rng is None else rng
    low = 0.01 if kernel.family == "brownian" else 0.0
    X = rng.uniform(low, 1.0, (n + k, d))
    Z = np.sin(6.0 * X.sum(axis=1)) + 0.5 * np.cos(2.0 * X[:, 0])
    old = kriging.fit(kernel, X[:n], Z[:n], jitter=jitter, dim=d)
    batch = kriging.UpdateBatch(X[n:], Z[n:])

    err = check_agreement(
        kriging.assimilate(old, batch), kriging.fit(kernel, X, Z, jitter=jitter), rng
    )
    if not err <= AGREEMENT_TOL:
        raise DisagreementError(
            f"n={n} k={k}: update and refit disagree by {err:.3g} (> {AGREEMENT_TOL:g})"
        )

    update = _median_time(lambda: kriging.assimilate(old, batch), trials)
    refit = _median_time(lambda: kriging.fit(kernel, X, Z, jitter=jitter), trials)
    return BenchRow(n, k, update, refit)


def run(ns, ks, kernel=None, d=1, trials=5, jitter=1e-10, seed=0):
    kernel = kernels.Kernel("se", 1.0, 0.3) if kernel is None else kernel
    rng = np.random.default_rng(seed)
    return [run_case(kernel, n, k, d, trials, jitter, rng) for n in ns for k in ks]
