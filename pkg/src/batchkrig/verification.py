"""Seeded property suites comparing the update path with brute force.

Each instance draws a kernel, ``n`` old and ``k`` new design points,
observations sampled from the prior, and a set of query points.  The
stationary kernels get a random variance and a lengthscale tied to the fill
distance ``N ** (-1 / d)`` of the ``N = n + k`` points, and designs keep a
minimum separation, so every instance stays well conditioned.  Agreement
at 1e-9 says something about the algorithm only when the condition number
leaves room for it.

Errors are scaled, not purely relative: a variance error is divided by
``|reference| + prior variance`` at the query point, a mean error by
``|reference| + max |Z|``, a weight error by ``max(1, max |weights|)``, and a residual of the
weight equations by its usual backward-error scale plus the covariance
scale ``sqrt(k(x, x) max k(X_new, X_new))``.
This keeps exact zeros (interpolation, Markov screening of the Brownian
kernel) from turning roundoff into infinite relative error.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels, kriging, linalg, oracle

EPS = np.finfo(float).eps

TOLERANCES = {
    "oracle_equivalence": 1e-8,
    "weight_identity": 1e-9,
    "total_variance": 1e-9,
    "variance_monotone": 1e-9,
    "emery_gap": 1e-9,
    "emery_decorrelated": 1e-12,
    "k1_collapse": 16 * EPS,
    "block_factor": 1e-9,
}


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 0
    trials: int = 5
    n: tuple = (0, 5, 20)
    k: tuple = (1, 2, 5)
    d: tuple = (1, 3)
    kernels: tuple = ("se", "matern52", "brownian")
    jitter: float = 0.0
    queries: int = 20
    lengthscale: float = None


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    max_error: float = 0.0
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def record(self, error, where):
        error = float(error)
        self.checks += 1
        if not error <= self.max_error:
            self.max_error = error if np.isfinite(error) else np.inf
        if not error <= self.tolerance:
            self.failures.append((where, error))

    def line(self):
        status = "FAIL" if self.failures else ("PASS" if self.checks else "SKIP")
        return (
            f"{self.name:<20} {status}  max_error={self.max_error:.3e}  "
            f"tol={self.tolerance:.1e}  checks={self.checks}"
        )


@dataclass(frozen=True, eq=False)
class Instance:
    label: str
    kernel: kernels.Kernel
    X_old: np.ndarray
    Z_old: np.ndarray
    X_new: np.ndarray
    Z_new: np.ndarray
    queries: np.ndarray

    @property
    def X_all(self):
        return np.vstack([self.X_old, self.X_new])

    @property
    def Z_all(self):
        return np.concatenate([self.Z_old, self.Z_new])


def separated_design(rng, size, d, min_gap, low=0.0):
    """Uniform points in ``[low, 1]^d`` no closer than ``min_gap`` pairwise."""
    points = []
    while len(points) < size:
        candidate = rng.uniform(low, 1.0, d)
        if all(np.linalg.norm(candidate - p) >= min_gap for p in points):
            points.append(candidate)
    return np.array(points).reshape(size, d)


def make_instance(rng, family, n, k, d, queries=20, jitter=0.0, lengthscale=None):
    total = n + k
    fill = total ** (-1.0 / d)
    variance = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
    drawn = float(fill * rng.uniform(0.5, 1.0))
    lengthscale = drawn if lengthscale is None else float(lengthscale)
    kernel = kernels.Kernel(family, variance, lengthscale)
    low = 0.05 if family == "brownian" else 0.0
    X = separated_design(rng, total, d, 0.3 * fill, low=low)
    K = kernels.gram(kernel, X)
    w, V = np.linalg.eigh(K + jitter * np.eye(total))
    Z = V @ (np.sqrt(np.clip(w, 0.0, None)) * rng.standard_normal(total))
    Q = rng.uniform(low, 1.0, (queries, d))
    label = f"{family} d={d} n={n} k={k} var={variance:.3g} ls={lengthscale:.3g}"
    return Instance(label, kernel, X[:n], Z[:n], X[n:], Z[n:], Q)


def instances(config):
    """Every (kernel, d, n, k) combination, ``config.trials`` times."""
    rng = np.random.default_rng(config.seed)
    for family in config.kernels:
        for d in config.d:
            if kernels.Kernel(family).family == "brownian" and d != 1:
                continue
            for n in config.n:
                for k in config.k:
                    for _ in range(config.trials):
                        yield make_instance(
                            rng, family, n, k, d, config.queries, config.jitter, config.lengthscale
                        )


def _scaled(a, b, scale):
    return np.abs(np.asarray(a) - np.asarray(b)) / (np.abs(np.asarray(b)) + scale)


def check_instance(inst, results, jitter=0.0):
    """Run every per-instance property on ``inst``, recording into ``results``."""
    kernel, Q = inst.kernel, inst.queries
    state = kriging.fit(kernel, inst.X_old, inst.Z_old, jitter=jitter, dim=Q.shape[1])
    batch = kriging.UpdateBatch(inst.X_new, inst.Z_new)
    block = kriging.conditional_block(state, batch.X_new)
    prior = kernels.diag(kernel, Q)
    z_scale = max(np.max(np.abs(inst.Z_all)), np.finfo(float).tiny)
    P = np.roll(Q, 1, axis=0)
    where = inst.label

    # oracle equivalence: update formulas and assimilation against a refit
    ref_mean, ref_var, ref_cov = oracle.refit_predict(
        kernel, inst.X_all, inst.Z_all, Q, P, jitter=jitter
    )
    upd = kriging.update_predict(state, block, batch, Q)
    cov = np.array([kriging.update_cov_corrected(state, block, q, p) for q, p in zip(Q, P)])
    merged = kriging.predict(kriging.assimilate(state, batch), Q)
    cov_scale = np.sqrt(prior * kernels.diag(kernel, P))
    eq = results["oracle_equivalence"]
    eq.record(np.max(_scaled(upd.mean, ref_mean, z_scale)), where + " mean")
    eq.record(np.max(_scaled(upd.variance, ref_var, prior)), where + " variance")
    eq.record(np.max(_scaled(cov, ref_cov, cov_scale)), where + " covariance")
    eq.record(np.max(_scaled(merged.mean, ref_mean, z_scale)), where + " assimilated mean")
    eq.record(np.max(_scaled(merged.variance, ref_var, prior)), where + " assimilated variance")

    full = oracle.full_weights(kernel, inst.X_all, Q, state.n, jitter=jitter)
    sigma = block.sigma_new + jitter * np.eye(block.k)
    S = block.cross_old(Q)
    for j, q in enumerate(Q):
        lam = kriging.weights_new(block, q)
        s = S[:, j]

        # Sigma_new lam = sigma_old(X_new, x), and lam is the tail of the full weights
        residual = np.max(np.abs(sigma @ lam - s))
        cov_unit = np.sqrt(prior[j] * np.max(kernels.diag(kernel, inst.X_new)))
        backward_scale = np.max(np.abs(sigma)) * np.max(np.abs(lam)) + np.max(np.abs(s)) + cov_unit
        results["weight_identity"].record(residual / backward_scale, where + " residual")
        lam_full = full.lambda_new[:, j]
        weight_scale = max(1.0, np.max(np.abs(full.all[:, j])))
        results["weight_identity"].record(
            np.max(np.abs(lam - lam_full)) / weight_scale, where + " full weights"
        )

        var_old = kriging.predict_variance(state, q)
        var_new = kriging.update_variance_corrected(state, block, q)
        quad = float(lam @ sigma @ lam)
        results["total_variance"].record(
            abs(var_old - var_new - quad) / prior[j], where + " identity"
        )
        results["variance_monotone"].record(
            max(var_new - var_old, 0.0) / prior[j], where + " var_new <= var_old"
        )

        emery = kriging.update_variance_emery(state, block, q)
        off = quad - float(np.sum(lam**2 * np.diag(sigma)))
        gap = emery - var_new
        if block.k == 1:
            results["k1_collapse"].record(abs(gap) / prior[j], where + " variance")
            cov_gap = kriging.update_cov_emery(state, block, q, P[j]) - kriging.update_cov_corrected(
                state, block, q, P[j]
            )
            results["k1_collapse"].record(abs(cov_gap) / cov_scale[j], where + " covariance")
        else:
            results["emery_gap"].record(abs(gap - off) / prior[j], where + " off-diagonal form")
            dec = block.decorrelated()
            dec_gap = kriging.update_variance_emery(
                state, dec, q
            ) - kriging.update_variance_corrected(state, dec, q, clamp=False)
            results["emery_decorrelated"].record(abs(dec_gap) / prior[j], where + " zeroed")


def check_block_factor(rng, results, sizes=((50, 10),), trials=10):
    """``block_extend`` against a fresh factorization of random SPD matrices."""
    res = results["block_factor"]
    for n_max, k_max in sizes:
        for _ in range(trials):
            n = int(rng.integers(0, n_max + 1))
            k = int(rng.integers(1, k_max + 1))
            G = rng.standard_normal((n + k, n + k))
            A = G @ G.T + (n + k) * np.eye(n + k)
            F = linalg.cholesky(A[:n, :n])
            ext = linalg.block_extend(F, A[:n, n:], A[n:, n:])
            fresh = linalg.cholesky(A)
            scale = np.max(np.abs(fresh.L))
            res.record(np.max(np.abs(ext.L - fresh.L)) / scale, f"spd n={n} k={k}")


def run(config=VerifyConfig()):
    """Run all suites; returns ``{name: SuiteResult}`` in a fixed order."""
    results = {name: SuiteResult(name, tol) for name, tol in TOLERANCES.items()}
    count = 0
    for inst in instances(config):
        check_instance(inst, results, config.jitter)
        count += 1
    check_block_factor(np.random.default_rng([config.seed, 1]), results, trials=4 * config.trials)
    return results, count
