"""Brownian-motion example where the per-point batch variance update fails.

Kernel ``min(x, y)`` on ``[0, 1]``, no initial observations, a batch of two
at ``x1 = 1/2`` and ``x2 = 1``, prediction at ``x = 3/4``.  Exact values:
weights ``(1/2, 1/2)``, prior variance ``3/4``, posterior variance
``1/8``.  Dropping the conditional covariance of the two new observations
gives ``3/8`` instead; the missing term is ``2 * 1/2 * 1/2 * min(x1, x2)
= 1/4``.
"""
from dataclasses import dataclass

from . import kriging
from .kernels import Kernel

X_NEW = (0.5, 1.0)
QUERY = 0.75
TOLERANCE = 1e-12

EXPECTED = {
    "weight_1": 0.5,
    "weight_2": 0.5,
    "prior_variance": 0.75,
    "corrected_variance": 0.125,
    "emery_variance": 0.375,
    "correction_term": 0.25,
}


@dataclass(frozen=True)
class Report:
    values: dict

    def deviations(self):
        return {
            name: abs(self.values[name] - expected)
            for name, expected in EXPECTED.items()
        }

    @property
    def ok(self):
        return all(dev <= TOLERANCE for dev in self.deviations().values())

    def lines(self):
        v = self.values
        status = "OK" if self.ok else "MISMATCH"
        return [
            "kernel              min(x, y)  (Brownian motion)",
            f"observations        n=0, batch x1={X_NEW[0]!r} x2={X_NEW[1]!r} (k=2)",
            f"query               x={QUERY!r}",
            f"weights             {v['weight_1']!r} {v['weight_2']!r}",
            f"prior_variance      {v['prior_variance']!r}",
            f"corrected_variance  {v['corrected_variance']!r}",
            f"emery_variance      {v['emery_variance']!r}"
            "  WARNING: reference-incorrect per-point formula",
            f"correction_term     {v['correction_term']!r}",
            f"status              {status} (tolerance {TOLERANCE:g})",
        ]


def reproduce():
    """Compute every value of the example with the library."""
    state = kriging.fit(Kernel("brownian"), dim=1)
    block = kriging.conditional_block(state, X_NEW)
    lam = kriging.weights_new(block, QUERY)
    return Report(
        {
            "weight_1": float(lam[0]),
            "weight_2": float(lam[1]),
            "prior_variance": kriging.predict_variance(state, QUERY),
            "corrected_variance": kriging.update_variance_corrected(state, block, QUERY),
            "emery_variance": kriging.update_variance_emery(state, block, QUERY),
            "correction_term": float(2.0 * lam[0] * lam[1] * block.sigma_new[0, 1]),
        }
    )
