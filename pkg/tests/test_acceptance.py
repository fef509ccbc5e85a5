"""Acceptance criteria, each at its stated tolerance.

Every test reports one PASS/FAIL line through the ``criterion`` fixture; the
lines are collected in the "acceptance" section of the pytest summary.
"""
import time

import numpy as np
import pytest

from batchkrig import Kernel, bench, counterexample, linalg
from batchkrig.verification import VerifyConfig, run

EPS = np.finfo(float).eps


@pytest.fixture(scope="module")
def grid():
    # seeded grid: 3 kernels x n in {0,5,20} x k in {1,2,5} x d in {1,3}, 5 trials each
    config = VerifyConfig()
    start = time.perf_counter()
    results, count = run(config)
    return results, count, time.perf_counter() - start


def test_counterexample(criterion):
    counterexample.reproduce()
    times = []
    for _ in range(7):
        start = time.perf_counter()
        report = counterexample.reproduce()
        times.append(time.perf_counter() - start)
    elapsed = float(np.median(times))
    worst = max(report.deviations().values())
    v = report.values
    ok = report.ok and worst <= 1e-12 and elapsed < 1e-3
    detail = (
        f"weights=({v['weight_1']:.15g}, {v['weight_2']:.15g}) prior={v['prior_variance']:.15g} "
        f"corrected={v['corrected_variance']:.15g} emery={v['emery_variance']:.15g} "
        f"correction={v['correction_term']:.15g} max_dev={worst:.1e} time={elapsed * 1e3:.3f}ms"
    )
    assert criterion(1, ok, detail)


def test_oracle_equivalence(criterion, grid):
    results, count, elapsed = grid
    r = results["oracle_equivalence"]
    ok = count >= 200 and r.passed and r.max_error <= 1e-8 and elapsed < 10.0
    assert criterion(
        2, ok, f"instances={count} max_rel_err={r.max_error:.2e} (tol 1e-8) time={elapsed:.2f}s"
    ), r.failures[:3]


def test_weight_identity(criterion, grid):
    results, count, _ = grid
    r = results["weight_identity"]
    ok = r.passed and r.max_error <= 1e-9
    assert criterion(3, ok, f"checks={r.checks} max_rel_err={r.max_error:.2e} (tol 1e-9)"), r.failures[:3]


def test_total_variance(criterion, grid):
    results, _, _ = grid
    tv, mono = results["total_variance"], results["variance_monotone"]
    ok = tv.passed and mono.passed and tv.max_error <= 1e-9 and mono.max_error <= 1e-9
    assert criterion(
        4,
        ok,
        f"identity max_rel_err={tv.max_error:.2e} excess_over_prior={mono.max_error:.2e} (tol 1e-9)",
    ), (tv.failures[:3], mono.failures[:3])


def test_emery_gap(criterion, grid):
    results, _, _ = grid
    gap, dec, k1 = results["emery_gap"], results["emery_decorrelated"], results["k1_collapse"]
    ok = (
        gap.checks > 0 and dec.checks > 0 and k1.checks > 0
        and gap.max_error <= 1e-9 and dec.max_error <= 1e-12 and k1.max_error <= 16 * EPS
    )
    assert criterion(
        5,
        ok,
        f"gap={gap.max_error:.2e} (tol 1e-9) zeroed={dec.max_error:.2e} (tol 1e-12) "
        f"k=1={k1.max_error:.2e} (tol 16 eps)",
    ), (gap.failures[:3], dec.failures[:3], k1.failures[:3])


def test_block_factor(criterion):
    rng = np.random.default_rng(6)
    worst, checks = 0.0, 0
    for n in range(0, 51, 5):
        for k in range(1, 11):
            G = rng.standard_normal((n + k, n + k))
            A = G @ G.T + (n + k) * np.eye(n + k)
            ext = linalg.block_extend(linalg.cholesky(A[:n, :n]), A[:n, n:], A[n:, n:])
            fresh = linalg.cholesky(A)
            worst = max(worst, np.max(np.abs(ext.L - fresh.L)) / np.max(np.abs(fresh.L)))
            checks += 1
    assert criterion(6, worst <= 1e-9, f"cases={checks} max_rel_err={worst:.2e} (tol 1e-9)")


def test_performance(criterion):
    start = time.perf_counter()
    rows = bench.run((0, 500, 2000), (1, 10), kernel=Kernel("se", 1.0, 0.3), trials=5, seed=0)
    elapsed = time.perf_counter() - start
    row = next(r for r in rows if (r.n, r.k) == (2000, 10))
    ok = row.speedup > 1 and elapsed < 60.0
    assert criterion(
        7,
        ok,
        f"n=2000 k=10 update={row.update_time_s:.2e}s refit={row.refit_time_s:.2e}s "
        f"speedup={row.speedup:.1f}x bench_total={elapsed:.1f}s",
    )
