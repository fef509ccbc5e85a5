"""Command-line entry point: ``batchkrig {counterexample,verify,bench,predict}``.

Exit codes: 0 success, 1 verification or counter-example failure, 2 usage
or parse error, 3 numeric error (a singular covariance).
"""
import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import bench, counterexample, kriging, verification
from .kernels import FAMILIES, Kernel
from .linalg import NotPositiveDefinite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger("batchkrig")


class InputError(ValueError):
    """Malformed input file."""


def _int_list(text):
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"expected nonnegative integers, got {text!r}")
    return values


def _family_list(text):
    try:
        families = tuple(Kernel(v.strip()).family for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not families:
        raise argparse.ArgumentTypeError("no kernel family given")
    return families


def _nonnegative(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return value


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


# ---------------------------------------------------------------- CSV input


def read_points(path, with_values):
    """Read ``x1..xd[,z]`` rows; returns ``(X, Z or None, d or None)``.

    A file with no header (zero bytes) is an empty design of unknown
    dimension.  Errors name the file and line.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not rows:
        return np.empty((0, 1)), (np.empty(0) if with_values else None), None
    line, header = rows[0]
    header = [h.strip() for h in header]
    d = len(header) - (1 if with_values else 0)
    expected = [f"x{i + 1}" for i in range(d)] + (["z"] if with_values else [])
    if d < 1 or header != expected:
        wanted = "x1,...,xd,z" if with_values else "x1,...,xd"
        raise InputError(f"{path}:{line}: header must be {wanted}, got {','.join(header)!r}")
    data = []
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise InputError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        try:
            values = [float(c) for c in row]
        except ValueError:
            raise InputError(f"{path}:{line}: non-numeric field in {','.join(row)!r}") from None
        if not all(np.isfinite(values)):
            raise InputError(f"{path}:{line}: non-finite value")
        data.append(values)
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    if with_values:
        return arr[:, :d], arr[:, d], d
    return arr, None, d


# ---------------------------------------------------------------- commands


def cmd_counterexample(args, out):
    report = counterexample.reproduce()
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_verify(args, out):
    config = verification.VerifyConfig(
        seed=args.seed,
        trials=args.trials,
        n=args.n,
        k=args.k,
        d=args.d,
        kernels=args.kernel,
        jitter=args.jitter,
        queries=args.queries,
        lengthscale=args.lengthscale,
    )
    for family in config.kernels:
        if family == "brownian" and any(d != 1 for d in config.d):
            if all(d != 1 for d in config.d):
                raise InputError("brownian kernel needs d = 1; none of --d is 1")
            logger.info("brownian kernel runs for d = 1 only")
    if any(k < 1 for k in config.k):
        raise InputError("--k values must be at least 1")
    results, count = verification.run(config)
    print(f"instances           {count}  (seed {config.seed})", file=out)
    for result in results.values():
        print(result.line(), file=out)
        for where, err in result.failures[:5]:
            print(f"    failed: {where}: {err:.3e}", file=out)
    ok = all(r.passed for r in results.values())
    print(f"overall             {'PASS' if ok else 'FAIL'}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args, out):
    if any(k < 1 for k in args.k):
        raise InputError("--k values must be at least 1")
    kernel = Kernel(args.kernel, args.variance, args.lengthscale)
    rows = []
    for n in args.n:
        for k in args.k:
            try:
                row = bench.run_case(
                    kernel, n, k, args.d, args.trials, args.jitter,
                    np.random.default_rng([args.seed, n, k]),
                )
            except bench.DisagreementError as exc:
                print(f"error: {exc}; no timings emitted", file=sys.stderr)
                return EXIT_FAIL
            logger.info("n=%d k=%d speedup %.1fx", n, k, row.speedup)
            rows.append(row)
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow(bench.COLUMNS)
    for row in rows:
        writer.writerow([row.n, row.k, f"{row.update_time_s:.6e}", f"{row.refit_time_s:.6e}", f"{row.speedup:.3f}"])
    _emit(text.getvalue(), args.out, out)
    return EXIT_OK


def cmd_predict(args, out):
    X, Z, d = read_points(args.obs, with_values=True)
    Q, _, dq = read_points(args.query, with_values=False)
    if dq is None:
        raise InputError(f"{args.query}: no query header")
    if d is not None and d != dq:
        raise InputError(f"observations have d={d} but queries have d={dq}")
    kernel = Kernel(args.kernel, args.variance, args.lengthscale)
    state = kriging.fit(kernel, X.reshape(-1, dq) if d is None else X, Z, jitter=args.jitter, dim=dq)
    if args.batch:
        Xb, Zb, db = read_points(args.batch, with_values=True)
        if db is not None and db != dq:
            raise InputError(f"batch has d={db} but queries have d={dq}")
        if Zb.size:
            state = kriging.assimilate(state, kriging.UpdateBatch(Xb, Zb))
    pred = kriging.predict(state, Q) if Q.shape[0] else kriging.Prediction(np.empty(0), np.empty(0))
    _emit(format_predictions(Q, pred, args.format), args.out, out)
    return EXIT_OK


def format_predictions(Q, pred, fmt):
    d = Q.shape[1]
    if fmt == "json":
        records = [
            {"x": [float(c) for c in q], "mean": float(m), "variance": float(v)}
            for q, m, v in zip(Q, pred.mean, pred.variance)
        ]
        return json.dumps(records, indent=2) + "\n"
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(d)] + ["mean", "variance"])
    for q, m, v in zip(Q, pred.mean, pred.variance):
        writer.writerow([repr(float(c)) for c in q] + [repr(float(m)), repr(float(v))])
    return text.getvalue()


def _emit(text, path, out):
    if path in (None, "-"):
        out.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- parser


def _add_kernel(p, default_family):
    p.add_argument("--kernel", default=default_family, help=f"kernel family: {', '.join(FAMILIES)}")
    p.add_argument("--variance", type=_positive, default=1.0)
    p.add_argument("--lengthscale", type=_positive, default=0.3)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="batchkrig", description="Simple Kriging with batch-sequential updates."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("counterexample", help="reproduce the Brownian-motion counter-example")

    p = sub.add_parser("verify", help="seeded property suites against a brute-force refit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--n", type=_int_list, default=(0, 5, 20))
    p.add_argument("--k", type=_int_list, default=(1, 2, 5))
    p.add_argument("--d", type=_int_list, default=(1, 3))
    p.add_argument("--kernel", type=_family_list, default=("se", "matern52", "brownian"))
    p.add_argument("--jitter", type=_nonnegative, default=0.0)
    p.add_argument("--queries", type=int, default=20)
    p.add_argument(
        "--lengthscale", type=_positive, default=None,
        help="fixed lengthscale; default draws one per instance from the design spacing",
    )

    p = sub.add_parser("bench", help="time batch assimilation against a full refit")
    p.add_argument("--n", type=_int_list, default=(0, 500, 2000))
    p.add_argument("--k", type=_int_list, default=(1, 10))
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=_nonnegative, default=1e-10)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    _add_kernel(p, "se")

    p = sub.add_parser("predict", help="posterior mean and variance at query points")
    p.add_argument("--obs", required=True, help="observations CSV: x1,...,xd,z")
    p.add_argument("--batch", default=None, help="optional batch CSV to assimilate")
    p.add_argument("--query", required=True, help="query CSV: x1,...,xd")
    p.add_argument("--jitter", type=_nonnegative, default=0.0)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    _add_kernel(p, "se")
    return parser


COMMANDS = {
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "predict": cmd_predict,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, out)
    except NotPositiveDefinite as exc:
        print(f"error: {exc}. The design has repeated or near-repeated points; "
              "try a positive --jitter.", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
