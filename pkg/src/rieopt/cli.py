"""Command line interface: micro-benchmarks, subspace PCA, Frechet means.

Subcommands
    bench    time geometry primitives over a dimension grid
    pca      Grassmann subspace recovery by (optionally private) descent
    frechet  iterative Frechet mean with optional output privatization

All file I/O is CSV.  Exit codes: 0 success, 2 usage or input parsing
error, 3 numeric or domain failure.  The seed comes from --seed, then
the RIEOPT_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from .core import CostFn, ManifoldPoint, frechet_mean
from .errors import RieoptError
from .geometry import (
    Grassmann,
    Hypersphere,
    LorentzHyperboloid,
    PoincareBall,
    SPDAffineInvariant,
    SPDLogEuclidean,
)
from .optimizers import constant, dp_rsgd, fit, rsgd
from .privacy import (
    PrivacyBudget,
    calibrate_dprgd,
    log_euclidean_mechanism,
    rie_laplace_mechanism,
)

GEOMETRIES = ("hypersphere", "poincare", "lorentz", "grassmann", "spd-ai", "spd-le")
BENCH_OPS = ("exp", "log", "dist", "pt")

DEFAULT_DIMS = {
    "hypersphere": ["50", "100", "500", "1000", "5000", "10000"],
    "poincare": ["50", "100", "500", "1000", "5000", "10000"],
    "lorentz": ["50", "100", "500", "1000", "5000", "10000"],
    "grassmann": ["100:10", "500:10", "750:10", "1000:10"],
    "spd-ai": ["10", "50", "75", "100"],
    "spd-le": ["10", "50", "75", "100"],
}

# top eigenvalue of the synthetic covariance spectrum; sized so the default
# learning rate converges at desk scale
SYNTH_SCALE = 150.0


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("RIEOPT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"RIEOPT_SEED must be an integer, got {env!r}") from exc
    return 0


def make_manifold(geometry: str, dim_spec: str):
    if geometry == "grassmann":
        parts = dim_spec.split(":")
        if len(parts) != 2:
            raise UsageError(f"grassmann dims must look like m:r, got {dim_spec!r}")
        try:
            m, r = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise UsageError(f"invalid grassmann dims {dim_spec!r}") from exc
        if not (0 < r < m):
            raise UsageError(f"grassmann dims need 0 < r < m, got {dim_spec!r}")
        return Grassmann(m, r)
    try:
        d = int(dim_spec)
    except ValueError as exc:
        raise UsageError(f"invalid dimension {dim_spec!r} for {geometry}") from exc
    if geometry == "hypersphere":
        return Hypersphere(d)
    if geometry == "poincare":
        return PoincareBall(d)
    if geometry == "lorentz":
        return LorentzHyperboloid(d)
    if geometry == "spd-ai":
        return SPDAffineInvariant(d)
    if geometry == "spd-le":
        return SPDLogEuclidean(d)
    raise UsageError(f"unknown geometry {geometry!r}")


def read_matrix_csv(path: str) -> np.ndarray:
    """Read a header-free rectangular numeric CSV."""
    rows: list[list[float]] = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc}") from exc
    with handle:
        for i, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise UsageError(f"{path}: row {i} has a non-numeric entry") from exc
            if rows and len(values) != len(rows[0]):
                raise UsageError(
                    f"{path}: row {i} has {len(values)} columns, "
                    f"expected {len(rows[0])}"
                )
            rows.append(values)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def write_matrix_csv(path_or_handle, matrix: np.ndarray) -> None:
    close = False
    if isinstance(path_or_handle, (str, Path)):
        handle = open(path_or_handle, "w", newline="")
        close = True
    else:
        handle = path_or_handle
    try:
        writer = csv.writer(handle)
        for row in np.atleast_2d(matrix):
            writer.writerow([_fmt(v) for v in row])
    finally:
        if close:
            handle.close()


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _bench_inputs(geometry: str, manifold, rng):
    x = manifold.random_point(rng)
    u = manifold.random_tangent(x, rng, norm=0.5)
    y = manifold.exp(x, u)
    v = manifold.random_tangent(x, rng, norm=1.0)
    return x, u, y, v


def _bench_call(geometry: str, manifold, op: str, inputs):
    x, u, y, v = inputs
    if op == "exp":
        return manifold.exp(x, u)
    if op == "log":
        return manifold.log(x, y)
    if op == "dist":
        return manifold.dist(x, y)
    if op == "pt":
        if geometry == "grassmann":
            return manifold.transport_along(x, u, v)
        return manifold.transport(x, y, v)
    raise UsageError(f"unknown op {op!r}")


def cmd_bench(args) -> int:
    seed = resolve_seed(args.seed)
    geometry = args.geometry
    dims = args.dims.split(",") if args.dims else DEFAULT_DIMS[geometry]
    dims = [d.strip() for d in dims if d.strip()]
    ops = [o.strip() for o in args.ops.split(",")] if args.ops else list(BENCH_OPS)
    for op in ops:
        if op not in BENCH_OPS:
            raise UsageError(f"unknown op {op!r}, expected one of {BENCH_OPS}")
    if args.repeats < 3:
        raise UsageError(f"--repeats must be >= 3 for a stable median, "
                         f"got {args.repeats}")
    manifolds = [make_manifold(geometry, d) for d in dims]

    # warm up JIT kernels outside the timed region
    warm = np.random.default_rng(0)
    for m in manifolds[:1]:
        inputs = _bench_inputs(geometry, m, warm)
        for op in ops:
            _bench_call(geometry, m, op, inputs)

    times: dict[tuple[str, str], list[float]] = {
        (op, d): [] for op in ops for d in dims
    }
    # interleave repeats across dims so drift spreads evenly
    for rep in range(args.repeats):
        for j, (dim_spec, manifold) in enumerate(zip(dims, manifolds)):
            rng = np.random.default_rng((seed, j, rep))
            inputs = _bench_inputs(geometry, manifold, rng)
            for op in ops:
                t0 = time.perf_counter()
                _bench_call(geometry, manifold, op, inputs)
                t1 = time.perf_counter()
                times[(op, dim_spec)].append(t1 - t0)

    with open(args.output, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["geometry", "op", "dim_spec", "repeats",
                         "median_seconds", "mad_seconds"])
        for op in ops:
            for dim_spec in dims:
                samples = np.asarray(times[(op, dim_spec)])
                med = float(np.median(samples))
                mad = float(np.median(np.abs(samples - med)))
                writer.writerow([geometry, op, dim_spec, args.repeats,
                                 _fmt(med), _fmt(mad)])
    print(f"wrote {len(ops) * len(dims)} rows to {args.output}")
    return 0


# ---------------------------------------------------------------------------
# pca
# ---------------------------------------------------------------------------

def synthetic_data(n: int, d: int, decay: float, seed: int) -> np.ndarray:
    """Gaussian data with covariance spectrum SYNTH_SCALE * decay^j."""
    if n < 1 or d < 2:
        raise UsageError(f"synthetic data needs n >= 1 and d >= 2, "
                         f"got n = {n}, d = {d}")
    if not (0.0 < decay <= 1.0):
        raise UsageError(f"spectral decay must lie in (0, 1], got {decay}")
    rng = np.random.default_rng((seed, 0x5D))
    lam = SYNTH_SCALE * decay ** np.arange(d)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    g = rng.standard_normal((n, d))
    return (g * np.sqrt(lam)) @ q.T


def parse_synthetic(spec: str) -> tuple[int, int, float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--synthetic must look like n:d:decay, got {spec!r}")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise UsageError(f"invalid --synthetic value {spec!r}") from exc


def pca_cost() -> CostFn:
    def evaluate(w: ManifoldPoint, z) -> float:
        u = w.value
        resid = z - u @ (u.T @ z)
        return float(np.dot(resid, resid))

    def euclidean_grad(w: ManifoldPoint, z) -> np.ndarray:
        u = w.value
        resid = z - u @ (u.T @ z)
        return -2.0 * np.outer(resid, z @ u)

    return CostFn(evaluate=evaluate, euclidean_grad=euclidean_grad)


def cmd_pca(args) -> int:
    seed = resolve_seed(args.seed)
    if (args.input is None) == (args.synthetic is None):
        raise UsageError("pca needs exactly one of --input or --synthetic")
    if args.input is not None:
        data = read_matrix_csv(args.input)
    else:
        n, d, decay = parse_synthetic(args.synthetic)
        data = synthetic_data(n, d, decay, seed)
    n, d = data.shape
    r = args.rank
    if not (0 < r < d):
        raise UsageError(f"--rank must satisfy 0 < r < d = {d}, got {r}")
    epochs = args.epochs if args.epochs is not None else (200 if args.private else 400)
    if epochs < 1:
        raise UsageError(f"--epochs must be >= 1, got {epochs}")

    manifold = Grassmann(d, r)
    params0 = ManifoldPoint(manifold.random_point(np.random.default_rng(seed)),
                            manifold)
    cost = pca_cost()
    variant = "private" if args.private else "nonprivate"
    sigma_mult = None
    if args.private:
        budget = PrivacyBudget(args.eps, args.delta)
        sigma_mult = calibrate_dprgd(budget, args.clip, n, steps=epochs)
        # dp_rsgd takes noise std in units of clip on the gradient sum; the
        # replace-one sensitivity of the sum is 2 * clip
        optimizer = dp_rsgd(constant(args.lr), sigma=2.0 * sigma_mult,
                            clip=args.clip, seed=seed)
    else:
        optimizer = rsgd(constant(args.lr))

    rows = []
    start = time.perf_counter()

    def record(step: int, loss: float) -> None:
        rows.append((step, time.perf_counter() - start, loss))

    examples = list(data)
    params, _ = fit(cost, examples, params0, optimizer, epochs, callback=record)

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    with open(trace_path, "w", newline="") as handle:
        handle.write(f"# seed={seed}\n")
        writer = csv.writer(handle)
        writer.writerow(["step", "wall_seconds", "loss", "variant"])
        for step, wall, loss in rows:
            writer.writerow([step, f"{wall:.6f}", _fmt(loss), variant])
    write_matrix_csv(out_dir / "subspace.csv", params.value)

    print(f"final loss: {_fmt(rows[-1][2])}")
    if sigma_mult is not None:
        print(f"calibrated sigma_mult: {_fmt(sigma_mult)}")
    print(f"wrote {trace_path} and {out_dir / 'subspace.csv'}")
    return 0


# ---------------------------------------------------------------------------
# frechet
# ---------------------------------------------------------------------------

def _rows_to_points(geometry: str, data: np.ndarray, dims: str | None):
    width = data.shape[1]
    if geometry == "grassmann":
        if dims is None:
            raise UsageError("frechet on grassmann requires --dims m:r")
        manifold = make_manifold(geometry, dims)
        m, r = manifold.ambient_shape
        if width != m * r:
            raise UsageError(f"rows have {width} values, expected m*r = {m * r}")
        shape = (m, r)
    elif geometry in ("spd-ai", "spd-le"):
        m = int(round(width ** 0.5))
        if m * m != width:
            raise UsageError(f"rows have {width} values, not a square matrix")
        manifold = make_manifold(geometry, str(m))
        shape = (m, m)
    else:
        manifold = make_manifold(geometry, str(width))
        shape = (width,)
    return manifold, [ManifoldPoint(row.reshape(shape), manifold) for row in data]


def cmd_frechet(args) -> int:
    seed = resolve_seed(args.seed)
    data = read_matrix_csv(args.input)
    manifold, points = _rows_to_points(args.geometry, data, args.dims)
    mean, residual = frechet_mean(manifold, points, step=args.step,
                                  iters=args.iters)
    if args.private == "laplace":
        if args.sensitivity is None or args.eps is None:
            raise UsageError("--private laplace requires --sensitivity and --eps")
        mean = rie_laplace_mechanism(mean, args.sensitivity, args.eps, seed=seed)
    elif args.private == "log-euclidean":
        if args.geometry != "spd-le":
            raise UsageError("--private log-euclidean requires --geometry spd-le")
        if args.sensitivity is None or args.eps is None:
            raise UsageError("--private log-euclidean requires --sensitivity "
                             "and --eps")
        budget = PrivacyBudget(args.eps, args.delta)
        mean = log_euclidean_mechanism(mean, args.sensitivity, budget, seed=seed)
    print(f"gradient residual: {_fmt(residual)}", file=sys.stderr)
    flat = mean.value.reshape(1, -1)
    if args.output:
        write_matrix_csv(args.output, flat)
    else:
        write_matrix_csv(sys.stdout, flat)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rieopt",
        description="Riemannian geometry benchmarks, subspace PCA, and "
                    "Frechet means with optional differential privacy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="time geometry primitives over a dim grid")
    b.add_argument("--geometry", required=True, choices=GEOMETRIES)
    b.add_argument("--dims", help="comma-separated dims (grassmann uses m:r)")
    b.add_argument("--ops", help=f"comma-separated subset of {','.join(BENCH_OPS)}")
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--seed", type=int)
    b.add_argument("--output", default="bench.csv")
    b.set_defaults(func=cmd_bench)

    p = sub.add_parser("pca", help="subspace PCA on the Grassmann manifold")
    p.add_argument("--input", help="dense CSV matrix, one sample per row")
    p.add_argument("--synthetic", help="n:d:decay synthetic Gaussian data")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--epochs", type=int,
                   help="default 400, or 200 with --private")
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--private", action="store_true")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--clip", type=float, default=0.1)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_pca)

    f = sub.add_parser("frechet", help="iterative Frechet mean of CSV points")
    f.add_argument("--geometry", required=True, choices=GEOMETRIES)
    f.add_argument("--input", required=True)
    f.add_argument("--dims", help="m:r, required for grassmann input")
    f.add_argument("--private", choices=("none", "laplace", "log-euclidean"),
                   default="none")
    f.add_argument("--sensitivity", type=float)
    f.add_argument("--eps", type=float)
    f.add_argument("--delta", type=float, default=1e-6)
    f.add_argument("--seed", type=int)
    f.add_argument("--step", type=float, default=1.0)
    f.add_argument("--iters", type=int, default=100)
    f.add_argument("--output")
    f.set_defaults(func=cmd_frechet)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RieoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
