"""End-to-end acceptance gate.

Each test covers one numbered contract item and prints a single
``ACCEPTANCE n: PASS/FAIL`` line with the measured quantity, so a plain
pytest run doubles as a checklist.
"""

import csv
import math
import subprocess
import sys
import time

import numpy as np

from rieopt import (
    AccountantState,
    CostFn,
    Grassmann,
    Hypersphere,
    LorentzHyperboloid,
    ManifoldPoint,
    PoincareBall,
    PrivacyBudget,
    SPDAffineInvariant,
    SPDLogEuclidean,
    calibrate_dprgd,
    compose,
    constant,
    dp_rsgd,
    fit,
    gaussian_profile,
    gaussian_sigma_classical,
    log_euclidean_mechanism,
    mean_riemannian_gradient,
    per_example_riemannian_gradients,
    rasa,
    rdp_gaussian,
    rdp_subsampled_gaussian,
    riemannian_gradient,
    rie_laplace_mechanism,
    rsgd,
    rsrg,
    rsvrg,
    apply_updates,
)
from rieopt import principal_angles
from rieopt.cli import pca_cost, synthetic_data
from rieopt.geometry.hyperbolic import ball_to_hyperboloid, hyperboloid_to_ball
from rieopt.linalg import dfun_sym, expm, logm, sym


def all_geometries():
    return [
        Hypersphere(20),
        PoincareBall(10),
        LorentzHyperboloid(10),
        Grassmann(12, 3),
        SPDAffineInvariant(5),
        SPDLogEuclidean(5),
    ]


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n:2d}: {'PASS' if ok else 'FAIL'}  ({detail})")
    assert ok, f"criterion {n} failed: {detail}"


# 1. exp/log roundtrips ------------------------------------------------------------

def test_acceptance_01_roundtrips(capsys):
    start = time.perf_counter()
    worst = 0.0
    for M in all_geometries():
        rng = np.random.default_rng(101)
        for _ in range(100):
            x = M.random_point(rng)
            v = M.random_tangent(x, rng, norm=rng.uniform(0.05, 0.5))
            back = M.log(x, M.exp(x, v))
            defect = np.linalg.norm(back - v) / (1.0 + np.linalg.norm(v))
            worst = max(worst, defect)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    report(capsys, 1, ok, f"max defect {worst:.2e}, {elapsed:.1f} s")


# 2. geodesics have constant speed ----------------------------------------------------

def test_acceptance_02_geodesic_speed(capsys):
    worst = 0.0
    for M in all_geometries():
        rng = np.random.default_rng(202)
        for _ in range(20):
            x = M.random_point(rng)
            v = M.random_tangent(x, rng, norm=rng.uniform(0.1, 0.4))
            speed = M.norm(x, v)
            for t in (0.1, 0.5, 1.0):
                gap = abs(M.dist(x, M.exp(x, t * v)) - t * speed)
                worst = max(worst, gap)
    ok = worst <= 1e-8
    report(capsys, 2, ok, f"max speed defect {worst:.2e}")


# 3. transport preserves the metric ----------------------------------------------------

def test_acceptance_03_transport_isometry(capsys):
    worst = 0.0
    for M in all_geometries():
        rng = np.random.default_rng(303)
        for _ in range(100):
            x = M.random_point(rng)
            y = M.exp(x, M.random_tangent(x, rng, norm=rng.uniform(0.1, 0.5)))
            u = M.random_tangent(x, rng, norm=rng.uniform(0.2, 1.0))
            v = M.random_tangent(x, rng, norm=rng.uniform(0.2, 1.0))
            before = M.metric(x, u, v)
            after = M.metric(y, M.transport(x, y, u), M.transport(x, y, v))
            worst = max(worst, abs(after - before))
    ok = worst <= 1e-9
    report(capsys, 3, ok, f"max inner-product drift {worst:.2e}")


# 4. euclidean-to-riemannian gradient conversion ------------------------------------------

def _cost_suite(M, rng):
    """Linear, quadratic, and objective-shaped costs with ambient gradients.

    Grassmann costs are written in the projector XX^T so they are
    well-defined on the quotient (invariant under rotating the
    representative)."""
    shape = M.ambient_shape
    a = rng.standard_normal(shape)
    b = rng.standard_normal(shape)
    if len(shape) == 2 and shape[0] == shape[1]:
        a = sym(a)
        b = sym(b)
    if isinstance(M, Grassmann):
        m = shape[0]
        amat = sym(rng.standard_normal((m, m)))
        bmat = sym(rng.standard_normal((m, m)))
        zs = [rng.standard_normal(m) for _ in range(4)]
        return [
            (lambda x: float(np.sum(amat * (x @ x.T))),
             lambda x: 2.0 * amat @ x),
            (lambda x: 0.5 * float(np.sum((x @ x.T - bmat) ** 2)),
             lambda x: 2.0 * (x @ x.T - bmat) @ x),
            (lambda x: sum(float(np.sum((z - x @ (x.T @ z)) ** 2)) for z in zs),
             lambda x: sum(-2.0 * np.outer(z - x @ (x.T @ z), z @ x)
                           for z in zs)),
        ]
    suite = [
        (lambda x: float(np.sum(a * x)), lambda x: a),
        (lambda x: 0.5 * float(np.sum((x - b) ** 2)), lambda x: x - b),
    ]
    if isinstance(M, (SPDAffineInvariant, SPDLogEuclidean)):
        spd_a = expm(0.3 * a)
        suite.append((
            lambda x: float(np.sum(spd_a * x)) - float(np.linalg.slogdet(x)[1]),
            lambda x: spd_a - np.linalg.inv(x),
        ))
    else:
        q = sym(rng.standard_normal((shape[0], shape[0])))
        suite.append((
            lambda x: 0.5 * float(x @ (q @ x)),
            lambda x: q @ x,
        ))
    return suite


def test_acceptance_04_gradient_conversion(capsys):
    worst = 0.0
    # large enough that eigendecomposition roundoff inside the SPD and
    # Grassmann maps stays well below the truncation error
    h = 1e-5
    for M in all_geometries():
        rng = np.random.default_rng(404)
        for evaluate, grad in _cost_suite(M, rng):
            for _ in range(20):
                x = M.random_point(rng)
                u = M.random_tangent(x, rng, norm=1.0)
                g = M.egrad_to_rgrad(x, grad(x))
                analytic = M.metric(x, g, u)
                fd = (evaluate(M.exp(x, h * u))
                      - evaluate(M.exp(x, -h * u))) / (2.0 * h)
                rel = abs(analytic - fd) / max(abs(fd), 1e-6)
                worst = max(worst, rel)
    ok = worst <= 1e-4
    report(capsys, 4, ok, f"max relative gradient defect {worst:.2e}")


# 5. the two hyperbolic models agree -------------------------------------------------------

def test_acceptance_05_hyperbolic_models(capsys):
    ball = PoincareBall(7)
    hyp = LorentzHyperboloid(7)
    rng = np.random.default_rng(505)
    worst_dist, worst_inv = 0.0, 0.0
    for _ in range(100):
        x = ball.random_point(rng)
        y = ball.random_point(rng)
        d_ball = ball.dist(x, y)
        d_hyp = hyp.dist(ball_to_hyperboloid(x), ball_to_hyperboloid(y))
        worst_dist = max(worst_dist, abs(d_ball - d_hyp))
        worst_inv = max(worst_inv,
                        float(np.max(np.abs(hyperboloid_to_ball(
                            ball_to_hyperboloid(x)) - x))))
    ok = worst_dist <= 1e-8 and worst_inv <= 1e-8
    report(capsys, 5, ok,
           f"distance gap {worst_dist:.2e}, inversion gap {worst_inv:.2e}")


# 6. SPD derivative and distance oracles ------------------------------------------------------

def test_acceptance_06_spd_oracles(capsys):
    rng = np.random.default_rng(606)
    h = 1e-5
    worst_dfun = 0.0
    for _ in range(10):
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        a = q @ np.diag(rng.uniform(0.5, 3.0, 5)) @ q.T
        a = sym(a)
        u = sym(rng.standard_normal((5, 5)))
        for fun, apply in (("log", logm), ("exp", expm)):
            fd = (apply(a + h * u) - apply(a - h * u)) / (2.0 * h)
            gap = np.max(np.abs(dfun_sym(a, u, fun) - fd))
            worst_dfun = max(worst_dfun, gap / (1.0 + np.max(np.abs(fd))))
    le = SPDLogEuclidean(5)
    worst_le = 0.0
    for _ in range(20):
        s1 = 0.5 * sym(rng.standard_normal((5, 5)))
        s2 = 0.5 * sym(rng.standard_normal((5, 5)))
        d = le.dist(expm(s1), expm(s2))
        worst_le = max(worst_le, abs(d - np.linalg.norm(s1 - s2)))
    ai = SPDAffineInvariant(5)
    worst_ai = 0.0
    for _ in range(20):
        x = ai.random_point(rng)
        y = ai.random_point(rng)
        g = rng.standard_normal((5, 5)) + 4.0 * np.eye(5)
        worst_ai = max(worst_ai,
                       abs(ai.dist(g @ x @ g.T, g @ y @ g.T) - ai.dist(x, y)))
    ok = worst_dfun <= 1e-5 and worst_le <= 1e-9 and worst_ai <= 1e-8
    report(capsys, 6, ok, f"dfun {worst_dfun:.2e}, le_dist {worst_le:.2e}, "
                          f"ai invariance {worst_ai:.2e}")


# 7. optimizer reductions ------------------------------------------------------------------------

def test_acceptance_07_optimizer_reductions(capsys):
    M = Hypersphere(6)
    rng = np.random.default_rng(707)
    base = M.random_point(rng)
    data = [M.exp(base, M.random_tangent(base, rng, norm=0.4))
            for _ in range(12)]
    cost = CostFn(evaluate=lambda w, z: 0.5 * M.dist(w.value, z) ** 2,
                  euclidean_grad=lambda w, z: -M.log(w.value, z))
    p0 = ManifoldPoint(M.random_point(rng), M)
    grad_fn = lambda w, z: riemannian_gradient(cost, w, z)

    def run(opt, per_example=False, steps=10):
        params = p0
        state = opt.init(p0)
        out = []
        for _ in range(steps):
            if opt.grad_mode == "per_example" or per_example:
                grads = per_example_riemannian_gradients(cost, params, data)
            else:
                grads = mean_riemannian_gradient(cost, params, data)
            u, state = opt.update(grads, state, params)
            params = apply_updates(params, u)
            out.append(params.value)
        return out

    ref = run(rsgd(constant(0.2)))
    gaps = {
        "rsvrg": max(np.max(np.abs(a - b)) for a, b in zip(
            ref, run(rsvrg(constant(0.2), epoch_length=1, grad_fn=grad_fn,
                           data=data)))),
        "rsrg": max(np.max(np.abs(a - b)) for a, b in zip(
            ref, run(rsrg(constant(0.2), epoch_length=1, grad_fn=grad_fn,
                          data=data)))),
        "dp": max(np.max(np.abs(a - b)) for a, b in zip(
            ref, run(dp_rsgd(constant(0.2), sigma=0.0, clip=np.inf)))),
        "rasa": max(np.max(np.abs(a - b)) for a, b in zip(
            ref, run(rasa(constant(0.2), adapt="none")))),
    }
    ok = (gaps["rsvrg"] <= 1e-12 and gaps["rsrg"] <= 1e-12
          and gaps["dp"] == 0.0 and gaps["rasa"] == 0.0)
    report(capsys, 7, ok, ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))


# 8. subspace recovery at desk scale ------------------------------------------------------------

def _pca_setup(seed=0):
    data = synthetic_data(200, 50, 0.8, seed)
    M = Grassmann(50, 5)
    cov = (data.T @ data) / data.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    optimum = float(np.sum(vals[:-5]))
    top = vecs[:, -5:]
    p0 = ManifoldPoint(M.random_point(np.random.default_rng(seed)), M)
    return M, data, optimum, top, p0


def test_acceptance_08_pca_recovery(capsys):
    start = time.perf_counter()
    M, data, optimum, top, p0 = _pca_setup()
    params, trace = fit(pca_cost(), list(data), p0, rsgd(constant(3e-3)), 400)
    elapsed = time.perf_counter() - start
    initial, final = trace[0][1], trace[-1][1]
    excess = final - optimum
    angle = float(np.max(principal_angles(params.value, top)))
    ok = (excess <= 1e-6 * initial) and angle < 1e-3 and elapsed < 60.0
    report(capsys, 8, ok, f"excess {excess:.2e} vs {1e-6 * initial:.2e}, "
                          f"angle {angle:.2e}, {elapsed:.1f} s")


# 9. private subspace recovery stays sane ----------------------------------------------------------

def test_acceptance_09_private_pca(capsys):
    M, data, optimum, top, p0 = _pca_setup()
    n = data.shape[0]
    clip, delta, epochs = 0.1, 1e-6, 200

    def private_run(eps):
        mult = calibrate_dprgd(PrivacyBudget(eps, delta), clip, n, epochs)
        opt = dp_rsgd(constant(3e-3), sigma=2.0 * mult, clip=clip, seed=0)
        return fit(pca_cost(), list(data), p0, opt, epochs)

    tight, tight_trace = private_run(0.1)
    finite = np.isfinite(tight_trace[-1][1])
    loose, _ = private_run(1e6)
    baseline, _ = fit(pca_cost(), list(data), p0,
                      dp_rsgd(constant(3e-3), sigma=0.0, clip=clip, seed=0),
                      epochs)
    angle = float(np.max(principal_angles(loose.value, baseline.value)))
    ok = finite and angle < 0.05
    report(capsys, 9, ok,
           f"eps 0.1 loss {tight_trace[-1][1]:.3f}, eps 1e6 angle {angle:.2e}")


# 10. accounting matches the analytic mechanism ------------------------------------------------------

def test_acceptance_10_accountant(capsys):
    budget = PrivacyBudget(1.0, 1e-6)
    mult = calibrate_dprgd(budget, clip=1.0, n=100, steps=1)
    classical = gaussian_sigma_classical(1.0, budget.epsilon, budget.delta)
    calib_gap = abs(mult - classical) / classical

    p = gaussian_profile(2.5)
    s1 = compose(compose(AccountantState.fresh(), p), p)
    s2 = compose(AccountantState.fresh(), p, count=2)
    additivity = float(np.max(np.abs(s1.values - s2.values)))

    reduction = max(abs(rdp_subsampled_gaussian(s, 1.0, a) - rdp_gaussian(s, a))
                    for s in (0.8, 2.0, 5.0) for a in (2, 8, 64))
    ok = calib_gap <= 0.1 and additivity <= 1e-12 and reduction <= 1e-12
    report(capsys, 10, ok, f"calibration gap {calib_gap:.3f}, additivity "
                           f"{additivity:.1e}, q=1 gap {reduction:.1e}")


# 11. mechanism output statistics -----------------------------------------------------------------------

def test_acceptance_11_mechanism_statistics(capsys):
    # log-Euclidean noise scale and positive-definiteness
    M = SPDLogEuclidean(3)
    x = ManifoldPoint(M.random_point(np.random.default_rng(11)), M)
    budget = PrivacyBudget(1.0, 1e-5)
    sensitivity = 0.2
    sigma = gaussian_sigma_classical(sensitivity, budget.epsilon, budget.delta)
    base_log = logm(x.value)
    diag, off, spd_count = [], [], 0
    for seed in range(1000):
        y = log_euclidean_mechanism(x, sensitivity, budget, seed=seed)
        d = logm(y.value) - base_log
        diag.extend(np.diag(d))
        off.extend(d[np.triu_indices(3, k=1)])
        spd_count += np.min(np.linalg.eigvalsh(y.value)) > 0.0
    std_gap = max(abs(np.std(diag) - sigma) / sigma,
                  abs(np.std(off) - sigma / math.sqrt(2)) / (sigma / math.sqrt(2)))

    # radial goodness of fit for the Laplace sampler on the 2-sphere
    S = Hypersphere(3)
    center = ManifoldPoint(S.random_point(np.random.default_rng(12)), S)
    scale = 0.5                           # sensitivity 1, epsilon 2
    dists = np.array([
        S.dist(center.value,
               rie_laplace_mechanism(center, 1.0, 2.0, seed=s).value)
        for s in range(5000)
    ])
    grid = np.linspace(0.0, np.pi, 4001)
    dens = np.exp(-grid / scale) * np.sin(grid)
    cdf = np.concatenate([[0.0], np.cumsum(
        0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    emp = np.searchsorted(np.sort(dists), grid, side="right") / len(dists)
    ks = float(np.max(np.abs(emp - cdf)))
    critical = 1.6276 / math.sqrt(len(dists))   # 1% level

    ok = std_gap <= 0.05 and spd_count == 1000 and ks < critical
    report(capsys, 11, ok, f"noise std gap {std_gap:.3f}, spd {spd_count}/1000, "
                           f"KS {ks:.4f} vs {critical:.4f}")


# 12. command line contract -------------------------------------------------------------------------------

def run_cli(args, cwd, env_extra=None):
    import os
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "rieopt", *args],
                          cwd=cwd, env=env, capture_output=True, text=True)


def test_acceptance_12_cli_contract(capsys, tmp_path):
    start = time.perf_counter()
    geometries = ("hypersphere", "poincare", "lorentz", "grassmann",
                  "spd-ai", "spd-le")
    schema_ok = True
    for geom in geometries:
        res = run_cli(["bench", "--geometry", geom, "--seed", "0",
                       "--output", f"{geom}.csv"], tmp_path)
        schema_ok &= res.returncode == 0
        with open(tmp_path / f"{geom}.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        schema_ok &= rows[0] == ["geometry", "op", "dim_spec", "repeats",
                                 "median_seconds", "mad_seconds"]
        schema_ok &= all(len(r) == 6 and r[0] == geom for r in rows[1:])
        schema_ok &= len(rows) > 1

    # determinism of everything except wall-clock columns
    args = ["pca", "--synthetic", "120:16:0.8", "--rank", "4",
            "--epochs", "40", "--seed", "1"]
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    ra = run_cli(args + ["--output-dir", "a"], tmp_path)
    rb = run_cli(args + ["--output-dir", "b"], tmp_path)
    det_ok = ra.returncode == 0 and rb.returncode == 0

    def strip_wall(path):
        with open(path, newline="") as handle:
            return [[c for i, c in enumerate(row) if i != 1]
                    for row in csv.reader(handle)]

    det_ok &= strip_wall(tmp_path / "a/trace.csv") == strip_wall(
        tmp_path / "b/trace.csv")
    det_ok &= ((tmp_path / "a/subspace.csv").read_text()
               == (tmp_path / "b/subspace.csv").read_text())

    M = Hypersphere(4)
    rng = np.random.default_rng(3)
    pts = [M.random_point(rng).tolist() for _ in range(5)]
    with open(tmp_path / "pts.csv", "w", newline="") as handle:
        csv.writer(handle).writerows(pts)
    f1 = run_cli(["frechet", "--geometry", "hypersphere", "--input",
                  "pts.csv", "--private", "laplace", "--sensitivity", "0.5",
                  "--eps", "2.0", "--seed", "4"], tmp_path)
    f2 = run_cli(["frechet", "--geometry", "hypersphere", "--input",
                  "pts.csv", "--private", "laplace", "--sensitivity", "0.5",
                  "--eps", "2.0", "--seed", "4"], tmp_path)
    det_ok &= f1.returncode == 0 and f1.stdout == f2.stdout

    elapsed = time.perf_counter() - start
    ok = schema_ok and det_ok and elapsed < 300.0
    report(capsys, 12, ok, f"schema {'ok' if schema_ok else 'BAD'}, "
                           f"determinism {'ok' if det_ok else 'BAD'}, "
                           f"{elapsed:.0f} s")
