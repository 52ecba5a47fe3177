"""Stochastic optimizers on manifolds, composed as gradient transformations.

Every optimizer is a (init, update) pair: `init(params)` builds an
immutable state, `update(grads, state, params)` returns the tangent
update to apply with `apply_updates` together with the next state.  All
randomness (minibatch indices, probe directions, privacy noise) is
derived from a seed stored at construction plus the step counter, so a
trajectory is reproducible from (params0, seed) alone.

Variance-reduced optimizers (rsvrg, rsrg) and the zeroth-order method
evaluate gradients or costs themselves through oracles supplied at
construction; their `grad_mode` is "none" and the `grads` argument is
ignored.  dp_rsgd consumes a per-example gradient list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    CostFn,
    ManifoldPoint,
    TangentVector,
    apply_updates,
    clip_tangent,
    mean_riemannian_gradient,
    mean_cost,
    per_example_riemannian_gradients,
    sum_tangent_values,
)

Schedule = Callable[[int], float]


def constant(lr: float) -> Schedule:
    """Constant step size."""
    return lambda t: lr


def inv_sqrt(lr0: float) -> Schedule:
    """Step size lr0 / sqrt(t) for step t >= 1."""
    return lambda t: lr0 / math.sqrt(t)


def as_schedule(lr) -> Schedule:
    if callable(lr):
        return lr
    return constant(float(lr))


class GradientTransformation(NamedTuple):
    init: Callable[[ManifoldPoint], Any]
    update: Callable[[Any, Any, ManifoldPoint], tuple[TangentVector, Any]]
    grad_mode: str = "mean"  # "mean" | "per_example" | "none"


def _step_rng(seed: int, step: int) -> np.random.Generator:
    return np.random.default_rng((int(seed), int(step)))


def _require_base(g: TangentVector, params: ManifoldPoint) -> None:
    if g.base is not params and not np.array_equal(g.base.value, params.value):
        raise ValueError("optimizer update: gradient is not based at the "
                         "current parameters")


def _mean_value(grads, params: ManifoldPoint) -> np.ndarray:
    if isinstance(grads, TangentVector):
        _require_base(grads, params)
        return grads.value
    if len(grads) == 0:
        raise ValueError("optimizer update: empty gradient list")
    for g in grads:
        _require_base(g, params)
    return sum_tangent_values([g.value for g in grads]) / len(grads)


# ---------------------------------------------------------------------------
# plain Riemannian SGD
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SgdState:
    step: int


def rsgd(lr) -> GradientTransformation:
    """Riemannian gradient descent: update = -eta_t * grad."""
    sched = as_schedule(lr)

    def init(params: ManifoldPoint) -> SgdState:
        return SgdState(step=0)

    def update(grads, state: SgdState, params: ManifoldPoint):
        t = state.step + 1
        mean = _mean_value(grads, params)
        u = TangentVector((-sched(t)) * mean, params)
        return u, SgdState(step=t)

    return GradientTransformation(init, update, grad_mode="mean")


# ---------------------------------------------------------------------------
# stochastic variance reduction with a periodically refreshed anchor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SvrgState:
    step: int
    anchor: Optional[ManifoldPoint]
    anchor_grad: Optional[np.ndarray]  # full gradient at the anchor


def rsvrg(lr, epoch_length: int, grad_fn: Callable[[ManifoldPoint, Any], TangentVector],
          data: Sequence[Any], batch_size: int | None = None,
          seed: int = 0) -> GradientTransformation:
    """Variance-reduced RGD: v = g_i(w) - PT(g_i(anchor)) + PT(mu).

    The anchor point and its full gradient mu are refreshed every
    `epoch_length` steps.  `grad_fn(point, datum)` supplies per-example
    Riemannian gradients; with batch_size=None each step uses the full
    dataset, otherwise indices are sampled uniformly from the seed and
    step counter.
    """
    if epoch_length < 1:
        raise ValueError(f"rsvrg: epoch_length must be >= 1, got {epoch_length}")
    if len(data) == 0:
        raise ValueError("rsvrg: empty dataset")
    sched = as_schedule(lr)
    n = len(data)

    def full_grad(point: ManifoldPoint) -> np.ndarray:
        vals = [grad_fn(point, z).value for z in data]
        return sum_tangent_values(vals) / n

    def init(params: ManifoldPoint) -> SvrgState:
        return SvrgState(step=0, anchor=None, anchor_grad=None)

    def update(grads, state: SvrgState, params: ManifoldPoint):
        t0 = state.step
        if t0 % epoch_length == 0:
            anchor = params
            mu = full_grad(params)
        else:
            anchor = state.anchor
            mu = state.anchor_grad
        manifold = params.manifold
        if batch_size is None:
            idx = range(n)
        else:
            idx = _step_rng(seed, t0).integers(0, n, size=batch_size)
        g_cur = sum_tangent_values(
            [grad_fn(params, data[i]).value for i in idx]) / len(idx)
        g_anc = sum_tangent_values(
            [grad_fn(anchor, data[i]).value for i in idx]) / len(idx)
        if anchor is params or np.array_equal(anchor.value, params.value):
            corr = g_cur - g_anc
            mu_t = mu
        else:
            corr = g_cur - manifold.transport(anchor.value, params.value, g_anc)
            mu_t = manifold.transport(anchor.value, params.value, mu)
        v = corr + mu_t
        eta = sched(t0 + 1)
        u = TangentVector((-eta) * v, params)
        return u, SvrgState(step=t0 + 1, anchor=anchor, anchor_grad=mu)

    return GradientTransformation(init, update, grad_mode="none")


# ---------------------------------------------------------------------------
# recursive stochastic gradient estimator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SrgState:
    step: int
    prev: Optional[ManifoldPoint]
    prev_update: Optional[np.ndarray]
    v: Optional[np.ndarray]  # running estimator at prev


def rsrg(lr, epoch_length: int, grad_fn: Callable[[ManifoldPoint, Any], TangentVector],
         data: Sequence[Any], batch_size: int | None = None,
         seed: int = 0) -> GradientTransformation:
    """Recursive estimator: v_t = g_i(w_t) - PT(g_i(w_{t-1})) + PT(v_{t-1}).

    Transport uses the stored update direction from the previous step, so
    geometries whose transport is direction-parameterized (Grassmann) use
    the exact step geodesic.  The estimator restarts from the full
    gradient every `epoch_length` steps.
    """
    if epoch_length < 1:
        raise ValueError(f"rsrg: epoch_length must be >= 1, got {epoch_length}")
    if len(data) == 0:
        raise ValueError("rsrg: empty dataset")
    sched = as_schedule(lr)
    n = len(data)

    def init(params: ManifoldPoint) -> SrgState:
        return SrgState(step=0, prev=None, prev_update=None, v=None)

    def update(grads, state: SrgState, params: ManifoldPoint):
        t0 = state.step
        manifold = params.manifold
        if t0 % epoch_length == 0:
            vals = [grad_fn(params, z).value for z in data]
            v = sum_tangent_values(vals) / n
        else:
            if batch_size is None:
                idx = range(n)
            else:
                idx = _step_rng(seed, t0).integers(0, n, size=batch_size)
            g_cur = sum_tangent_values(
                [grad_fn(params, data[i]).value for i in idx]) / len(idx)
            g_prv = sum_tangent_values(
                [grad_fn(state.prev, data[i]).value for i in idx]) / len(idx)
            if not np.any(state.prev_update):
                v = (g_cur - g_prv) + state.v
            else:
                pt = lambda w: manifold.transport_along(
                    state.prev.value, state.prev_update, w)
                v = (g_cur - pt(g_prv)) + pt(state.v)
        eta = sched(t0 + 1)
        u = TangentVector((-eta) * v, params)
        return u, SrgState(step=t0 + 1, prev=params, prev_update=u.value, v=v)

    return GradientTransformation(init, update, grad_mode="none")


# ---------------------------------------------------------------------------
# row/column adaptive scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RasaState:
    step: int
    row_sum: np.ndarray
    col_sum: Optional[np.ndarray]
    row_max: np.ndarray
    col_max: Optional[np.ndarray]


def rasa(lr, eps_adapt: float = 1e-8, adapt: str = "full") -> GradientTransformation:
    """Adaptive scaling from running maxima of averaged row/column energies.

    For matrix parameters the update is

        u = -eta_t * g / (a_row^{1/4} a_col^{1/4} + eps_adapt)

    with a_row / a_col the elementwise running maxima of the averaged
    squared row and column norms of the Riemannian gradient.  Vector
    parameters (and adapt="row") use the row accumulator alone;
    adapt="none" disables scaling, reducing to rsgd.
    """
    if adapt not in ("full", "row", "none"):
        raise ValueError(f"rasa: adapt must be 'full', 'row' or 'none', got {adapt!r}")
    if eps_adapt < 0.0:
        raise ValueError(f"rasa: eps_adapt must be >= 0, got {eps_adapt}")
    sched = as_schedule(lr)

    def init(params: ManifoldPoint) -> RasaState:
        shape = params.value.shape
        rows = shape[0]
        cols = shape[1] if len(shape) == 2 else None
        return RasaState(
            step=0,
            row_sum=np.zeros(rows),
            col_sum=None if cols is None else np.zeros(cols),
            row_max=np.zeros(rows),
            col_max=None if cols is None else np.zeros(cols),
        )

    def update(grads, state: RasaState, params: ManifoldPoint):
        t = state.step + 1
        g = _mean_value(grads, params)
        if adapt == "none":
            u = TangentVector((-sched(t)) * g, params)
            return u, RasaState(t, state.row_sum, state.col_sum,
                                state.row_max, state.col_max)
        g2 = g * g
        if g.ndim == 1:
            row_sum = state.row_sum + g2
            row_max = np.maximum(state.row_max, row_sum / t)
            denom = row_max ** 0.25 + eps_adapt
            scaled = g / denom
            col_sum, col_max = state.col_sum, state.col_max
        else:
            row_sum = state.row_sum + g2.sum(axis=1)
            row_max = np.maximum(state.row_max, row_sum / t)
            if adapt == "row":
                denom = row_max ** 0.25 + eps_adapt
                scaled = g / denom[:, None]
                col_sum, col_max = state.col_sum, state.col_max
            else:
                col_sum = state.col_sum + g2.sum(axis=0)
                col_max = np.maximum(state.col_max, col_sum / t)
                denom = np.outer(row_max ** 0.25, col_max ** 0.25) + eps_adapt
                scaled = g / denom
        # elementwise scaling leaves the tangent space; project back
        scaled = params.manifold.to_tangent(params.value, scaled)
        u = TangentVector((-sched(t)) * scaled, params)
        return u, RasaState(t, row_sum, col_sum, row_max, col_max)

    return GradientTransformation(init, update, grad_mode="mean")


# ---------------------------------------------------------------------------
# zeroth-order gradient estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZoState:
    step: int


def zo_rgd(lr, mu: float, num_dirs: int,
           objective: Callable[[ManifoldPoint], float],
           seed: int = 0) -> GradientTransformation:
    """Two-point zeroth-order estimator over random unit tangent directions:

        g = (intrinsic_dim / num_dirs) *
            sum_j ((f(exp_w(mu u_j)) - f(w)) / mu) u_j
    """
    if not mu > 0.0:
        raise ValueError(f"zo_rgd: mu must be positive, got {mu}")
    if num_dirs < 1:
        raise ValueError(f"zo_rgd: num_dirs must be >= 1, got {num_dirs}")
    sched = as_schedule(lr)

    def init(params: ManifoldPoint) -> ZoState:
        return ZoState(step=0)

    def update(grads, state: ZoState, params: ManifoldPoint):
        t0 = state.step
        manifold = params.manifold
        rng = _step_rng(seed, t0)
        x = params.value
        f0 = float(objective(params))
        acc = np.zeros_like(x)
        for _ in range(num_dirs):
            raw = rng.standard_normal(x.shape)
            u = manifold.tangent_from_raw(x, raw)
            un = manifold.norm(x, u)
            # a raw draw numerically inside the normal space projects to
            # rounding noise; normalizing that would leave the tangent space
            if not un > 1e-12 * float(np.linalg.norm(raw)):
                continue
            u = u / un
            probe = ManifoldPoint(manifold.exp(x, mu * u), manifold)
            fp = float(objective(probe))
            acc = acc + ((fp - f0) / mu) * u
        g = (manifold.intrinsic_dim / num_dirs) * acc
        eta = sched(t0 + 1)
        return TangentVector((-eta) * g, params), ZoState(step=t0 + 1)

    return GradientTransformation(init, update, grad_mode="none")


# ---------------------------------------------------------------------------
# differentially private SGD
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DpState:
    step: int


def dp_rsgd(lr, sigma: float, clip: float, seed: int = 0) -> GradientTransformation:
    """Per-example clip, aggregate, then add tangent Gaussian noise:

        u = -eta_t * (sum_i clip_tangent(g_i, clip) + xi) / b

    where xi has per-coordinate standard deviation sigma * clip in a
    metric-orthonormal tangent basis.  sigma = 0 disables the noise and
    recovers clipped averaging exactly.
    """
    if sigma < 0.0:
        raise ValueError(f"dp_rsgd: sigma must be >= 0, got {sigma}")
    if not clip > 0.0:
        raise ValueError(f"dp_rsgd: clip must be positive, got {clip}")
    sched = as_schedule(lr)

    def init(params: ManifoldPoint) -> DpState:
        return DpState(step=0)

    def update(grads, state: DpState, params: ManifoldPoint):
        if isinstance(grads, TangentVector):
            grads = [grads]
        if grads is None or len(grads) == 0:
            raise ValueError("dp_rsgd: update requires a non-empty per-example "
                             "gradient list")
        for g in grads:
            _require_base(g, params)
        b = len(grads)
        clipped = [clip_tangent(g, clip).value for g in grads]
        total = sum_tangent_values(clipped)
        t = state.step + 1
        if sigma > 0.0:
            manifold = params.manifold
            raw = _step_rng(seed, state.step).standard_normal(params.value.shape)
            xi = (sigma * clip) * manifold.tangent_from_raw(params.value, raw)
            total = total + xi
        mean = total / b
        u = TangentVector((-sched(t)) * mean, params)
        return u, DpState(step=t)

    return GradientTransformation(init, update, grad_mode="per_example")


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def fit(cost: CostFn, data: Sequence[Any], params0: ManifoldPoint,
        optimizer: GradientTransformation, epochs: int,
        per_example: bool = False,
        callback: Callable[[int, float], None] | None = None
        ) -> tuple[ManifoldPoint, list[tuple[int, float]]]:
    """Run `epochs` update/apply cycles and record the loss after each step.

    Gradients are computed from `cost` according to the optimizer's
    `grad_mode` (or per example when `per_example` is set); optimizers
    with grad_mode="none" evaluate their own oracles.
    """
    if epochs < 0:
        raise ValueError(f"fit: epochs must be >= 0, got {epochs}")
    state = optimizer.init(params0)
    params = params0
    trace: list[tuple[int, float]] = []
    mode = optimizer.grad_mode
    for step in range(1, epochs + 1):
        if mode == "none":
            grads = None
        elif per_example or mode == "per_example":
            grads = per_example_riemannian_gradients(cost, params, data)
        else:
            grads = mean_riemannian_gradient(cost, params, data)
        u, state = optimizer.update(grads, state, params)
        params = apply_updates(params, u)
        loss = mean_cost(cost, params, data)
        trace.append((step, loss))
        if callback is not None:
            callback(step, loss)
    return params, trace
