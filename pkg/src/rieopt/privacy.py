"""Differential privacy: output mechanisms and an RDP accountant.

The accountant tracks Renyi divergence bounds on a fixed grid of orders
(integers 2..64 plus 128 and 256), composes additively, and converts to
(epsilon, delta) with

    epsilon = min_alpha [ rdp(alpha) + log(1/delta) / (alpha - 1) ].

Per-step Gaussian steps use rdp = alpha / (2 sigma^2); subsampled steps
use the standard binomial-expansion bound for the sampled Gaussian
mechanism at integer orders, which reduces exactly to the Gaussian value
at sampling rate q = 1.  Calibration searches the smallest noise
multiplier meeting a budget by log-spaced bisection.

Sampling note: the subsampled bound models Poisson-style uniform
subsampling; minibatches drawn by the optimizers approximate this and
the accountant treats the sampling rate as batch/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels
from .core import Manifold, ManifoldPoint
from .errors import CalibrationError, DomainError, NumericError
from .geometry.hypersphere import Hypersphere
from .geometry.spd import SPDLogEuclidean, _sym_gaussian
from .linalg import expm, logm

DEFAULT_ORDERS = tuple(range(2, 65)) + (128, 256)


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) differential privacy budget."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"PrivacyBudget: epsilon must be positive, "
                             f"got {self.epsilon}")
        # delta = 0 is a valid budget for the pure-DP Laplace mechanism;
        # Gaussian-based consumers reject it themselves
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"PrivacyBudget: delta must lie in [0, 1), "
                             f"got {self.delta}")


# ---------------------------------------------------------------------------
# RDP accounting
# ---------------------------------------------------------------------------

def rdp_gaussian(sigma: float, order: float) -> float:
    """RDP of the Gaussian mechanism at noise multiplier sigma."""
    if not sigma > 0.0:
        raise ValueError(f"rdp_gaussian: sigma must be positive, got {sigma}")
    if not order > 1.0:
        raise ValueError(f"rdp_gaussian: order must exceed 1, got {order}")
    return order / (2.0 * sigma * sigma)


def rdp_subsampled_gaussian(sigma: float, q: float, order: int) -> float:
    """RDP of the subsampled Gaussian mechanism at an integer order.

    Binomial-expansion bound:
        (1/(a-1)) log sum_{k=0}^{a} C(a,k) (1-q)^{a-k} q^k e^{k(k-1)/(2 s^2)}
    """
    if not sigma > 0.0:
        raise ValueError(f"rdp_subsampled_gaussian: sigma must be positive, "
                         f"got {sigma}")
    if not (0.0 < q <= 1.0):
        raise ValueError(f"rdp_subsampled_gaussian: q must lie in (0, 1], got {q}")
    if order != int(order) or order < 2:
        raise ValueError(f"rdp_subsampled_gaussian: order must be an integer "
                         f">= 2, got {order}")
    order = int(order)
    if q == 1.0:
        return rdp_gaussian(sigma, order)
    k = np.arange(order + 1)
    log_binom = gammaln(order + 1) - gammaln(k + 1) - gammaln(order - k + 1)
    log_terms = (log_binom
                 + (order - k) * math.log1p(-q)
                 + k * math.log(q)
                 + k * (k - 1) / (2.0 * sigma * sigma))
    total = logsumexp(log_terms)
    return max(0.0, float(total) / (order - 1))


@dataclass(frozen=True)
class AccountantState:
    """Accumulated RDP values on a fixed order grid."""

    orders: np.ndarray
    values: np.ndarray
    steps: int = 0

    @classmethod
    def fresh(cls, orders=DEFAULT_ORDERS) -> "AccountantState":
        orders = np.asarray(orders, dtype=float)
        return cls(orders=orders, values=np.zeros_like(orders), steps=0)


def compose(state: AccountantState, per_step: np.ndarray,
            count: int = 1) -> AccountantState:
    """Add `count` repetitions of a per-step RDP profile."""
    per_step = np.asarray(per_step, dtype=float)
    if per_step.shape != state.orders.shape:
        raise ValueError("compose: profile shape does not match the order grid")
    if count < 1:
        raise ValueError(f"compose: count must be >= 1, got {count}")
    return AccountantState(orders=state.orders,
                           values=state.values + count * per_step,
                           steps=state.steps + count)


def gaussian_profile(sigma: float, orders=DEFAULT_ORDERS) -> np.ndarray:
    return np.array([rdp_gaussian(sigma, a) for a in orders])


def subsampled_gaussian_profile(sigma: float, q: float,
                                orders=DEFAULT_ORDERS) -> np.ndarray:
    return np.array([rdp_subsampled_gaussian(sigma, q, int(a)) for a in orders])


def rdp_to_dp(state: AccountantState, delta: float) -> float:
    """Best (epsilon, delta) conversion over the order grid."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"rdp_to_dp: delta must lie in (0, 1), got {delta}")
    eps = state.values + math.log(1.0 / delta) / (state.orders - 1.0)
    return float(np.min(eps))


# ---------------------------------------------------------------------------
# noise calibration
# ---------------------------------------------------------------------------

_SIGMA_LO = 1e-6
_SIGMA_HI = 1e8
_REL_TOL = 1e-4


def _composed_epsilon(sigma: float, q: float, steps: int, delta: float) -> float:
    if q == 1.0:
        profile = gaussian_profile(sigma)
    else:
        profile = subsampled_gaussian_profile(sigma, q)
    state = compose(AccountantState.fresh(), profile, count=steps)
    return rdp_to_dp(state, delta)


def _calibrate_sigma(budget: PrivacyBudget, q: float, steps: int) -> float:
    """Smallest noise multiplier whose composed epsilon meets the budget."""
    target = budget.epsilon
    hi = 1.0
    while _composed_epsilon(hi, q, steps, budget.delta) > target:
        hi *= 2.0
        if hi > _SIGMA_HI:
            raise CalibrationError(
                f"noise calibration failed: epsilon {target} unreachable with "
                f"sigma_mult <= {_SIGMA_HI:.0e} ({steps} steps, q = {q})"
            )
    lo = hi / 2.0
    while _composed_epsilon(lo, q, steps, budget.delta) <= target:
        lo /= 2.0
        if lo < _SIGMA_LO:
            return lo
    while hi / lo > 1.0 + _REL_TOL:
        mid = math.sqrt(lo * hi)
        if _composed_epsilon(mid, q, steps, budget.delta) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_dprgd(budget: PrivacyBudget, clip: float, n: int,
                    steps: int) -> float:
    """Noise multiplier for full-batch private gradient descent.

    The per-step mechanism adds tangent noise of standard deviation
    sigma_mult * (2 clip / n) to the clipped mean gradient, matching the
    replace-one sensitivity 2 clip / n.
    """
    if not clip > 0.0:
        raise ValueError(f"calibrate_dprgd: clip must be positive, got {clip}")
    if n < 1:
        raise ValueError(f"calibrate_dprgd: n must be >= 1, got {n}")
    if steps < 1:
        raise ValueError(f"calibrate_dprgd: steps must be >= 1, got {steps}")
    return _calibrate_sigma(budget, q=1.0, steps=steps)


def calibrate_dprsgd(budget: PrivacyBudget, clip: float, n: int, batch: int,
                     steps: int) -> float:
    """Noise multiplier for minibatch private SGD at sampling rate batch/n."""
    if not clip > 0.0:
        raise ValueError(f"calibrate_dprsgd: clip must be positive, got {clip}")
    if n < 1 or not (1 <= batch <= n):
        raise ValueError(f"calibrate_dprsgd: need 1 <= batch <= n, "
                         f"got batch = {batch}, n = {n}")
    if steps < 1:
        raise ValueError(f"calibrate_dprsgd: steps must be >= 1, got {steps}")
    return _calibrate_sigma(budget, q=batch / n, steps=steps)


def gaussian_sigma_classical(sensitivity: float, epsilon: float,
                             delta: float) -> float:
    """Classical Gaussian mechanism scale sqrt(2 log(1.25/delta)) S / eps."""
    if not sensitivity > 0.0:
        raise ValueError("gaussian_sigma_classical: sensitivity must be positive")
    if not epsilon > 0.0:
        raise ValueError("gaussian_sigma_classical: epsilon must be positive")
    if not (0.0 < delta < 1.0):
        raise ValueError("gaussian_sigma_classical: delta must lie in (0, 1)")
    return math.sqrt(2.0 * math.log(1.25 / delta)) * sensitivity / epsilon


# ---------------------------------------------------------------------------
# output mechanisms
# ---------------------------------------------------------------------------

def _mh_chain(manifold: Manifold, center: np.ndarray, scale: float,
              proposal_std: float, steps: int,
              rng: np.random.Generator) -> np.ndarray:
    """Metropolis chain targeting exp(-dist(x, center)/scale).

    Proposals are exp moves along tangent Gaussians; the proposal law is
    symmetric on these geometries, so the acceptance ratio only involves
    distances to the center.  Draws are pre-generated so the njit sphere
    kernel and this generic loop consume identical randomness.
    """
    normals = rng.standard_normal((steps,) + manifold.ambient_shape)
    unifs = rng.random(steps)
    if isinstance(manifold, Hypersphere):
        return kernels.sphere_laplace_chain(center, normals, unifs,
                                            scale, proposal_std)
    x = center.copy()
    d_cur = 0.0
    for t in range(steps):
        try:
            v = proposal_std * manifold.tangent_from_raw(x, normals[t])
            y = manifold.exp(x, v)
            d_new = manifold.dist(y, center)
        except (DomainError, NumericError):
            continue
        if unifs[t] < math.exp((d_cur - d_new) / scale):
            x = y
            d_cur = d_new
    return x


def rie_laplace_mechanism(center: ManifoldPoint, sensitivity: float,
                          epsilon: float, burn_in: int = 500,
                          proposal_std: float | None = None,
                          seed: int = 0) -> ManifoldPoint:
    """Sample from the density proportional to exp(-dist(x, center)/sigma)
    with sigma = sensitivity / epsilon, via a Metropolis chain started at
    the center.  Runs `burn_in` steps and returns the next state.
    """
    if not sensitivity > 0.0:
        raise ValueError(f"rie_laplace_mechanism: sensitivity must be positive, "
                         f"got {sensitivity}")
    if not epsilon > 0.0:
        raise ValueError(f"rie_laplace_mechanism: epsilon must be positive, "
                         f"got {epsilon}")
    if burn_in < 0:
        raise ValueError(f"rie_laplace_mechanism: burn_in must be >= 0, "
                         f"got {burn_in}")
    scale = sensitivity / epsilon
    if proposal_std is None:
        proposal_std = scale / 2.0
    if not proposal_std > 0.0:
        raise ValueError("rie_laplace_mechanism: proposal_std must be positive")
    rng = np.random.default_rng(seed)
    out = _mh_chain(center.manifold, center.value, scale, proposal_std,
                    burn_in + 1, rng)
    return ManifoldPoint(out, center.manifold)


def log_euclidean_mechanism(x: ManifoldPoint, sensitivity: float,
                            budget: PrivacyBudget, seed: int = 0) -> ManifoldPoint:
    """Gaussian mechanism in log coordinates for the log-Euclidean geometry.

    Adds i.i.d. Gaussian noise of standard deviation
    sqrt(2 log(1.25/delta)) * sensitivity / epsilon to the free
    coordinates of logm(X); off-diagonal entries carry 1/sqrt(2) of the
    coordinate noise so the coordinate map is a Frobenius isometry.
    """
    if not isinstance(x.manifold, SPDLogEuclidean):
        raise ValueError("log_euclidean_mechanism: point must live on the "
                         "log-Euclidean SPD geometry")
    if not sensitivity > 0.0:
        raise ValueError(f"log_euclidean_mechanism: sensitivity must be "
                         f"positive, got {sensitivity}")
    sigma = gaussian_sigma_classical(sensitivity, budget.epsilon, budget.delta)
    rng = np.random.default_rng(seed)
    noise = sigma * _sym_gaussian(rng, x.manifold.m)
    return ManifoldPoint(expm(logm(x.value) + noise), x.manifold)
