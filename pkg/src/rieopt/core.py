"""Manifold contract, wrapped points and tangents, gradients, Frechet mean.

A `Manifold` works on raw numpy arrays; `ManifoldPoint` and
`TangentVector` are thin validated wrappers used at API boundaries
(optimizers, privacy mechanisms, the CLI).  Costs are plain callables on
wrapped points; when no analytic Euclidean gradient is supplied, a
central finite-difference fallback is used before converting to the
Riemannian gradient via `egrad_to_rgrad`.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import InvalidPointError, InvalidTangentError, NumericError

TOL_POINT = 1e-9
TOL_TANGENT = 1e-8


def as_generator(seed) -> np.random.Generator:
    """Coerce an int seed, Generator, or None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Manifold(abc.ABC):
    """Riemannian manifold primitives on raw arrays.

    Concrete geometries implement the metric, exponential and logarithm
    maps, geodesic distance, parallel transport, the Euclidean-to-
    Riemannian gradient conversion, point/tangent validation and random
    sampling.  Tolerances are configurable per instance.
    """

    name: str = "manifold"

    def __init__(self, ambient_shape: tuple[int, ...], intrinsic_dim: int,
                 tol_point: float = TOL_POINT, tol_tangent: float = TOL_TANGENT):
        self.ambient_shape = ambient_shape
        self.intrinsic_dim = intrinsic_dim
        self.tol_point = tol_point
        self.tol_tangent = tol_tangent

    # -- metric ------------------------------------------------------------

    @abc.abstractmethod
    def metric(self, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
        """Riemannian inner product of tangents u, v at x."""

    def norm(self, x: np.ndarray, v: np.ndarray) -> float:
        return float(np.sqrt(max(self.metric(x, v, v), 0.0)))

    # -- geodesic maps -----------------------------------------------------

    @abc.abstractmethod
    def exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Exponential map; exp(x, 0) returns x unchanged."""

    @abc.abstractmethod
    def log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Logarithm map; inverse of exp inside the injectivity radius."""

    @abc.abstractmethod
    def dist(self, x: np.ndarray, y: np.ndarray) -> float:
        """Geodesic distance."""

    @abc.abstractmethod
    def transport(self, x: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Parallel transport of v from x to y along the minimizing geodesic."""

    def transport_along(self, x: np.ndarray, direction: np.ndarray,
                        v: np.ndarray) -> np.ndarray:
        """Parallel transport of v along the geodesic t -> exp(x, t*direction)."""
        if not np.any(direction):
            return v.copy()
        return self.transport(x, self.exp(x, direction), v)

    # -- gradients ----------------------------------------------------------

    @abc.abstractmethod
    def egrad_to_rgrad(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Convert a Euclidean (ambient) gradient into the Riemannian gradient."""

    # -- validation ----------------------------------------------------------

    @abc.abstractmethod
    def point_defect(self, x: np.ndarray) -> float:
        """Scalar residual of the point constraint; 0 for exact points."""

    @abc.abstractmethod
    def tangent_defect(self, x: np.ndarray, v: np.ndarray) -> float:
        """Scalar residual of the tangency constraint at x."""

    def is_point(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = self.tol_point if tol is None else tol
        x = np.asarray(x, dtype=float)
        if x.shape != self.ambient_shape or not np.all(np.isfinite(x)):
            return False
        return self.point_defect(x) <= tol

    def is_tangent(self, x: np.ndarray, v: np.ndarray,
                   tol: float | None = None) -> bool:
        tol = self.tol_tangent if tol is None else tol
        v = np.asarray(v, dtype=float)
        if v.shape != self.ambient_shape or not np.all(np.isfinite(v)):
            return False
        return self.tangent_defect(np.asarray(x, dtype=float), v) <= tol

    def adjust_point(self, x: np.ndarray) -> np.ndarray:
        """Hook applied before point validation (e.g. boundary clamping)."""
        return x

    def to_tangent(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Project an ambient vector onto the tangent space at x.

        Used by optimizers whose elementwise preconditioning can leave
        the tangent space (adaptive scaling).
        """
        raise NotImplementedError(
            f"{self.name}: no ambient tangent projector defined"
        )

    # -- sampling ------------------------------------------------------------

    @abc.abstractmethod
    def random_point(self, rng) -> np.ndarray:
        """Draw a valid point; deterministic given a seeded generator."""

    @abc.abstractmethod
    def tangent_from_raw(self, x: np.ndarray, raw: np.ndarray) -> np.ndarray:
        """Map ambient-shaped standard normal draws to a tangent at x whose
        coordinates in a metric-orthonormal basis are i.i.d. standard normal
        (so E|v|_x^2 = intrinsic_dim)."""

    def tangent_gaussian(self, x: np.ndarray, rng) -> np.ndarray:
        rng = as_generator(rng)
        return self.tangent_from_raw(x, rng.standard_normal(self.ambient_shape))

    def random_tangent(self, x: np.ndarray, rng, norm: float = 1.0) -> np.ndarray:
        """Uniformly random direction at x, scaled to Riemannian norm `norm`."""
        rng = as_generator(rng)
        v = self.tangent_from_raw(x, rng.standard_normal(self.ambient_shape))
        n = self.norm(x, v)
        if n == 0.0:
            return v
        return (norm / n) * v

    def __repr__(self) -> str:  # pragma: no cover
        return f"{type(self).__name__}{self.ambient_shape}"


@dataclass(frozen=True)
class ManifoldPoint:
    """An array value tagged with its geometry; validated on construction."""

    value: np.ndarray
    manifold: Manifold

    def __post_init__(self):
        value = np.asarray(self.value, dtype=float)
        value = self.manifold.adjust_point(value)
        object.__setattr__(self, "value", value)
        if value.shape != self.manifold.ambient_shape:
            raise InvalidPointError(
                f"{self.manifold.name}: point shape {value.shape} does not "
                f"match ambient shape {self.manifold.ambient_shape}"
            )
        if not np.all(np.isfinite(value)):
            raise InvalidPointError(f"{self.manifold.name}: non-finite point entries")
        defect = self.manifold.point_defect(value)
        if defect > self.manifold.tol_point:
            raise InvalidPointError(
                f"{self.manifold.name}: point constraint violated "
                f"(residual {defect:.3e} > {self.manifold.tol_point:.0e})"
            )

    @classmethod
    def unchecked(cls, value: np.ndarray, manifold: Manifold) -> "ManifoldPoint":
        """Skip validation; used for off-manifold finite-difference probes."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "value", np.asarray(value, dtype=float))
        object.__setattr__(obj, "manifold", manifold)
        return obj


@dataclass(frozen=True)
class TangentVector:
    """A tangent array attached to its base point; validated on construction."""

    value: np.ndarray
    base: ManifoldPoint

    def __post_init__(self):
        value = np.asarray(self.value, dtype=float)
        object.__setattr__(self, "value", value)
        manifold = self.base.manifold
        if value.shape != manifold.ambient_shape:
            raise InvalidTangentError(
                f"{manifold.name}: tangent shape {value.shape} does not match "
                f"ambient shape {manifold.ambient_shape}"
            )
        if not np.all(np.isfinite(value)):
            raise InvalidTangentError(f"{manifold.name}: non-finite tangent entries")
        defect = manifold.tangent_defect(self.base.value, value)
        if defect > manifold.tol_tangent:
            raise InvalidTangentError(
                f"{manifold.name}: tangency violated at base "
                f"(residual {defect:.3e} > {manifold.tol_tangent:.0e})"
            )

    @property
    def manifold(self) -> Manifold:
        return self.base.manifold

    def norm(self) -> float:
        return self.manifold.norm(self.base.value, self.value)

    def scaled(self, c: float) -> "TangentVector":
        return TangentVector(c * self.value, self.base)


@dataclass(frozen=True)
class CostFn:
    """A cost on manifold points with an optional analytic Euclidean gradient.

    `evaluate(point, datum)` returns a scalar; `euclidean_grad`, when
    present, returns the ambient-coordinate gradient and must agree with
    the finite-difference fallback on validation inputs.
    """

    evaluate: Callable[[ManifoldPoint, Any], float]
    euclidean_grad: Optional[Callable[[ManifoldPoint, Any], np.ndarray]] = None


def finite_diff_egrad(cost: CostFn, w: ManifoldPoint, datum: Any = None,
                      h: float | None = None) -> np.ndarray:
    """Central finite-difference Euclidean gradient of `cost` at w.

    Probes are off-manifold by construction, so they bypass point
    validation.  Default step: 1e-6 * (1 + max|w|).
    """
    x = w.value
    if h is None:
        h = 1e-6 * (1.0 + float(np.max(np.abs(x))))
    manifold = w.manifold
    g = np.empty_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xp[idx] += h
        xm = x.copy()
        xm[idx] -= h
        fp = cost.evaluate(ManifoldPoint.unchecked(xp, manifold), datum)
        fm = cost.evaluate(ManifoldPoint.unchecked(xm, manifold), datum)
        g[idx] = (fp - fm) / (2.0 * h)
    return g


def riemannian_gradient(cost: CostFn, w: ManifoldPoint,
                        datum: Any = None) -> TangentVector:
    """Riemannian gradient of `cost` at w for one datum."""
    if cost.euclidean_grad is not None:
        g = np.asarray(cost.euclidean_grad(w, datum), dtype=float)
    else:
        g = finite_diff_egrad(cost, w, datum)
    if not np.all(np.isfinite(g)):
        raise NumericError("riemannian_gradient: non-finite Euclidean gradient")
    r = w.manifold.egrad_to_rgrad(w.value, g)
    if not np.all(np.isfinite(r)):
        raise NumericError("riemannian_gradient: non-finite output of egrad_to_rgrad")
    return TangentVector(r, w)


def sum_tangent_values(values: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right sum so that aggregation is reproducible."""
    acc = values[0].copy()
    for v in values[1:]:
        acc = acc + v
    return acc


def mean_tangent(tangents: Sequence[TangentVector]) -> TangentVector:
    """Mean of tangent vectors sharing a base point."""
    if len(tangents) == 0:
        raise ValueError("mean_tangent: empty list")
    base = tangents[0].base
    acc = sum_tangent_values([t.value for t in tangents])
    return TangentVector(acc / len(tangents), base)


def per_example_riemannian_gradients(cost: CostFn, w: ManifoldPoint,
                                     data: Sequence[Any]) -> list[TangentVector]:
    return [riemannian_gradient(cost, w, z) for z in data]


def mean_riemannian_gradient(cost: CostFn, w: ManifoldPoint,
                             data: Sequence[Any]) -> TangentVector:
    return mean_tangent(per_example_riemannian_gradients(cost, w, data))


def mean_cost(cost: CostFn, w: ManifoldPoint, data: Sequence[Any]) -> float:
    total = 0.0
    for z in data:
        total += float(cost.evaluate(w, z))
    return total / len(data)


def clip_tangent(v: TangentVector, tau: float) -> TangentVector:
    """Rescale v to Riemannian norm at most tau; identity when already short."""
    if not tau > 0.0:
        raise ValueError(f"clip_tangent: tau must be positive, got {tau}")
    n = v.norm()
    if n <= tau:
        return v
    return v.scaled(tau / n)


def apply_updates(w: ManifoldPoint, u: TangentVector) -> ManifoldPoint:
    """Move w along u with the exponential map."""
    if u.base is not w and not np.array_equal(u.base.value, w.value):
        raise ValueError("apply_updates: update is not based at the given point")
    return ManifoldPoint(w.manifold.exp(w.value, u.value), w.manifold)


def frechet_mean(manifold: Manifold, points: Sequence[ManifoldPoint],
                 step: float = 1.0, iters: int = 100
                 ) -> tuple[ManifoldPoint, float]:
    """Karcher-flow mean: w <- exp_w(step * mean_i log_w(z_i)).

    Starts from points[0] and runs a fixed number of iterations; returns
    the final iterate together with the norm of the mean log there.
    Convergence inside a geodesically convex ball is the caller's
    responsibility.
    """
    if len(points) == 0:
        raise ValueError("frechet_mean: empty point list")
    if iters < 1:
        raise ValueError(f"frechet_mean: iters must be >= 1, got {iters}")
    if not step > 0.0:
        raise ValueError(f"frechet_mean: step must be positive, got {step}")
    w = points[0].value
    values = [p.value for p in points]
    for _ in range(iters):
        logs = [manifold.log(w, z) for z in values]
        mean_log = sum_tangent_values(logs) / len(values)
        # re-project each iterate; exp drift compounds over many steps
        w = manifold.adjust_point(manifold.exp(w, step * mean_log))
    logs = [manifold.log(w, z) for z in values]
    mean_log = sum_tangent_values(logs) / len(values)
    residual = manifold.norm(w, mean_log)
    return ManifoldPoint(w, manifold), float(residual)
