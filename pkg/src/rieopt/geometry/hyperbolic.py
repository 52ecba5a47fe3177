"""Hyperbolic space in two models: Poincare ball and Lorentz hyperboloid.

Poincare ball D(d) = {x in R^d : |x| < 1} with the conformal metric

    <u, v>_x = lambda_x^2 u.v,   lambda_x = 2 / (1 - |x|^2),

where geodesic maps are expressed through Mobius addition.  Lorentz
hyperboloid H(d) = {x in R^d : <x, x>_L = -1, x_0 > 0} under the
Minkowski form <u, v>_L = -u_0 v_0 + sum_i u_i v_i.  The isometry
between the models is

    ball_to_hyperboloid(x) = ((1 + |x|^2), 2x) / (1 - |x|^2).
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import Manifold, as_generator
from ..errors import DomainError, NumericError

BOUNDARY_EPS = 1e-7
MIN_DENOM = 1e-15


def mobius_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mobius addition on the open unit ball.

    x + y = ((1 + 2x.y + |y|^2) x + (1 - |x|^2) y) / (1 + 2x.y + |x|^2 |y|^2)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    denom = 1.0 + 2.0 * float(np.dot(x, y)) + float(np.dot(x, x)) * float(np.dot(y, y))
    if abs(denom) < MIN_DENOM:
        raise NumericError(
            f"mobius_add: denominator {denom:.3e} below {MIN_DENOM:.0e}"
        )
    return kernels.mobius_add(x, y)


class PoincareBall(Manifold):
    """Open unit ball with the conformal hyperbolic metric."""

    name = "poincare"

    def __init__(self, dim: int, **tol):
        if dim < 1:
            raise ValueError(f"PoincareBall: dim must be >= 1, got {dim}")
        super().__init__(ambient_shape=(dim,), intrinsic_dim=dim, **tol)
        self.dim = dim

    def adjust_point(self, x):
        # clamp points within 1e-7 of the boundary back to radius 1 - 1e-7
        n = float(np.linalg.norm(x))
        if n > 1.0 - BOUNDARY_EPS:
            return x * ((1.0 - BOUNDARY_EPS) / n)
        return x

    def conformal_factor(self, x) -> float:
        return float(kernels.poincare_lambda(x))

    def metric(self, x, u, v):
        lam = kernels.poincare_lambda(x)
        return float(lam * lam * np.dot(u, v))

    def exp(self, x, v):
        return kernels.poincare_exp(x, v)

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros_like(x)
        return kernels.poincare_log(x, y)

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        return float(kernels.poincare_dist(x, y))

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        return kernels.poincare_pt(x, y, v)

    def gyration(self, a, b, v):
        """The gyration operator gyr[a, b]v, extended linearly in v."""
        return kernels.poincare_gyr(a, b, v)

    def egrad_to_rgrad(self, x, g):
        # inverse metric scaling: g (1 - |x|^2)^2 / 4
        lam = kernels.poincare_lambda(x)
        return g / (lam * lam)

    def point_defect(self, x):
        # strict interior constraint |x|^2 < 1 - 1e-12
        s = float(np.dot(x, x))
        return 0.0 if s < 1.0 - 1e-12 else float("inf")

    def tangent_defect(self, x, v):
        # the tangent space is all of R^d
        return 0.0

    def random_point(self, rng):
        rng = as_generator(rng)
        u = rng.standard_normal(self.dim)
        u /= np.linalg.norm(u)
        # radius uniform in the ball of radius 0.8 (Euclidean volume measure)
        r = 0.8 * rng.random() ** (1.0 / self.dim)
        return r * u

    def to_tangent(self, x, h):
        # the tangent space at any interior point is all of R^d
        return np.asarray(h, dtype=float)

    def tangent_from_raw(self, x, raw):
        # orthonormal basis at x is e_i / lambda_x
        return raw / kernels.poincare_lambda(x)


class LorentzHyperboloid(Manifold):
    """Upper sheet of the hyperboloid <x, x>_L = -1 in R^d."""

    name = "lorentz"

    def __init__(self, dim: int, **tol):
        if dim < 2:
            raise ValueError(f"LorentzHyperboloid: ambient dim must be >= 2, got {dim}")
        super().__init__(ambient_shape=(dim,), intrinsic_dim=dim - 1, **tol)
        self.dim = dim

    def minkowski_inner(self, u, v) -> float:
        return float(kernels.lorentz_inner(u, v))

    def adjust_point(self, x):
        # rescale onto <x, x>_L = -1; cosh/sinh in exp amplify rounding
        q = -float(kernels.lorentz_inner(x, x))
        if x[0] > 0.0 and q > 0.0 and q != 1.0:
            return x / np.sqrt(q)
        return x

    def metric(self, x, u, v):
        return float(kernels.lorentz_inner(u, v))

    def project(self, x, h):
        """Minkowski-orthogonal projection onto the tangent space at x."""
        return kernels.lorentz_project(x, h)

    def to_tangent(self, x, h):
        return kernels.lorentz_project(x, h)

    def exp(self, x, v):
        return kernels.lorentz_exp(x, v)

    def log(self, x, y):
        beta = -float(kernels.lorentz_inner(x, y))
        if beta < 1.0 - 1e-9:
            raise DomainError(
                f"lorentz log: invalid pair, -<x,y>_L = {beta:.12g} < 1"
            )
        return kernels.lorentz_log(x, y)

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        return float(kernels.lorentz_dist(x, y))

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        return kernels.lorentz_pt(x, y, v)

    def egrad_to_rgrad(self, x, g):
        # flip the time component, then project onto the tangent space
        h = g.copy()
        h[0] = -h[0]
        return kernels.lorentz_project(x, h)

    def point_defect(self, x):
        if x[0] <= 0.0:
            return float("inf")
        return abs(float(kernels.lorentz_inner(x, x)) + 1.0)

    def tangent_defect(self, x, v):
        n = float(np.sqrt(np.dot(v, v)))
        return abs(float(kernels.lorentz_inner(x, v))) / max(1.0, n)

    def random_point(self, rng):
        rng = as_generator(rng)
        z = 0.7 * rng.standard_normal(self.dim - 1)
        x = np.empty(self.dim)
        x[0] = np.sqrt(1.0 + float(np.dot(z, z)))
        x[1:] = z
        return x

    def tangent_from_raw(self, x, raw):
        # standard normal in the tangent space at the apex, transported to x;
        # parallel transport is a linear isometry so orthonormal coordinates
        # stay i.i.d. standard normal
        v0 = np.zeros(self.dim)
        v0[1:] = raw[1:]
        apex = np.zeros(self.dim)
        apex[0] = 1.0
        if np.array_equal(x, apex):
            return v0
        return kernels.lorentz_pt(apex, x, v0)


def ball_to_hyperboloid(x: np.ndarray) -> np.ndarray:
    """Isometry from the Poincare ball D(d) to the hyperboloid H(d+1)."""
    x = np.asarray(x, dtype=float)
    s = float(np.dot(x, x))
    out = np.empty(x.shape[0] + 1)
    out[0] = (1.0 + s) / (1.0 - s)
    out[1:] = 2.0 * x / (1.0 - s)
    return out


def hyperboloid_to_ball(x: np.ndarray) -> np.ndarray:
    """Inverse isometry: H(d+1) -> D(d), x -> x_{1:} / (1 + x_0)."""
    x = np.asarray(x, dtype=float)
    return x[1:] / (1.0 + x[0])
