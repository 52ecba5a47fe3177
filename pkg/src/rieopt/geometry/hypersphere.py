"""Unit hypersphere S(d) = {x in R^d : |x| = 1} with the canonical metric.

The metric is the restriction of the Euclidean inner product, geodesics
are great circles, and all maps have closed forms:

    exp_x(v)  = cos(|v|) x + sin(|v|) v/|v|
    log_x(y)  = theta (y - cos(theta) x) / sin(theta),  theta = arccos(x.y)
    dist(x,y) = arccos(x.y)
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..core import Manifold, as_generator
from ..errors import DomainError

ANTIPODAL_TOL = 1e-10


class Hypersphere(Manifold):
    """S(d) embedded in R^d, intrinsic dimension d - 1."""

    name = "hypersphere"

    def __init__(self, dim: int, **tol):
        if dim < 2:
            raise ValueError(f"Hypersphere: ambient dim must be >= 2, got {dim}")
        super().__init__(ambient_shape=(dim,), intrinsic_dim=dim - 1, **tol)
        self.dim = dim

    def metric(self, x, u, v):
        return float(np.dot(u, v))

    def project(self, x, g):
        """Orthogonal projection of an ambient vector onto the tangent at x."""
        return kernels.sphere_project(x, g)

    def exp(self, x, v):
        return kernels.sphere_exp(x, v)

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros_like(x)
        guard = 1.0 + float(np.dot(x, y))
        if guard <= ANTIPODAL_TOL:
            raise DomainError(
                "hypersphere log: points are antipodal or nearly so "
                f"(1 + x.y = {guard:.3e})"
            )
        return kernels.sphere_log(x, y)

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        return float(kernels.sphere_dist(x, y))

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        guard = 1.0 + float(np.dot(x, y))
        if guard <= ANTIPODAL_TOL:
            raise DomainError(
                "hypersphere transport: points are antipodal or nearly so"
            )
        return kernels.sphere_pt(x, y, v)

    def egrad_to_rgrad(self, x, g):
        return kernels.sphere_project(x, g)

    def point_defect(self, x):
        return abs(float(np.dot(x, x)) - 1.0)

    def tangent_defect(self, x, v):
        n = float(np.sqrt(np.dot(v, v)))
        return abs(float(np.dot(x, v))) / max(1.0, n)

    def random_point(self, rng):
        rng = as_generator(rng)
        x = rng.standard_normal(self.dim)
        return x / np.linalg.norm(x)

    def to_tangent(self, x, h):
        return kernels.sphere_project(x, h)

    def tangent_from_raw(self, x, raw):
        return kernels.sphere_project(x, raw)
