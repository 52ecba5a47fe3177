"""Grassmann manifold G(m, r): r-dimensional subspaces of R^m.

Subspaces are represented by m x r matrices with orthonormal columns;
two representatives X and XO (O orthogonal r x r) denote the same
point, so comparisons go through principal angles rather than matrix
equality.  Tangents at X live in the horizontal space {V : X^T V = 0}
with the Frobenius inner product, and the geodesic maps use the thin
SVD of the direction:

    U = P diag(s) Q^T
    exp_X(U)  = X Q cos(s) Q^T + P sin(s) Q^T        (re-orthonormalized)
    log_X(Y)  = P arctan(s) Q^T,  P diag(s) Q^T = svd((I - XX^T) Y (X^T Y)^-1)
    dist(X,Y) = sqrt(sum_i theta_i^2)  over the principal angles theta_i
"""

from __future__ import annotations

import numpy as np

from ..core import Manifold, as_generator
from ..errors import DomainError

LOG_SV_FLOOR = 1e-10


def principal_angles(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of x and y, ascending.

    arccos alone loses half the precision for angles near 0, so the
    cosines from svd(x^T y) are paired with the sines from the residual
    svd and combined with arctan2 (Bjorck-Golub form).
    """
    cos = np.clip(np.linalg.svd(x.T @ y, compute_uv=False), 0.0, 1.0)
    sin = np.clip(np.linalg.svd(y - x @ (x.T @ y), compute_uv=False), 0.0, 1.0)
    # cos descending <-> angles ascending; reversed sin pairs with it
    return np.arctan2(sin[::-1], cos)


class Grassmann(Manifold):
    """G(m, r) with orthonormal representatives, intrinsic dim r(m - r)."""

    name = "grassmann"

    def __init__(self, m: int, r: int, **tol):
        if not (0 < r < m):
            raise ValueError(f"Grassmann: need 0 < r < m, got (m, r) = ({m}, {r})")
        super().__init__(ambient_shape=(m, r), intrinsic_dim=r * (m - r), **tol)
        self.m = m
        self.r = r

    def metric(self, x, u, v):
        return float(np.sum(u * v))

    def project(self, x, g):
        """Horizontal projection (I - X X^T) G, computed as G - X (X^T G)."""
        return g - x @ (x.T @ g)

    def to_tangent(self, x, h):
        return self.project(x, h)

    def exp(self, x, u):
        if not np.any(u):
            return x.copy()
        p, s, qt = np.linalg.svd(u, full_matrices=False)
        y = ((x @ qt.T) * np.cos(s)) @ qt + (p * np.sin(s)) @ qt
        q, _ = np.linalg.qr(y)
        return q

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros_like(x)
        m = x.T @ y
        smin = np.linalg.svd(m, compute_uv=False)[-1]
        if smin <= LOG_SV_FLOOR:
            raise DomainError(
                "grassmann log: subspaces contain mutually orthogonal "
                f"directions (min singular value of X^T Y = {smin:.3e})"
            )
        w = y - x @ m
        w = np.linalg.solve(m.T, w.T).T  # (I - XX^T) Y (X^T Y)^-1
        p, s, qt = np.linalg.svd(w, full_matrices=False)
        return (p * np.arctan(s)) @ qt

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        theta = principal_angles(x, y)
        return float(np.sqrt(np.sum(theta * theta)))

    def transport_along(self, x, direction, v):
        """Transport v along the geodesic with initial direction `direction`.

        With direction = P diag(s) Q^T:
        pt(V) = (-X Q sin(s) P^T + P cos(s) P^T + (I - P P^T)) V
        """
        if not np.any(direction):
            return v.copy()
        p, s, qt = np.linalg.svd(direction, full_matrices=False)
        pv = p.T @ v
        return v + (-((x @ qt.T) * np.sin(s)) + p * np.cos(s) - p) @ pv

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        return self.transport_along(x, self.log(x, y), v)

    def egrad_to_rgrad(self, x, g):
        return self.project(x, g)

    def point_defect(self, x):
        r = self.r
        return float(np.linalg.norm(x.T @ x - np.eye(r)))

    def tangent_defect(self, x, v):
        n = float(np.linalg.norm(v))
        return float(np.linalg.norm(x.T @ v)) / max(1.0, n)

    def random_point(self, rng):
        rng = as_generator(rng)
        g = rng.standard_normal((self.m, self.r))
        q, rr = np.linalg.qr(g)
        # fix signs so the draw is unique and uniform
        d = np.sign(np.diag(rr))
        d[d == 0.0] = 1.0
        return q * d

    def tangent_from_raw(self, x, raw):
        return self.project(x, raw)
