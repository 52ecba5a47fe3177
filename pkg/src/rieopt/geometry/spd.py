"""Symmetric positive definite matrices under two metrics.

Affine-invariant: <U, V>_X = tr(X^-1 U X^-1 V), with

    exp_X(U)  = X^1/2 expm(X^-1/2 U X^-1/2) X^1/2
    log_X(Y)  = X^1/2 logm(X^-1/2 Y X^-1/2) X^1/2
    dist(X,Y) = |logm(X^-1/2 Y X^-1/2)|_F
    pt(V)     = E V E^T,  E = X^1/2 expm(logm(X^-1/2 Y X^-1/2)/2) X^-1/2

Log-Euclidean: <U, V>_X = tr(Dlog_X(U) Dlog_X(V)), the pullback of the
flat Frobenius metric through logm, so distances reduce to
|logm X - logm Y|_F and transport re-expresses log-coordinates at the
new base point.  Dlog/Dexp are the Daleckii-Krein derivatives from
``rieopt.linalg``.
"""

from __future__ import annotations

import numpy as np

from ..core import Manifold, as_generator
from ..linalg import EPS_SPD, dfun_sym, spd_fun, sym, sym_eig
from ..errors import NotPositiveDefiniteError

SYMMETRY_TOL = 1e-10


def _sym_gaussian(rng, m: int) -> np.ndarray:
    # sym(G) with G ~ iid N(0,1): diagonal N(0,1), off-diagonal N(0,1/2),
    # i.e. standard normal coordinates in a Frobenius-orthonormal basis
    return sym(rng.standard_normal((m, m)))


class _SPDBase(Manifold):
    def __init__(self, m: int, **tol):
        if m < 1:
            raise ValueError(f"SPD: matrix size must be >= 1, got {m}")
        super().__init__(ambient_shape=(m, m), intrinsic_dim=m * (m + 1) // 2, **tol)
        self.m = m

    def point_defect(self, x):
        asym = float(np.linalg.norm(x - x.T)) / max(1.0, float(np.linalg.norm(x)))
        if asym > SYMMETRY_TOL:
            return float("inf")
        min_ev = float(np.linalg.eigvalsh(sym(x))[0])
        return 0.0 if min_ev > EPS_SPD else float("inf")

    def tangent_defect(self, x, v):
        return float(np.linalg.norm(v - v.T)) / max(1.0, float(np.linalg.norm(v)))

    def to_tangent(self, x, h):
        return sym(h)

    def random_point(self, rng):
        rng = as_generator(rng)
        w = 0.5 * _sym_gaussian(rng, self.m)
        return spd_fun(w, "exp")

    def _check_spd(self, x, what: str):
        min_ev = float(np.linalg.eigvalsh(sym(x))[0])
        if min_ev <= EPS_SPD:
            raise NotPositiveDefiniteError(
                f"{self.name} {what}: matrix is not positive definite "
                f"(min eigenvalue {min_ev:.3e})",
                min_eigenvalue=min_ev,
            )


class SPDAffineInvariant(_SPDBase):
    """SPD(m) with the affine-invariant metric."""

    name = "spd_affine_invariant"

    def metric(self, x, u, v):
        s = spd_fun(x, "inv_sqrt")
        su = s @ sym(u) @ s
        sv = s @ sym(v) @ s
        return float(np.sum(su * sv))

    def exp(self, x, u):
        if not np.any(u):
            return x.copy()
        xh = spd_fun(x, "sqrt")
        xih = spd_fun(x, "inv_sqrt")
        inner = spd_fun(xih @ sym(u) @ xih, "exp")
        return sym(xh @ inner @ xh)

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros_like(x)
        xh = spd_fun(x, "sqrt")
        xih = spd_fun(x, "inv_sqrt")
        inner = spd_fun(xih @ y @ xih, "log")
        return sym(xh @ inner @ xh)

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        xih = spd_fun(x, "inv_sqrt")
        w = sym_eig(xih @ y @ xih)
        if w.values[0] <= EPS_SPD:
            raise NotPositiveDefiniteError(
                "spd_affine_invariant dist: whitened matrix is not positive "
                f"definite (min eigenvalue {float(w.values[0]):.3e})",
                min_eigenvalue=float(w.values[0]),
            )
        return float(np.sqrt(np.sum(np.log(w.values) ** 2)))

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        xh = spd_fun(x, "sqrt")
        xih = spd_fun(x, "inv_sqrt")
        half = spd_fun(0.5 * spd_fun(xih @ y @ xih, "log"), "exp")
        e = xh @ half @ xih
        return sym(e @ sym(v) @ e.T)

    def egrad_to_rgrad(self, x, g):
        return sym(x @ sym(g) @ x)

    def tangent_from_raw(self, x, raw):
        # isometry U -> X^1/2 U X^1/2 from the tangent space at I
        xh = spd_fun(x, "sqrt")
        return sym(xh @ sym(raw) @ xh)


class SPDLogEuclidean(_SPDBase):
    """SPD(m) with the log-Euclidean (flat) metric."""

    name = "spd_log_euclidean"

    def metric(self, x, u, v):
        du = dfun_sym(x, u, "log")
        dv = dfun_sym(x, v, "log")
        return float(np.sum(du * dv))

    def exp(self, x, u):
        if not np.any(u):
            return x.copy()
        lx = spd_fun(x, "log")
        return spd_fun(lx + dfun_sym(x, u, "log"), "exp")

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros_like(x)
        lx = spd_fun(x, "log")
        ly = spd_fun(y, "log")
        return dfun_sym(lx, ly - lx, "exp")

    def dist(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        return float(np.linalg.norm(spd_fun(x, "log") - spd_fun(y, "log")))

    def transport(self, x, y, v):
        if np.array_equal(x, y):
            return v.copy()
        w = dfun_sym(x, v, "log")
        ly = spd_fun(y, "log")
        return dfun_sym(ly, w, "exp")

    def egrad_to_rgrad(self, x, g):
        # gradient of the pulled-back cost in flat log coordinates, mapped
        # back to the tangent space: Dexp_{logm X} applied twice
        lx = spd_fun(x, "log")
        w = dfun_sym(lx, sym(g), "exp")
        return dfun_sym(lx, w, "exp")

    def tangent_from_raw(self, x, raw):
        # inverse isometry from flat log coordinates
        lx = spd_fun(x, "log")
        return dfun_sym(lx, sym(raw), "exp")
