"""Spectral primitives for symmetric and SPD matrices.

All matrix functions route through a single eigendecomposition
(`numpy.linalg.eigh`) so that accuracy and failure behaviour are uniform
across the SPD geometries.  Directional derivatives use the
Daleckii-Krein formula: with A = Q diag(l) Q^T,

    Df(A)[U] = Q (G o (Q^T U Q)) Q^T,
    G_ij = (f(l_i) - f(l_j)) / (l_i - l_j),   G_ii = f'(l_i),

where `o` is the elementwise product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotPositiveDefiniteError, NumericError

EPS_SPD = 1e-12

_SPECTRAL_FUNS = ("exp", "log", "sqrt", "inv_sqrt", "pow")
_NEEDS_SPD = ("log", "sqrt", "inv_sqrt", "pow")


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part (A + A^T)/2."""
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(a: np.ndarray) -> SymEig:
    """Eigendecomposition of the symmetrized input.

    The input is symmetrized internally; callers are expected to pass
    matrices that are symmetric up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"sym_eig expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("sym_eig: non-finite entries in input matrix")
    try:
        values, vectors = np.linalg.eigh(sym(a))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"sym_eig: eigendecomposition failed ({exc})") from exc
    return SymEig(values=values, vectors=vectors)


def _apply_scalar(values: np.ndarray, fun: str, power: float | None) -> np.ndarray:
    if fun == "exp":
        return np.exp(values)
    if fun == "log":
        return np.log(values)
    if fun == "sqrt":
        return np.sqrt(values)
    if fun == "inv_sqrt":
        return 1.0 / np.sqrt(values)
    if fun == "pow":
        if power is None:
            raise ValueError("spd_fun: fun='pow' requires the power argument")
        return values ** power
    raise ValueError(f"spd_fun: unknown fun {fun!r}, expected one of {_SPECTRAL_FUNS}")


def spd_fun(a: np.ndarray, fun: str, power: float | None = None) -> np.ndarray:
    """Spectral matrix function Q f(diag(l)) Q^T.

    `fun` is one of exp, log, sqrt, inv_sqrt, pow.  Everything except exp
    requires the smallest eigenvalue to exceed 1e-12; violations raise
    NotPositiveDefiniteError carrying the offending eigenvalue.
    """
    eig = sym_eig(a)
    if fun in _NEEDS_SPD:
        min_ev = float(eig.values[0])
        if min_ev <= EPS_SPD:
            raise NotPositiveDefiniteError(
                f"spd_fun({fun}): matrix is not positive definite "
                f"(min eigenvalue {min_ev:.3e} <= {EPS_SPD:.0e})",
                min_eigenvalue=min_ev,
            )
    fe = _apply_scalar(eig.values, fun, power)
    out = (eig.vectors * fe) @ eig.vectors.T
    return sym(out)


def dfun_sym(a: np.ndarray, u: np.ndarray, fun: str) -> np.ndarray:
    """Directional derivative Df(A)[U] of a spectral function.

    Supported: fun='exp' at any symmetric A, fun='log' at SPD A.  U is
    symmetrized internally and the result is symmetric.
    """
    if fun == "exp":
        tag = kernels.FUN_EXP
    elif fun == "log":
        tag = kernels.FUN_LOG
    else:
        raise ValueError(f"dfun_sym: fun must be 'exp' or 'log', got {fun!r}")
    eig = sym_eig(a)
    if fun == "log":
        min_ev = float(eig.values[0])
        if min_ev <= EPS_SPD:
            raise NotPositiveDefiniteError(
                f"dfun_sym(log): matrix is not positive definite "
                f"(min eigenvalue {min_ev:.3e} <= {EPS_SPD:.0e})",
                min_eigenvalue=min_ev,
            )
    u = sym(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u)):
        raise NumericError("dfun_sym: non-finite entries in direction")
    q = eig.vectors
    values = np.ascontiguousarray(eig.values)
    fv = np.ascontiguousarray(_apply_scalar(values, fun, None))
    gamma = kernels.loewner_matrix(values, fv, tag)
    ut = q.T @ u @ q
    return sym(q @ (gamma * ut) @ q.T)


def logm(a: np.ndarray) -> np.ndarray:
    """Matrix logarithm of an SPD matrix."""
    return spd_fun(a, "log")


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix."""
    return spd_fun(a, "exp")
