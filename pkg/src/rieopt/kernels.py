"""Hot numeric kernels shared by the geometry modules.

Every function here is written in numba-compatible numpy and works as
plain Python.  When the numba backend is active (see ``rieopt.backend``)
the module rebinds each name to an ``@njit`` compiled version at import
time; callers never need to know which backend is live.  Kernels do not
raise and do not consume random state: domain checks and sampling stay
in the geometry wrappers so both backends produce the same chains from
the same pre-generated draws.
"""

from __future__ import annotations

import numpy as np

from .backend import BACKEND

# Scalar function tags for loewner_matrix.
FUN_EXP = 0
FUN_LOG = 1


# ---------------------------------------------------------------------------
# unit sphere, canonical metric
# ---------------------------------------------------------------------------

def sphere_project(x, g):
    # tangent projection (I - x x^T) g
    return g - np.dot(x, g) * x


def sphere_exp(x, v):
    n = np.sqrt(np.dot(v, v))
    if n == 0.0:
        return x.copy()
    if n < 1e-12:
        y = x + v
        return y / np.sqrt(np.dot(y, y))
    return np.cos(n) * x + (np.sin(n) / n) * v


def sphere_log(x, y):
    # assumes the pair is not antipodal; wrapper checks 1 + x.y
    c = np.dot(x, y)
    if c > 1.0:
        c = 1.0
    if c < -1.0:
        c = -1.0
    theta = np.arccos(c)
    w = y - c * x
    if theta < 1e-12:
        return w
    return (theta / np.sin(theta)) * w


def sphere_dist(x, y):
    c = np.dot(x, y)
    if c > 1.0:
        c = 1.0
    if c < -1.0:
        c = -1.0
    return np.arccos(c)


def sphere_pt(x, y, v):
    # parallel transport along the minimizing geodesic from x to y
    denom = 1.0 + np.dot(x, y)
    return v - (np.dot(y, v) / denom) * (x + y)


def sphere_laplace_chain(center, normals, unifs, scale, prop_std):
    # Metropolis chain targeting exp(-dist(x, center)/scale) on the sphere.
    # One proposal per row of `normals`; `unifs` holds the accept draws.
    x = center.copy()
    d_cur = 0.0
    for t in range(normals.shape[0]):
        g = normals[t]
        v = prop_std * (g - np.dot(x, g) * x)
        n = np.sqrt(np.dot(v, v))
        if n == 0.0:
            y = x.copy()
        elif n < 1e-12:
            y0 = x + v
            y = y0 / np.sqrt(np.dot(y0, y0))
        else:
            y = np.cos(n) * x + (np.sin(n) / n) * v
        c = np.dot(center, y)
        if c > 1.0:
            c = 1.0
        if c < -1.0:
            c = -1.0
        d_new = np.arccos(c)
        if unifs[t] < np.exp((d_cur - d_new) / scale):
            x = y
            d_cur = d_new
    return x


# ---------------------------------------------------------------------------
# Poincare ball
# ---------------------------------------------------------------------------

def mobius_add(x, y):
    # (1 + 2<x,y> + |y|^2) x + (1 - |x|^2) y, over 1 + 2<x,y> + |x|^2 |y|^2
    x2 = np.dot(x, x)
    y2 = np.dot(y, y)
    xy = np.dot(x, y)
    denom = 1.0 + 2.0 * xy + x2 * y2
    return ((1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y) / denom


def poincare_lambda(x):
    # conformal factor 2 / (1 - |x|^2)
    return 2.0 / (1.0 - np.dot(x, x))


def poincare_exp(x, v):
    vn = np.sqrt(np.dot(v, v))
    if vn == 0.0:
        return x.copy()
    lam = 2.0 / (1.0 - np.dot(x, x))
    t = np.tanh(0.5 * lam * vn)
    return mobius_add(x, (t / vn) * v)


def poincare_log(x, y):
    w = mobius_add(-x, y)
    wn = np.sqrt(np.dot(w, w))
    if wn == 0.0:
        return np.zeros_like(w)
    if wn > 1.0 - 1e-15:
        wn_c = 1.0 - 1e-15
    else:
        wn_c = wn
    lam = 2.0 / (1.0 - np.dot(x, x))
    return ((2.0 / lam) * np.arctanh(wn_c) / wn) * w


def poincare_dist(x, y):
    w = mobius_add(-x, y)
    wn = np.sqrt(np.dot(w, w))
    if wn > 1.0 - 1e-15:
        wn = 1.0 - 1e-15
    return 2.0 * np.arctanh(wn)


def poincare_gyr(a, b, v):
    # gyr[a, b] v = -(a + b) + (a + (b + v)) in Mobius arithmetic.
    # The map is linear in v, so scale v into the ball, apply, rescale.
    vn = np.sqrt(np.dot(v, v))
    if vn == 0.0:
        return v.copy()
    s = 2.0 * vn
    w = v / s
    inner = mobius_add(b, w)
    u = mobius_add(a, inner)
    ab = mobius_add(a, b)
    return s * mobius_add(-ab, u)


def poincare_pt(x, y, v):
    # (lambda_x / lambda_y) gyr[y, -x] v
    lx = 2.0 / (1.0 - np.dot(x, x))
    ly = 2.0 / (1.0 - np.dot(y, y))
    return (lx / ly) * poincare_gyr(y, -x, v)


# ---------------------------------------------------------------------------
# Lorentz hyperboloid
# ---------------------------------------------------------------------------

def lorentz_inner(u, v):
    # Minkowski form -u0 v0 + sum_i ui vi
    return -u[0] * v[0] + np.dot(u[1:], v[1:])


def lorentz_project(x, h):
    # projection onto the tangent space at x: h + <x,h>_L x
    return h + lorentz_inner(x, h) * x


def lorentz_exp(x, v):
    s2 = lorentz_inner(v, v)
    if s2 < 0.0:
        s2 = 0.0
    s = np.sqrt(s2)
    if s == 0.0:
        return x.copy()
    return np.cosh(s) * x + (np.sinh(s) / s) * v


def lorentz_log(x, y):
    b = -lorentz_inner(x, y)
    if b <= 1.0 + 1e-14:
        return np.zeros_like(x)
    return (np.arccosh(b) / np.sqrt(b * b - 1.0)) * (y - b * x)


def lorentz_dist(x, y):
    b = -lorentz_inner(x, y)
    if b < 1.0:
        b = 1.0
    return np.arccosh(b)


def lorentz_pt(x, y, v):
    b = -lorentz_inner(x, y)
    return v + (lorentz_inner(y, v) / (1.0 + b)) * (x + y)


# ---------------------------------------------------------------------------
# spectral divided differences
# ---------------------------------------------------------------------------

def loewner_matrix(ev, fv, tag):
    # G_ij = (f(l_i) - f(l_j)) / (l_i - l_j), with the derivative limit
    # f'((l_i + l_j)/2) when |l_i - l_j| < 1e-10 max(1, |l_i|, |l_j|).
    m = ev.shape[0]
    li = ev.reshape((m, 1))
    lj = ev.reshape((1, m))
    diff = li - lj
    mid = 0.5 * (li + lj)
    if tag == 0:
        dmid = np.exp(mid)
    else:
        dmid = 1.0 / mid
    fi = fv.reshape((m, 1))
    fj = fv.reshape((1, m))
    tol = 1e-10 * np.maximum(np.maximum(np.abs(li), np.abs(lj)),
                             np.ones_like(diff))
    small = np.abs(diff) < tol
    safe = np.where(small, np.ones_like(diff), diff)
    return np.where(small, dmid, (fi - fj) / safe)


KERNEL_NAMES = [
    "sphere_project", "sphere_exp", "sphere_log", "sphere_dist",
    "sphere_pt", "sphere_laplace_chain",
    "mobius_add", "poincare_lambda", "poincare_exp", "poincare_log",
    "poincare_dist", "poincare_gyr", "poincare_pt",
    "lorentz_inner", "lorentz_project", "lorentz_exp", "lorentz_log",
    "lorentz_dist", "lorentz_pt",
    "loewner_matrix",
]

if BACKEND == "numba":
    from numba import njit

    _jit = njit(cache=True)
    for _name in KERNEL_NAMES:
        globals()[_name] = _jit(globals()[_name])
    del _jit, _name
