import numpy as np
import pytest

from rieopt import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure math, not numba."""
    rng = np.random.default_rng(0)
    x = rng.standard_normal(4)
    x /= np.linalg.norm(x)
    v = rng.standard_normal(4)
    v -= (v @ x) * x
    y = kernels.sphere_exp(x, 0.1 * v)
    kernels.sphere_log(x, y)
    kernels.sphere_dist(x, y)
    kernels.sphere_pt(x, y, v)
    kernels.sphere_laplace_chain(x, rng.standard_normal((3, 4)), rng.random(3),
                                 0.5, 0.25)

    a = 0.3 * rng.standard_normal(4)
    b = 0.2 * rng.standard_normal(4)
    u = 0.1 * rng.standard_normal(4)
    kernels.mobius_add(a, b)
    kernels.poincare_lambda(a)
    q = kernels.poincare_exp(a, u)
    kernels.poincare_log(a, q)
    kernels.poincare_dist(a, b)
    kernels.poincare_gyr(a, b, u)
    kernels.poincare_pt(a, b, u)

    z = 0.4 * rng.standard_normal(3)
    xl = np.concatenate(([np.sqrt(1.0 + z @ z)], z))
    vl = kernels.lorentz_project(xl, rng.standard_normal(4))
    yl = kernels.lorentz_exp(xl, 0.2 * vl)
    kernels.lorentz_inner(xl, yl)
    kernels.lorentz_log(xl, yl)
    kernels.lorentz_dist(xl, yl)
    kernels.lorentz_pt(xl, yl, vl)

    ev = np.array([1.0, 2.0, 3.0])
    kernels.loewner_matrix(ev, np.log(ev), kernels.FUN_LOG)
    kernels.loewner_matrix(ev, np.exp(ev), kernels.FUN_EXP)
