"""Riemannian optimization and differential privacy on classic manifolds.

Geometries: unit hypersphere, Poincare ball, Lorentz hyperboloid,
Grassmann, and SPD matrices under the affine-invariant and log-Euclidean
metrics.  Optimizers follow an init/update transformation interface and
include plain, variance-reduced, adaptive, zeroth-order and
differentially private gradient descent.  Privacy tooling covers output
mechanisms and an RDP accountant with noise calibration.
"""

from .backend import BACKEND, HAS_NUMBA
from .core import (
    CostFn,
    Manifold,
    ManifoldPoint,
    TangentVector,
    apply_updates,
    clip_tangent,
    finite_diff_egrad,
    frechet_mean,
    mean_cost,
    mean_riemannian_gradient,
    mean_tangent,
    per_example_riemannian_gradients,
    riemannian_gradient,
)
from .errors import (
    CalibrationError,
    DomainError,
    InvalidPointError,
    InvalidTangentError,
    NotPositiveDefiniteError,
    NumericError,
    RieoptError,
)
from .geometry import (
    Grassmann,
    Hypersphere,
    LorentzHyperboloid,
    PoincareBall,
    SPDAffineInvariant,
    SPDLogEuclidean,
    ball_to_hyperboloid,
    hyperboloid_to_ball,
    mobius_add,
    principal_angles,
)
from .linalg import SymEig, dfun_sym, expm, logm, spd_fun, sym, sym_eig
from .optimizers import (
    GradientTransformation,
    constant,
    dp_rsgd,
    fit,
    inv_sqrt,
    rasa,
    rsgd,
    rsrg,
    rsvrg,
    zo_rgd,
)
from .privacy import (
    AccountantState,
    PrivacyBudget,
    calibrate_dprgd,
    calibrate_dprsgd,
    compose,
    gaussian_profile,
    gaussian_sigma_classical,
    log_euclidean_mechanism,
    rdp_gaussian,
    rdp_subsampled_gaussian,
    rdp_to_dp,
    rie_laplace_mechanism,
    subsampled_gaussian_profile,
)

__version__ = "0.1.0"
