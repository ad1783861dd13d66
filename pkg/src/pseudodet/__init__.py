"""Pseudo determinants of Hermitian matrices and their canonical derivative.

Also provides the degenerate (singular-covariance) Gaussian built on top of
them: density, scaled log-likelihood, its gradient and the maximum
likelihood covariance estimate.
"""

from .exceptions import (
    CapExceeded,
    ConvergenceFailure,
    DeterminantOverflow,
    DimensionMismatch,
    EmptyDataset,
    InputError,
    InvalidProjector,
    KernelMismatch,
    NonSquare,
    NotHermitian,
    NotPSD,
    NumericalError,
    PseudoDetError,
    RankDrift,
)
from .matrix_core import (
    HermitianMatrix,
    MinorIndex,
    RankProfile,
    SpectralDecomposition,
    build_hermitian,
    decompose,
    enumerate_minors,
    iter_minors,
    minor_cap,
    range_projector,
    rank_profile,
    same_kernel,
)
from .pseudo_calculus import (
    ClassEquationReport,
    DirectionalProbe,
    GradientBundle,
    PdetResult,
    canonical_gradient,
    canonical_gradient_minor,
    check_class_equations,
    directional_derivative,
    fd_directional_derivative,
    pdet,
    pdet_differential,
    pdet_limit,
    pdet_minor,
    perturb_in_kernel,
    pinv,
    pinv_berg,
    verify_uniqueness,
)
from .degenerate_gaussian import (
    GaussianModel,
    LogLikelihoodValue,
    log_density,
    log_likelihood,
    loglik_gradient,
    mle_covariance,
    pinv_differential,
    projected_gradient_norm,
    residual_matrix,
    sample_degenerate,
    scaled_loglik,
)

__version__ = "0.1.0"
