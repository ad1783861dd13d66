"""Degenerate multivariate normal with singular covariance.

The density lives on the affine subspace ``mean + range(cov)``:

.. math::
    f(x) = \\mathrm{Det}(2\\pi\\Sigma)^{-1/2}
           \\exp\\left(-\\tfrac12 (x-\\mu)^T \\Sigma^+ (x-\\mu)\\right)

with :math:`\\mathrm{Det}(2\\pi\\Sigma) = (2\\pi)^k \\mathrm{Det}(\\Sigma)` for
rank :math:`k`.  Points off the support have density zero.

The likelihood functions use the scaled objective

.. math::
    \\ell(\\Sigma) = -N \\log \\mathrm{Det}(\\Sigma) - \\mathrm{tr}(\\Sigma^+ R),
    \\qquad R = \\sum_i (x_i - \\mu)(x_i - \\mu)^T,

which has the same stationary points as the true log-likelihood.  The mean
is always treated as known.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    DimensionMismatch,
    EmptyDataset,
    InvalidProjector,
    NotPSD,
)
from .matrix_core import (
    MatrixLike,
    analyse,
    as_hermitian,
    decompose,
    rank_profile,
)

SUPPORT_TOL = 1e-8
PSD_RTOL = 1e-10
PROJECTOR_TOL = 1e-8
LOG_2PI = math.log(2 * math.pi)


class LogLikelihoodValue(NamedTuple):
    value: float
    on_support: bool


class GaussianModel:
    """Mean and (possibly singular) covariance with cached spectral quantities.

    Parameters
    ----------
    mean : array_like, shape (n,)
    cov : array_like, shape (n, n)
        Real symmetric positive semi-definite.  Raises :class:`NotPSD` when the
        smallest eigenvalue is below ``-1e-10 * max eigenvalue``.
    rel_tol : float, optional
        Relative eigenvalue cutoff for the rank decision.
    """

    def __init__(self, mean: ArrayLike, cov: MatrixLike, rel_tol: float | None = None):
        cov = as_hermitian(cov)
        if cov.is_complex:
            raise ValueError("covariance must be real")
        mean = np.asarray(mean, dtype=float).reshape(-1)
        if mean.shape[0] != cov.n:
            raise DimensionMismatch(
                f"mean has dimension {mean.shape[0]}, covariance is {cov.n} x {cov.n}"
            )
        d = decompose(cov)
        lam = d.eigenvalues
        if lam.size and lam.min() < -PSD_RTOL * max(lam.max(), 0.0):
            raise NotPSD(f"covariance has eigenvalue {lam.min():.3e} < 0")
        profile = rank_profile(d, rel_tol)
        # tiny negative eigenvalues tolerated by the PSD check count as zero
        kept = [i for i in profile.kept_indices if lam[i] > 0]
        k = len(kept)
        Uk = d.eigenvectors[:, kept]
        lam_k = lam[kept]

        mean.setflags(write=False)
        self.mean = mean
        self.cov = cov
        self.rel_tol = rel_tol
        self.rank = k
        self.basis = Uk
        self.scales = np.sqrt(np.clip(lam_k, 0.0, None))
        self.pinv = (Uk / lam_k) @ Uk.T if k else np.zeros((cov.n, cov.n))
        self.projector = Uk @ Uk.T
        self.det = float(np.prod(lam_k)) if k else 1.0
        self.log_det = float(np.sum(np.log(lam_k)))

    @property
    def n(self) -> int:
        return self.cov.n

    def __repr__(self):
        return f"GaussianModel(n={self.n}, rank={self.rank})"

    def off_support_distance(self, x: NDArray) -> NDArray:
        """``||(I - P)(x - mean)||`` for each row of ``x``."""
        r = np.atleast_2d(x) - self.mean
        return np.linalg.norm(r - r @ self.projector, axis=1)


def _as_vector(x, n: int, name: str) -> NDArray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != n:
        raise DimensionMismatch(f"{name} has dimension {x.shape[0]}, expected {n}")
    return x


def as_samples(data: ArrayLike, n: int | None = None) -> NDArray:
    """Validate a dataset as an ``(N, n)`` float array with ``N >= 1``."""
    X = np.asarray(data, dtype=float)
    if X.ndim == 1 and X.size:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyDataset(f"dataset must hold at least one sample, got shape {X.shape}")
    if n is not None and X.shape[1] != n:
        raise DimensionMismatch(f"samples have dimension {X.shape[1]}, expected {n}")
    return X


def log_density(x: ArrayLike, model: GaussianModel, support_tol: float = SUPPORT_TOL) -> LogLikelihoodValue:
    x = _as_vector(x, model.n, "x")
    r = x - model.mean
    off = float(model.off_support_distance(x)[0])
    if off > support_tol * (1.0 + float(np.linalg.norm(r))):
        return LogLikelihoodValue(-math.inf, False)
    quad = float(r @ model.pinv @ r)
    value = -0.5 * (model.rank * LOG_2PI + model.log_det) - 0.5 * quad
    return LogLikelihoodValue(value, True)


def residual_matrix(data: ArrayLike, mu: ArrayLike) -> NDArray:
    """``R = sum_i (x_i - mu)(x_i - mu)^T``."""
    X = as_samples(data)
    mu = _as_vector(mu, X.shape[1], "mean")
    D = X - mu
    R = D.T @ D
    return 0.5 * (R + R.T)


def scaled_loglik(sigma: MatrixLike, R: ArrayLike, N: int, rank: int | None = None,
                  rel_tol: float | None = None) -> float:
    """``-N log Det(sigma) - tr(sigma^+ R)`` with no support check.

    ``rank`` pins the number of eigenvalues treated as non-zero, which keeps
    finite-difference evaluations on the same rank stratum.
    """
    S, d, profile = analyse(sigma, rel_tol)
    k = profile.rank if rank is None else rank
    lam = d.eigenvalues[:k]
    U = d.eigenvectors[:, :k]
    Sp = (U / lam) @ U.conj().T
    return float(-N * np.sum(np.log(lam)) - np.real(np.trace(Sp @ np.asarray(R))))


def log_likelihood(data: ArrayLike, model: GaussianModel,
                   support_tol: float = SUPPORT_TOL) -> LogLikelihoodValue:
    """Scaled log-likelihood; ``-inf`` when any sample lies off the support."""
    X = as_samples(data, model.n)
    D = X - model.mean
    off = model.off_support_distance(X)
    if np.any(off > support_tol * (1.0 + np.linalg.norm(D, axis=1))):
        return LogLikelihoodValue(-math.inf, False)
    R = D.T @ D
    value = -X.shape[0] * model.log_det - float(np.trace(model.pinv @ R))
    return LogLikelihoodValue(value, True)


def _pinv_and_projectors(sigma: MatrixLike, rel_tol):
    S, d, profile = analyse(sigma, rel_tol)
    k = profile.rank
    U = d.eigenvectors[:, :k]
    Sp = (U / d.eigenvalues[:k]) @ U.conj().T
    I = np.eye(S.n)
    return S.data, Sp, I - S.data @ Sp, I - Sp @ S.data


def pinv_differential(sigma: MatrixLike, dsigma: MatrixLike, rel_tol: float | None = None) -> NDArray:
    """Differential of the pseudo inverse along ``dsigma`` (constant rank).

    ``-S+ dS S+ + S+ S+ dS (I - S S+) + (I - S+ S) dS S+ S+``
    """
    S, Sp, Qr, Ql = _pinv_and_projectors(sigma, rel_tol)
    dS = as_hermitian(dsigma).data
    if dS.shape != S.shape:
        raise DimensionMismatch(f"dsigma has shape {dS.shape}, sigma is {S.shape}")
    return -Sp @ dS @ Sp + Sp @ Sp @ dS @ Qr + Ql @ dS @ Sp @ Sp


def loglik_gradient(sigma: MatrixLike, R: ArrayLike, N: int, rel_tol: float | None = None) -> NDArray:
    """Gradient ``G`` of the scaled log-likelihood, so that ``dl = tr(G dsigma)``.

    ``G = -N S+ + S+ R S+ - (I - S S+) R S+ S+ - S+ S+ R (I - S+ S)``
    """
    S, Sp, Qr, Ql = _pinv_and_projectors(sigma, rel_tol)
    R = np.asarray(R, dtype=float)
    if R.shape != S.shape:
        raise DimensionMismatch(f"R has shape {R.shape}, sigma is {S.shape}")
    return -N * Sp + Sp @ R @ Sp - Qr @ R @ Sp @ Sp - Sp @ Sp @ R @ Ql


def check_projector(P: ArrayLike) -> NDArray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InvalidProjector(f"projector must be square, got shape {P.shape}")
    idem = float(np.linalg.norm(P @ P - P))
    asym = float(np.linalg.norm(P - P.T))
    if idem > PROJECTOR_TOL or asym > PROJECTOR_TOL:
        raise InvalidProjector(
            f"not an orthogonal projector: ||P^2 - P|| = {idem:.3e}, ||P - P^T|| = {asym:.3e}"
        )
    return P


def mle_covariance(data: ArrayLike, mu: ArrayLike, projector: ArrayLike | None = None) -> NDArray:
    """Maximum-likelihood covariance for known mean.

    Without ``projector`` the kernel of the estimate is taken from the data,
    giving ``R / N``.  With a fixed range projector ``P`` the estimate is
    ``P (R / N) P``.
    """
    X = as_samples(data)
    R = residual_matrix(X, mu)
    S = R / X.shape[0]
    if projector is None:
        return S
    P = check_projector(projector)
    if P.shape != S.shape:
        raise DimensionMismatch(f"projector is {P.shape}, data dimension {S.shape[0]}")
    out = P @ S @ P
    return 0.5 * (out + out.T)


def projected_gradient_norm(sigma: MatrixLike, R: ArrayLike, N: int, rel_tol: float | None = None) -> float:
    """``||P G P||_F`` with ``P`` the range projector of ``sigma``."""
    S, Sp, _, _ = _pinv_and_projectors(sigma, rel_tol)
    P = S @ Sp
    return float(np.linalg.norm(P @ loglik_gradient(sigma, R, N, rel_tol) @ P))


def sample_degenerate(model: GaussianModel, count: int, seed: int | None = None) -> NDArray:
    """Draw ``count`` samples ``mean + U_k diag(sqrt(lam_k)) z``.

    Identical ``(model, count, seed)`` give bit-identical output.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, model.rank))
    return model.mean + (z * model.scales) @ model.basis.T
