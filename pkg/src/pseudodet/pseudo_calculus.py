"""Pseudo determinant, pseudo inverse and the canonical derivative.

The spectral route (eigenvalues of ``A``) is the primary implementation.
Two independent routes exist for cross-checking it:

* the limit form ``det(A + delta I) / delta**(n - k)`` evaluated with a
  dense LU determinant (:func:`pdet_limit`), and
* sums over the ``k x k`` minors of ``A`` (:func:`pdet_minor`,
  :func:`pinv_berg`, :func:`canonical_gradient_minor`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .exceptions import (
    DeterminantOverflow,
    DimensionMismatch,
    KernelMismatch,
    RankDrift,
)
from .matrix_core import (
    HermitianMatrix,
    MatrixLike,
    RankProfile,
    SpectralDecomposition,
    analyse,
    as_hermitian,
    decompose,
    rank_profile,
    same_kernel,
    _check_cap,
)

DEFAULT_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
KERNEL_TOL = 1e-8
# minors with |det| below this fraction of scale**k contribute nothing
SINGULAR_MINOR_RTOL = 1e-14


@dataclass(frozen=True)
class PdetResult:
    value: float
    rank: int
    method: str


@dataclass(frozen=True, eq=False)
class GradientBundle:
    """Pseudo determinant, pseudo inverse and ``can = det * pinv``."""

    det: float
    pinv: NDArray
    can: NDArray
    rank: int


@dataclass(frozen=True, eq=False)
class DirectionalProbe:
    direction: HermitianMatrix
    step: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "direction", as_hermitian(self.direction))
        if not self.step > 0:
            raise ValueError("step must be positive")


@dataclass(frozen=True, eq=False)
class ClassEquationReport:
    lhs1: NDArray
    rhs1: NDArray
    lhs2: NDArray
    rhs2: NDArray
    residual1: float
    residual2: float
    passed: bool


def _resolve(A: MatrixLike, profile: RankProfile | None, rel_tol: float | None):
    A = as_hermitian(A)
    d = decompose(A)
    if profile is None:
        profile = rank_profile(d, rel_tol)
    return A, d, profile


def _kept(d: SpectralDecomposition, profile: RankProfile):
    idx = list(profile.kept_indices)
    return d.eigenvalues[idx], d.eigenvectors[:, idx]


def pdet(
    A: MatrixLike, profile: RankProfile | None = None, rel_tol: float | None = None
) -> PdetResult:
    """Product of the non-zero eigenvalues of ``A``; 1 for the zero matrix.

    >>> pdet([[1.0, 1.0], [1.0, 1.0]]).value
    2.0
    """
    A, d, profile = _resolve(A, profile, rel_tol)
    lam, _ = _kept(d, profile)
    value = float(np.prod(lam)) if profile.rank else 1.0
    return PdetResult(value, profile.rank, "spectral")


def pdet_limit(
    A: MatrixLike,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    rank: int | None = None,
    rel_tol: float | None = None,
) -> NDArray:
    """Estimates ``det(A + delta I) / delta**(n - k)``, one per ``delta``.

    The determinant comes from an LU factorization (``slogdet``); the power
    of ``delta`` is divided out in log space.  Results are returned
    unaggregated so the approach to the pseudo determinant can be inspected.
    """
    A = as_hermitian(A)
    n = A.n
    if rank is None:
        _, _, profile = analyse(A, rel_tol)
        rank = profile.rank
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0):
        raise ValueError("deltas must be positive")
    out = np.empty(deltas.shape)
    eye = np.eye(n)
    for i, delta in enumerate(deltas):
        sign, logdet = np.linalg.slogdet(A.data + delta * eye)
        if not np.isfinite(logdet):
            raise DeterminantOverflow(f"det(A + {delta:g} I) is singular or non-finite")
        log_value = logdet - (n - rank) * math.log(delta)
        if log_value > np.log(np.finfo(float).max) or log_value < np.log(np.finfo(float).tiny):
            raise DeterminantOverflow(
                f"estimate at delta={delta:g} is out of range (log value {log_value:.1f})"
            )
        out[i] = np.sign(np.real(sign)) * math.exp(log_value)
    return out


def _minor_scale(M: NDArray) -> float:
    return max(float(np.max(np.abs(M))), np.finfo(float).tiny) if M.size else 1.0


def _minor_sums(A: HermitianMatrix, k: int, cap: int | None, with_inverse: bool):
    """Accumulate ``sum |det A_P|^2`` and optionally ``sum |det A_P|^2 embed(A_P^-1)``.

    Minors are visited in lexicographic order of (rows, cols) and summed in
    that fixed order.  The inverse of minor (rows R, cols C) is placed at
    block ``[C, R]``.
    """
    n = A.n
    _check_cap(n, k, cap)
    M = A.data
    dtype = M.dtype
    numer = np.zeros((n, n), dtype=dtype) if with_inverse else None
    if k == 0:
        return 1.0, numer
    skip = SINGULAR_MINOR_RTOL * _minor_scale(M) ** k
    subsets = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
    total = 0.0
    for R in subsets:
        # (m, k, k) stack of A[R, C] for every column set C
        block = M[R][:, subsets].transpose(1, 0, 2)
        dets = np.linalg.det(block)
        weights = np.abs(dets) ** 2
        total += float(np.sum(weights))
        if with_inverse:
            live = np.abs(dets) > skip
            if not np.any(live):
                continue
            inv = np.linalg.inv(block[live]) * weights[live][:, None, None]
            cols = subsets[live]
            np.add.at(numer, (cols[:, :, None], R[None, None, :]), inv)
    return total, numer


def pdet_minor(
    A: MatrixLike,
    profile: RankProfile | None = None,
    rel_tol: float | None = None,
    cap: int | None = None,
) -> float:
    """``|Det(A)|`` as the square root of the sum of squared ``k x k`` minors.

    Squaring loses the sign, so this equals the pseudo determinant only up
    to sign for indefinite matrices.  Complex input uses ``|det|**2``.
    """
    A, _, profile = _resolve(A, profile, rel_tol)
    total, _ = _minor_sums(A, profile.rank, cap, with_inverse=False)
    return math.sqrt(total)


def pinv(
    A: MatrixLike, profile: RankProfile | None = None, rel_tol: float | None = None
) -> NDArray:
    """Moore-Penrose pseudo inverse via inverted non-zero eigenvalues."""
    A, d, profile = _resolve(A, profile, rel_tol)
    lam, U = _kept(d, profile)
    P = (U / lam) @ U.conj().T
    return 0.5 * (P + P.conj().T)


def pinv_berg(
    A: MatrixLike,
    profile: RankProfile | None = None,
    rel_tol: float | None = None,
    cap: int | None = None,
) -> NDArray:
    """Pseudo inverse as a ``|det|**2``-weighted average of minor inverses.

    Minors with (numerically) zero determinant carry no weight and are
    skipped.  Rank 0 gives the zero matrix.
    """
    A, _, profile = _resolve(A, profile, rel_tol)
    total, numer = _minor_sums(A, profile.rank, cap, with_inverse=True)
    if profile.rank == 0:
        return np.zeros_like(A.data)
    return numer / total


def canonical_gradient(
    A: MatrixLike, profile: RankProfile | None = None, rel_tol: float | None = None
) -> GradientBundle:
    """``can(A) = Det(A) * A^+``, the derivative sharing the kernel of ``A``."""
    A, d, profile = _resolve(A, profile, rel_tol)
    det = pdet(A, profile).value
    Ap = pinv(A, profile)
    return GradientBundle(det, Ap, det * Ap, profile.rank)


def canonical_gradient_minor(
    A: MatrixLike,
    profile: RankProfile | None = None,
    rel_tol: float | None = None,
    cap: int | None = None,
) -> NDArray:
    """Minor-sum form of ``can(A)``, normalized by the signed ``Det(A)``."""
    A, _, profile = _resolve(A, profile, rel_tol)
    if profile.rank == 0:
        return np.zeros_like(A.data)
    _, numer = _minor_sums(A, profile.rank, cap, with_inverse=True)
    return numer / pdet(A, profile).value


def _require_kernel(A: HermitianMatrix, B: HermitianMatrix, rel_tol, what: str):
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions differ: {A.n} vs {B.n}")
    if not same_kernel(A, B, KERNEL_TOL, rel_tol):
        raise KernelMismatch(
            f"{what} does not share the kernel of A; the pseudo determinant "
            "is not differentiable in that direction"
        )


def _det_trace(A, B, rel_tol):
    A, d, profile = _resolve(A, None, rel_tol)
    B = as_hermitian(B)
    _require_kernel(A, B, rel_tol, "direction")
    det = pdet(A, profile).value
    Ap = pinv(A, profile)
    return float(det * np.real(np.trace(B.data @ Ap)))


def directional_derivative(A: MatrixLike, B: MatrixLike, rel_tol: float | None = None) -> float:
    """``Det(A) tr(B A^+)``, defined only for ``B`` with ``Ker(B) = Ker(A)``."""
    return _det_trace(A, B, rel_tol)


def pdet_differential(A: MatrixLike, dA: MatrixLike, rel_tol: float | None = None) -> float:
    """Matrix differential ``Det(A) tr(A^+ dA)``; requires ``Ker(dA) = Ker(A)``."""
    return _det_trace(A, dA, rel_tol)


def _pinned_pdet(M: NDArray, rank: int, rel_tol) -> float:
    d = decompose(M)
    found = rank_profile(d, rel_tol).rank
    if found != rank:
        raise RankDrift(
            f"perturbed matrix has rank {found}, expected {rank}; reduce the step"
        )
    return float(np.prod(d.eigenvalues[:rank])) if rank else 1.0


def fd_directional_derivative(
    probe: DirectionalProbe,
    A: MatrixLike,
    forward: bool = False,
    rel_tol: float | None = None,
) -> float:
    """Finite-difference directional derivative of the pseudo determinant.

    Central differences by default, forward differences with
    ``forward=True``.  The perturbed matrices are evaluated at the rank of
    ``A``; :class:`RankDrift` is raised when the step changes the numerical
    rank.
    """
    A, d, profile = _resolve(A, None, rel_tol)
    B = probe.direction
    _require_kernel(A, B, rel_tol, "probe direction")
    tau = probe.step
    k = profile.rank
    plus = _pinned_pdet(A.data + tau * B.data, k, rel_tol)
    if forward:
        base = pdet(A, profile).value
        return (plus - base) / tau
    minus = _pinned_pdet(A.data - tau * B.data, k, rel_tol)
    return (plus - minus) / (2 * tau)


def check_class_equations(
    A: MatrixLike, G, tol: float = 1e-9, rel_tol: float | None = None
) -> ClassEquationReport:
    """Residuals of ``A G = A A^+ Det(A)`` and ``G A = A^+ A Det(A)``."""
    A, d, profile = _resolve(A, None, rel_tol)
    G = np.asarray(G)
    if G.shape != A.data.shape:
        raise DimensionMismatch(f"G has shape {G.shape}, A is {A.data.shape}")
    det = pdet(A, profile).value
    Ap = pinv(A, profile)
    M = A.data
    lhs1, rhs1 = M @ G, det * (M @ Ap)
    lhs2, rhs2 = G @ M, det * (Ap @ M)
    r1 = float(np.linalg.norm(lhs1 - rhs1))
    r2 = float(np.linalg.norm(lhs2 - rhs2))
    return ClassEquationReport(lhs1, rhs1, lhs2, rhs2, r1, r2, max(r1, r2) <= tol)


def verify_uniqueness(A: MatrixLike, G, rel_tol: float | None = None) -> bool:
    """True iff ``G`` solves the class equations and shares the kernel of ``A``.

    Such a ``G`` is necessarily ``can(A)``.
    """
    A = as_hermitian(A)
    G = np.asarray(G)
    if G.shape != A.data.shape:
        raise DimensionMismatch(f"G has shape {G.shape}, A is {A.data.shape}")
    bundle = canonical_gradient(A, rel_tol=rel_tol)
    tol = 1e-9 * max(1.0, float(np.linalg.norm(A.data @ bundle.can)))
    if not check_class_equations(A, G, tol, rel_tol).passed:
        return False
    try:
        Gh = as_hermitian(G)
    except ValueError:
        return False
    return same_kernel(A, Gh, KERNEL_TOL, rel_tol)


def perturb_in_kernel(A: MatrixLike, W, rel_tol: float | None = None) -> NDArray:
    """``can(A) + (I - AA^+) W (I - AA^+)``: another solution of the class equations."""
    A = as_hermitian(A)
    bundle = canonical_gradient(A, rel_tol=rel_tol)
    Q = np.eye(A.n) - A.data @ bundle.pinv
    return bundle.can + Q @ np.asarray(W) @ Q
