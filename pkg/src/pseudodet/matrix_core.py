"""Dense Hermitian matrices, their spectra, numerical rank and minors.

Everything else in the package is written against the handful of types
defined here.  Matrices are stored as plain numpy arrays (``float64`` when
the input is real, ``complex128`` otherwise) wrapped in a read-only
:class:`HermitianMatrix` so that validation happens exactly once.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    CapExceeded,
    ConvergenceFailure,
    DimensionMismatch,
    NonSquare,
    NotHermitian,
)

HERMITIAN_RTOL = 1e-10
DEFAULT_MINOR_CAP = 12
MINOR_CAP_ENV = "PSEUDODET_MINOR_CAP"


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """A validated, immutable n x n Hermitian matrix.

    Build instances with :func:`build_hermitian`; the constructor trusts its
    input.  The wrapper converts transparently with ``np.asarray``.
    """

    data: NDArray

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    def __repr__(self) -> str:
        return f"HermitianMatrix(n={self.n}, dtype={self.data.dtype})"


MatrixLike = Union[HermitianMatrix, ArrayLike]


def hermitian_tol(M: NDArray) -> float:
    """Absolute tolerance on ``max|M - M*|`` used to accept a matrix."""
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    return HERMITIAN_RTOL * max(scale, 1.0)


def build_hermitian(raw: ArrayLike, policy: str = "reject") -> HermitianMatrix:
    """Validate ``raw`` and return it as a :class:`HermitianMatrix`.

    Parameters
    ----------
    raw : array_like, shape (n, n)
        Real or complex square matrix.
    policy : {"reject", "symmetrize"}
        ``"reject"`` raises :class:`NotHermitian` when ``raw`` deviates from
        its conjugate transpose by more than :func:`hermitian_tol`;
        ``"symmetrize"`` silently replaces ``raw`` by ``(raw + raw*) / 2``.
        Accepted matrices are symmetrized in both cases, which zeroes the
        imaginary part of the diagonal.
    """
    if policy not in ("reject", "symmetrize"):
        raise ValueError(f"unknown policy {policy!r}")
    M = np.array(raw, copy=True)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")
    if np.iscomplexobj(M):
        M = M.astype(np.complex128)
        if not np.any(M.imag):
            M = M.real.copy()
    else:
        M = M.astype(np.float64)
    if not np.all(np.isfinite(M)):
        raise NotHermitian(float("inf"), hermitian_tol(np.nan_to_num(M)))

    MH = M.conj().T
    if policy == "reject":
        deviation = float(np.max(np.abs(M - MH))) if M.size else 0.0
        tol = hermitian_tol(M)
        if deviation > tol:
            raise NotHermitian(deviation, tol)
    M = 0.5 * (M + MH)
    M.setflags(write=False)
    return HermitianMatrix(M)


def as_hermitian(A: MatrixLike) -> HermitianMatrix:
    if isinstance(A, HermitianMatrix):
        return A
    return build_hermitian(A, "reject")


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs ordered by decreasing ``|eigenvalue|``.

    ``eigenvectors[:, j]`` belongs to ``eigenvalues[j]``.  Eigenvector
    phases are whatever LAPACK returns.
    """

    eigenvalues: NDArray
    eigenvectors: NDArray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> NDArray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def decompose(A: MatrixLike) -> SpectralDecomposition:
    A = as_hermitian(A)
    try:
        w, U = np.linalg.eigh(A.data)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(-np.abs(w), kind="stable")
    w = w[order]
    U = U[:, order]
    w.setflags(write=False)
    U.setflags(write=False)
    return SpectralDecomposition(w, U)


@dataclass(frozen=True)
class RankProfile:
    rank: int
    tolerance: float
    kept_indices: tuple


def default_rel_tol(n: int) -> float:
    return 1e-12 * max(n, 1)


def rank_profile(d: SpectralDecomposition, rel_tol: float | None = None) -> RankProfile:
    """Numerical rank: eigenvalues with ``|lam| > rel_tol * max|lam|`` are kept.

    The cutoff has an absolute floor of 1e-300 so that the zero matrix has
    rank 0.
    """
    if rel_tol is None:
        rel_tol = default_rel_tol(d.n)
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    mags = np.abs(d.eigenvalues)
    top = float(mags.max()) if mags.size else 0.0
    cutoff = max(rel_tol * top, 1e-300)
    kept = tuple(int(i) for i in np.flatnonzero(mags > cutoff))
    return RankProfile(len(kept), cutoff, kept)


def analyse(A: MatrixLike, rel_tol: float | None = None):
    """Return ``(A, decomposition, profile)`` with ``A`` validated."""
    A = as_hermitian(A)
    d = decompose(A)
    return A, d, rank_profile(d, rel_tol)


class MinorIndex(NamedTuple):
    rows: tuple
    cols: tuple


def minor_cap() -> int:
    """Largest dimension for which minors are enumerated by default.

    Overridden by the ``PSEUDODET_MINOR_CAP`` environment variable.
    """
    value = os.environ.get(MINOR_CAP_ENV)
    if value is None or value.strip() == "":
        return DEFAULT_MINOR_CAP
    return int(value)


def _check_cap(n: int, k: int, cap: int | None) -> None:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if cap is None:
        cap = minor_cap()
    if n > cap:
        raise CapExceeded(n, k, math.comb(n, k) ** 2, cap)


def iter_minors(n: int, k: int, cap: int | None = None) -> Iterator[MinorIndex]:
    """Lazily yield every (row-set, column-set) pair of size ``k``.

    Pairs come out in lexicographic order of ``(rows, cols)``.
    """
    _check_cap(n, k, cap)
    subsets = list(itertools.combinations(range(n), k))
    for rows in subsets:
        for cols in subsets:
            yield MinorIndex(rows, cols)


def enumerate_minors(n: int, k: int, cap: int | None = None) -> list[MinorIndex]:
    return list(iter_minors(n, k, cap))


def range_projector(A: MatrixLike, rel_tol: float | None = None) -> NDArray:
    """Orthogonal projector ``A A^+`` onto the range of ``A``."""
    _, d, profile = analyse(A, rel_tol)
    Uk = d.eigenvectors[:, : profile.rank]
    P = Uk @ Uk.conj().T
    return 0.5 * (P + P.conj().T)


def same_kernel(
    A: MatrixLike, B: MatrixLike, tol: float = 1e-8, rel_tol: float | None = None
) -> bool:
    """True when ``A`` and ``B`` have the same kernel.

    For Hermitian matrices equal kernels means equal range projectors, which
    avoids comparing null-space bases.
    """
    A = as_hermitian(A)
    B = as_hermitian(B)
    if A.n != B.n:
        raise DimensionMismatch(f"dimensions differ: {A.n} vs {B.n}")
    diff = range_projector(A, rel_tol) - range_projector(B, rel_tol)
    return bool(np.linalg.norm(diff) <= tol)
