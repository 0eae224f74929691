"""Dense complex linear algebra kernel.

Thin, validated wrappers around LAPACK (via numpy/scipy) that every other
module goes through. All functions are pure; results are fresh arrays.

Conventions
-----------
``ComplexMatrix``
    A 2-D ``numpy.ndarray`` of dtype ``complex128`` with finite entries.
Phase convention
    Eigen/singular vectors are returned with their first component of modulus
    above ``PHASE_EPS`` made real positive, so repeated calls on the same input
    produce the same vectors.
Rank rule
    An eigenvalue counts towards the numerical rank when it exceeds
    ``tol * max eigenvalue``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import linalg as sla

from src.errors import NoConvergence, NonFinite, NonHermitian, NotPsd


LOGGER = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
RANK_TOL = 1e-10
PHASE_EPS = 1e-12


@dataclass(frozen=True)
class HermEig:
    values: npt.NDArray[np.float64]
    vectors: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        return (self.vectors * self.values) @ self.vectors.conj().T


@dataclass(frozen=True)
class SvdResult:
    left: ComplexMatrix
    singulars: npt.NDArray[np.float64]
    right: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        k = self.singulars.size
        return (self.left[:, :k] * self.singulars) @ self.right[:k, :]


def as_complex_matrix(data: Any, *, name: str = "matrix") -> ComplexMatrix:
    """Coerce ``data`` to a finite complex128 matrix."""
    mat = np.array(data, dtype=np.complex128)
    if mat.ndim == 1:
        mat = mat.reshape(-1, 1)
    if mat.ndim != 2:
        raise NonFinite(f"{name} must be two-dimensional, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NonFinite(f"{name} contains NaN or Inf entries")
    return mat


def hermitian_residual(mat: ComplexMatrix) -> float:
    if mat.shape[0] != mat.shape[1]:
        return float("inf")
    if mat.size == 0:
        return 0.0
    return float(np.max(np.abs(mat - mat.conj().T)))


def ensure_hermitian(mat: Any, *, tol: float = HERMITIAN_TOL, name: str = "matrix") -> ComplexMatrix:
    """Validate ``mat`` as Hermitian and return its exactly symmetrised copy."""
    herm = as_complex_matrix(mat, name=name)
    if herm.shape[0] != herm.shape[1]:
        raise NonHermitian(f"{name} must be square, got shape {herm.shape}")
    scale = max(1.0, float(np.max(np.abs(herm)))) if herm.size else 1.0
    residual = hermitian_residual(herm)
    if residual > tol * scale:
        raise NonHermitian(f"{name} is not Hermitian (max |H - H^dagger| = {residual:.3e})")
    return 0.5 * (herm + herm.conj().T)


def fix_column_phases(vectors: ComplexMatrix) -> tuple[ComplexMatrix, npt.NDArray[np.complex128]]:
    """Rotate each column so its first significant component is real positive.

    Returns the rotated columns and the unit phases that were applied
    (``fixed = vectors * phases``).
    """
    fixed = np.array(vectors, dtype=np.complex128, copy=True)
    phases = np.ones(fixed.shape[1], dtype=np.complex128)
    for col in range(fixed.shape[1]):
        column = fixed[:, col]
        significant = np.flatnonzero(np.abs(column) > PHASE_EPS)
        if significant.size == 0:
            continue
        lead = column[significant[0]]
        phases[col] = np.conj(lead) / abs(lead)
        fixed[:, col] = column * phases[col]
    return fixed, phases


def hermitian_eig(mat: Any, *, tol: float = HERMITIAN_TOL) -> HermEig:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Raises
    ------
    NonFinite
        On NaN/Inf input.
    NonHermitian
        When the symmetry residual exceeds ``tol`` (scaled by the largest entry).
    """
    herm = ensure_hermitian(mat, tol=tol)
    if herm.size == 0:
        return HermEig(values=np.zeros(0), vectors=np.zeros((0, 0), dtype=np.complex128))
    try:
        values, vectors = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    vectors, _ = fix_column_phases(vectors)
    return HermEig(values=np.asarray(values, dtype=np.float64), vectors=vectors)


def svd(mat: Any) -> SvdResult:
    """Full singular value decomposition ``M = left[:, :k] diag(s) right[:k, :]``.

    Singular values are descending. Phases follow the module convention on the
    left vectors; the paired right rows absorb the conjugate phase.
    """
    m = as_complex_matrix(mat)
    rows, cols = m.shape
    if m.size == 0:
        return SvdResult(
            left=np.eye(rows, dtype=np.complex128),
            singulars=np.zeros(0),
            right=np.eye(cols, dtype=np.complex128),
        )
    try:
        left, singulars, right = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc

    left, phases = fix_column_phases(left)
    k = singulars.size
    right = np.array(right, dtype=np.complex128, copy=True)
    right[:k, :] = right[:k, :] * np.conj(phases[:k])[:, None]
    if cols > k:
        tail, _ = fix_column_phases(right[k:, :].conj().T)
        right[k:, :] = tail.conj().T
    return SvdResult(left=left, singulars=np.asarray(singulars, dtype=np.float64), right=right)


def spectral_norm(mat: Any) -> float:
    m = as_complex_matrix(mat)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def numerical_rank(values: npt.ArrayLike, tol: float = RANK_TOL) -> int:
    """Count eigenvalues above ``tol * max eigenvalue``."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        return 0
    top = float(np.max(vals))
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(vals > tol * top))


def min_eigenvalue(mat: Any, *, tol: float = HERMITIAN_TOL) -> float:
    herm = ensure_hermitian(mat, tol=tol)
    if herm.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(herm)[0])


def _check_psd(eig: HermEig, tol: float, name: str) -> None:
    if eig.values.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(eig.values))))
    lowest = float(eig.values[0])
    if lowest < -tol * scale:
        raise NotPsd(f"{name} is not positive semidefinite (min eigenvalue {lowest:.3e})")


def psd_factor(mat: Any, tol: float = PSD_TOL, *, name: str = "matrix") -> ComplexMatrix:
    """Rank-revealing factor ``L`` with ``H = L L^dagger``.

    ``L`` has one column per eigenvalue above ``tol * max eigenvalue``; columns
    are ordered by descending eigenvalue.
    """
    eig = hermitian_eig(mat)
    _check_psd(eig, tol, name)
    n = eig.values.size
    rank = numerical_rank(eig.values, tol)
    if rank == 0:
        return np.zeros((n, 0), dtype=np.complex128)
    keep = slice(n - rank, n)
    values = eig.values[keep][::-1]
    vectors = eig.vectors[:, keep][:, ::-1]
    return vectors * np.sqrt(values)


def matrix_sqrt_psd(mat: Any, tol: float = PSD_TOL) -> ComplexMatrix:
    """Principal square root; eigenvalues below the rank cut are treated as zero."""
    eig = hermitian_eig(mat)
    _check_psd(eig, tol, "matrix")
    values = eig.values.copy()
    if values.size:
        values[values <= RANK_TOL * max(float(values[-1]), 0.0)] = 0.0
    roots = np.sqrt(values)
    root = (eig.vectors * roots) @ eig.vectors.conj().T
    return 0.5 * (root + root.conj().T)


def range_basis(mat: Any, tol: float = RANK_TOL) -> ComplexMatrix:
    """Orthonormal basis of the column space (relative singular-value cut)."""
    result = svd(mat)
    s = result.singulars
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros((result.left.shape[0], 0), dtype=np.complex128)
    rank = int(np.count_nonzero(s > tol * s[0]))
    return result.left[:, :rank]


def complete_orthonormal(columns: ComplexMatrix) -> ComplexMatrix:
    """Extend orthonormal ``columns`` (n x k) to a full n x n unitary."""
    cols = as_complex_matrix(columns)
    n, k = cols.shape
    if k == 0:
        return np.eye(n, dtype=np.complex128)
    if k >= n:
        return cols
    extra = sla.null_space(cols.conj().T)
    extra, _ = fix_column_phases(extra[:, : n - k])
    return np.hstack([cols, extra])


def unitarity_residual(mat: Any) -> float:
    u = as_complex_matrix(mat)
    if u.size == 0:
        return 0.0
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))

