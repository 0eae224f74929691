"""Supports of density matrices and their intersections."""

from __future__ import annotations

import numpy as np

from src.errors import DimensionMismatch
from src.numerics.linalg import RANK_TOL, ComplexMatrix, hermitian_eig, numerical_rank, svd
from src.states.density import DensityMatrix


INTERSECTION_TOL = 1e-8


def support_basis(rho: DensityMatrix, rank_tol: float = RANK_TOL) -> ComplexMatrix:
    eig = hermitian_eig(rho.mat)
    n = eig.values.size
    rank = numerical_rank(eig.values, rank_tol)
    return eig.vectors[:, n - rank :]


def support_projector(rho: DensityMatrix, rank_tol: float = RANK_TOL) -> ComplexMatrix:
    basis = support_basis(rho, rank_tol)
    return basis @ basis.conj().T


def intersection_basis(
    rho1: DensityMatrix, rho2: DensityMatrix, *, tol: float = INTERSECTION_TOL
) -> ComplexMatrix:
    """Orthonormal basis of supp(rho1) ∩ supp(rho2).

    Principal angles between the supports are the singular values of
    ``B1^dagger B2``; a cosine of 1 marks a shared direction.
    """
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"states have dimensions {rho1.dim} and {rho2.dim}")
    b1 = support_basis(rho1)
    b2 = support_basis(rho2)
    if b1.shape[1] == 0 or b2.shape[1] == 0:
        return np.zeros((rho1.dim, 0), dtype=np.complex128)
    result = svd(b1.conj().T @ b2)
    shared = int(np.count_nonzero(result.singulars >= 1.0 - tol))
    return b1 @ result.left[:, :shared]


def support_intersection_dim(
    rho1: DensityMatrix, rho2: DensityMatrix, *, tol: float = INTERSECTION_TOL
) -> int:
    """Count singular values of ``Pi1 Pi2`` equal to one within ``tol``."""
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"states have dimensions {rho1.dim} and {rho2.dim}")
    product = support_projector(rho1) @ support_projector(rho2)
    singulars = svd(product).singulars
    return int(np.count_nonzero(singulars >= 1.0 - tol))
