"""Dense complex matrix kernel."""

from .linalg import (
    ComplexMatrix,
    HermEig,
    SvdResult,
    as_complex_matrix,
    hermitian_eig,
    matrix_sqrt_psd,
    min_eigenvalue,
    psd_factor,
    svd,
)

__all__ = [
    "ComplexMatrix",
    "HermEig",
    "SvdResult",
    "as_complex_matrix",
    "hermitian_eig",
    "matrix_sqrt_psd",
    "min_eigenvalue",
    "psd_factor",
    "svd",
]
