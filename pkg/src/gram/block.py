"""Block Gram matrices of state ensembles.

Rows and columns are ordered by state index ``k`` then ensemble index ``m``;
``blocks`` holds the per-state sizes ``(n_1, ..., n_N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Any, List, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from src.errors import DimensionMismatch, NotPsd, NotUnitary, PartitionMismatch
from src.numerics.linalg import (
    PSD_TOL,
    ComplexMatrix,
    as_complex_matrix,
    ensure_hermitian,
    min_eigenvalue,
    spectral_norm,
    unitarity_residual,
)
from src.states.density import Ensemble


LOGGER = logging.getLogger(__name__)

UNITARY_TOL = 1e-10


def _offsets(blocks: Sequence[int]) -> List[int]:
    return [0, *np.cumsum(blocks).tolist()]


@dataclass(frozen=True)
class BlockGram:
    blocks: Tuple[int, ...]
    mat: ComplexMatrix

    @classmethod
    def from_matrix(cls, mat: Any, blocks: Sequence[int], *, psd_tol: float = PSD_TOL) -> "BlockGram":
        herm = ensure_hermitian(mat, name="block Gram matrix")
        sizes = tuple(int(n) for n in blocks)
        if any(n < 0 for n in sizes) or sum(sizes) != herm.shape[0]:
            raise PartitionMismatch(
                f"partition {list(sizes)} does not match matrix size {herm.shape[0]}"
            )
        scale = max(1.0, spectral_norm(herm))
        lowest = min_eigenvalue(herm)
        if lowest < -psd_tol * scale:
            raise NotPsd(f"block Gram matrix has min eigenvalue {lowest:.3e}")
        return cls(blocks=sizes, mat=herm)

    @property
    def size(self) -> int:
        return int(self.mat.shape[0])

    @property
    def offsets(self) -> List[int]:
        return _offsets(self.blocks)

    def block(self, k: int, l: int) -> ComplexMatrix:
        off = self.offsets
        return self.mat[off[k] : off[k + 1], off[l] : off[l + 1]]

    def diagonal_blocks(self) -> List[ComplexMatrix]:
        return [self.block(k, k) for k in range(len(self.blocks))]

    def block_traces(self) -> List[float]:
        return [float(np.real(np.trace(b))) for b in self.diagonal_blocks()]


@dataclass(frozen=True)
class QuasiDiagonal:
    """Block-diagonal matrix stored as its diagonal blocks ``Y_kk``."""

    blocks: Tuple[ComplexMatrix, ...]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Any]) -> "QuasiDiagonal":
        mats = []
        for k, blk in enumerate(blocks):
            mat = as_complex_matrix(blk, name=f"block {k}")
            if mat.shape[0] != mat.shape[1]:
                raise PartitionMismatch(f"block {k} is not square: shape {mat.shape}")
            mats.append(mat)
        return cls(blocks=tuple(mats))

    @classmethod
    def zeros(cls, partition: Sequence[int]) -> "QuasiDiagonal":
        return cls(blocks=tuple(np.zeros((n, n), dtype=np.complex128) for n in partition))

    @classmethod
    def from_matrix(cls, mat: Any, partition: Sequence[int]) -> "QuasiDiagonal":
        full = as_complex_matrix(mat)
        off = _offsets(partition)
        return cls(blocks=tuple(full[off[k] : off[k + 1], off[k] : off[k + 1]].copy() for k in range(len(partition))))

    @property
    def partition(self) -> Tuple[int, ...]:
        return tuple(int(b.shape[0]) for b in self.blocks)

    def as_matrix(self) -> ComplexMatrix:
        if not self.blocks:
            return np.zeros((0, 0), dtype=np.complex128)
        return np.asarray(block_diag(*self.blocks), dtype=np.complex128)

    def traces(self) -> List[float]:
        return [float(np.real(np.trace(b))) for b in self.blocks]

    def min_block_eigenvalues(self) -> List[float]:
        return [min_eigenvalue(b) if b.size else 0.0 for b in self.blocks]


def build_block_gram(ensembles: Sequence[Ensemble]) -> BlockGram:
    """Gram matrix of all ensemble vectors, ``X[(k,m),(l,n)] = <psi_m^k|psi_n^l>``."""
    if not ensembles:
        raise DimensionMismatch("at least one ensemble is required")
    dims = {ens.dim for ens in ensembles}
    if len(dims) != 1:
        raise DimensionMismatch(f"ensembles have different ambient dimensions {sorted(dims)}")
    stacked = np.hstack([ens.vectors for ens in ensembles])
    gram = stacked.conj().T @ stacked
    return BlockGram.from_matrix(0.5 * (gram + gram.conj().T), [ens.count for ens in ensembles])


def apply_unitary_freedom(x: BlockGram, rotations: Sequence[Any]) -> BlockGram:
    """Rotate each ensemble: block ``(k, l)`` becomes ``U_k X_kl U_l^dagger``."""
    if len(rotations) != len(x.blocks):
        raise DimensionMismatch(f"expected {len(x.blocks)} rotations, got {len(rotations)}")
    mats = []
    for k, (rot, n) in enumerate(zip(rotations, x.blocks)):
        u = as_complex_matrix(rot, name=f"rotation {k}")
        if u.shape != (n, n):
            raise DimensionMismatch(f"rotation {k} must be {n}x{n}, got {u.shape}")
        err = unitarity_residual(u)
        if err > UNITARY_TOL or unitarity_residual(u.conj().T) > UNITARY_TOL:
            raise NotUnitary(f"rotation {k} is not unitary (residual {err:.3e})")
        mats.append(u)
    d = np.asarray(block_diag(*mats), dtype=np.complex128)
    rotated = d @ x.mat @ d.conj().T
    return BlockGram(blocks=x.blocks, mat=0.5 * (rotated + rotated.conj().T))


def check_partition(x: BlockGram, y: QuasiDiagonal) -> None:
    if tuple(y.partition) != tuple(x.blocks):
        raise PartitionMismatch(
            f"quasi-diagonal partition {list(y.partition)} does not match {list(x.blocks)}"
        )


def residual(x: BlockGram, y: QuasiDiagonal) -> ComplexMatrix:
    """Failure Gram ``B = X - diag(Y_11, ..., Y_NN)``."""
    check_partition(x, y)
    return x.mat - y.as_matrix()
