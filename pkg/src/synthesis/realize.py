"""Unitary realization of an unambiguous discrimination strategy.

Given feasible ``(X, Y)`` the success vectors ``phi`` factor ``Y`` and the
failure vectors ``beta`` factor ``B = X - Y``. Both live in one extended space
``C^d (x) C^a`` flattened to ``C^(d a)``::

    [ success sector: state 1 | state 2 | ... ][ failure sector ][ unused ]

State ``k`` owns its own block of success coordinates, so success vectors of
different states are orthogonal. The unitary ``U`` maps every input vector
``psi (x) e_0`` to ``phi + beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import InfeasiblePair, NotPsd, PartitionMismatch
from src.gram.block import BlockGram, QuasiDiagonal, check_partition, residual
from src.numerics.linalg import (
    ComplexMatrix,
    complete_orthonormal,
    psd_factor,
    svd,
    unitarity_residual,
)
from src.sdp.problem import feasibility
from src.states.density import Ensemble


LOGGER = logging.getLogger(__name__)

REALIZATION_TOL = 1e-8
ISOMETRY_RANK_TOL = 1e-10
FACTOR_TOL = 1e-11


@dataclass(frozen=True)
class Realization:
    x: BlockGram
    y: QuasiDiagonal
    input_vectors: ComplexMatrix
    phi_vectors: ComplexMatrix
    beta_vectors: ComplexMatrix
    unitary: ComplexMatrix
    success_ranks: Tuple[int, ...]
    ancilla_dim: int

    @property
    def input_dim(self) -> int:
        return int(self.input_vectors.shape[0])

    @property
    def success_dim(self) -> int:
        return int(self.phi_vectors.shape[0])

    @property
    def failure_dim(self) -> int:
        return int(self.beta_vectors.shape[0])

    @property
    def extended_dim(self) -> int:
        return self.input_dim * self.ancilla_dim

    def success_rows(self, k: int) -> slice:
        start = int(sum(self.success_ranks[:k]))
        return slice(start, start + self.success_ranks[k])

    def embedding(self) -> ComplexMatrix:
        """``J`` with ``J psi = psi (x) e_0`` in the flattened extended space."""
        j = np.zeros((self.extended_dim, self.input_dim), dtype=np.complex128)
        j[np.arange(self.input_dim) * self.ancilla_dim, np.arange(self.input_dim)] = 1.0
        return j

    def output_vectors(self) -> ComplexMatrix:
        out = np.zeros((self.extended_dim, self.x.size), dtype=np.complex128)
        out[: self.success_dim, :] = self.phi_vectors
        out[self.success_dim : self.success_dim + self.failure_dim, :] = self.beta_vectors
        return out

    def phi_for_state(self, k: int) -> ComplexMatrix:
        off = self.x.offsets
        return self.phi_vectors[:, off[k] : off[k + 1]]


@dataclass(frozen=True)
class RealizationReport:
    residuals: Dict[str, float]
    tolerance: float = REALIZATION_TOL

    @property
    def passed(self) -> bool:
        return all(value <= self.tolerance for value in self.residuals.values())

    def failures(self) -> List[str]:
        return [name for name, value in self.residuals.items() if value > self.tolerance]


def _factor(mat: ComplexMatrix, name: str) -> ComplexMatrix:
    """Vectors (columns) whose Gram matrix is ``mat``."""
    try:
        return psd_factor(mat, FACTOR_TOL, name=name).conj().T
    except NotPsd as exc:
        raise InfeasiblePair(str(exc)) from exc


def _polar(mat: ComplexMatrix) -> ComplexMatrix:
    result = svd(mat)
    k = result.singulars.size
    return result.left[:, :k] @ result.right[:k, :]


def _isometry_unitary(source: ComplexMatrix, target: ComplexMatrix) -> ComplexMatrix:
    """Unitary ``U`` with ``U source = target`` for column sets of equal Gram matrix."""
    result = svd(source)
    s = result.singulars
    rank = int(np.count_nonzero(s > ISOMETRY_RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    n = source.shape[0]
    if rank == 0:
        return np.eye(n, dtype=np.complex128)
    left = result.left[:, :rank]
    right = result.right[:rank, :].conj().T
    image = _polar(target @ right / s[:rank])
    return complete_orthonormal(image) @ complete_orthonormal(left).conj().T


def realize(x: BlockGram, y: QuasiDiagonal, ensembles: Sequence[Ensemble]) -> Realization:
    """Build success/failure vectors and the dilation unitary for a feasible ``Y``."""
    check_partition(x, y)
    if [ens.count for ens in ensembles] != list(x.blocks):
        raise PartitionMismatch("ensemble sizes do not match the Gram partition")
    check = feasibility(x, y)
    if not check.feasible:
        raise InfeasiblePair(f"(X, Y) is not feasible: min eigenvalue {check.min_eig:.3e}")

    phi_blocks = [_factor(block, f"Y_{k}{k}") for k, block in enumerate(y.blocks)]
    ranks = tuple(int(block.shape[0]) for block in phi_blocks)
    success_dim = sum(ranks)
    phi = np.zeros((success_dim, x.size), dtype=np.complex128)
    row, off = 0, x.offsets
    for k, block in enumerate(phi_blocks):
        phi[row : row + ranks[k], off[k] : off[k + 1]] = block
        row += ranks[k]
    beta = _factor(residual(x, y), "X - Y")

    inputs = np.hstack([ens.vectors for ens in ensembles])
    dim = inputs.shape[0]
    ancilla = max(1, math.ceil((success_dim + beta.shape[0]) / dim))
    real = Realization(
        x=x,
        y=y,
        input_vectors=inputs,
        phi_vectors=phi,
        beta_vectors=beta,
        unitary=np.eye(dim * ancilla, dtype=np.complex128),
        success_ranks=ranks,
        ancilla_dim=ancilla,
    )
    unitary = _isometry_unitary(real.embedding() @ inputs, real.output_vectors())
    LOGGER.debug(
        "Realization: input dim %d, ancilla %d, success dim %d, failure dim %d",
        dim,
        ancilla,
        success_dim,
        beta.shape[0],
    )
    return Realization(
        x=x,
        y=y,
        input_vectors=inputs,
        phi_vectors=phi,
        beta_vectors=beta,
        unitary=unitary,
        success_ranks=ranks,
        ancilla_dim=ancilla,
    )


def verify_outputs(real: Realization, *, tol: float = REALIZATION_TOL) -> RealizationReport:
    """Residuals of every defining property of a realization."""
    blocks = len(real.x.blocks)
    phi, beta = real.phi_vectors, real.beta_vectors

    success_gram = max(
        (
            float(np.max(np.abs(real.phi_for_state(k).conj().T @ real.phi_for_state(k) - real.y.blocks[k])))
            for k in range(blocks)
            if real.x.blocks[k]
        ),
        default=0.0,
    )
    cross = 0.0
    for k in range(blocks):
        for l in range(k + 1, blocks):
            overlap = real.phi_for_state(k).conj().T @ real.phi_for_state(l)
            if overlap.size:
                cross = max(cross, float(np.max(np.abs(overlap))))
    failure_gram = float(np.max(np.abs(beta.conj().T @ beta - residual(real.x, real.y))))
    total_gram = float(np.max(np.abs(phi.conj().T @ phi + beta.conj().T @ beta - real.x.mat)))
    mapped = real.unitary @ real.embedding() @ real.input_vectors
    mapping = float(np.max(np.abs(mapped - real.output_vectors())))
    residuals = {
        "success_gram": success_gram,
        "failure_gram": failure_gram,
        "gram_reconstruction": total_gram,
        "cross_state_overlap": cross,
        "unitarity": unitarity_residual(real.unitary),
        "mapping": mapping,
    }
    report = RealizationReport(residuals=residuals, tolerance=tol)
    if not report.passed:
        LOGGER.warning("Realization check failed: %s", ", ".join(report.failures()))
    return report
