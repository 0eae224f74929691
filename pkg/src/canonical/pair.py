"""Canonical vectors of two density matrices.

For spectral ensembles ``Psi1``, ``Psi2`` the overlap matrix
``A = Psi1^dagger Psi2`` has the SVD ``A = U diag(f) V^dagger``. The rotated
ensembles ``R = Psi1 U`` and ``S = Psi2 V`` still generate the two states and
overlap only pairwise: ``<r_m|s_n> = f_m delta_mn``. The fidelity of the two
states is ``sum(f)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Literal, Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.errors import DimensionMismatch, EmptyReduction
from src.gram.block import BlockGram
from src.numerics.linalg import (
    PHASE_EPS,
    RANK_TOL,
    ComplexMatrix,
    matrix_sqrt_psd,
    range_basis,
    svd,
)
from src.states.density import DensityMatrix, Ensemble, UDProblem, spectral_ensemble, validate_density


LOGGER = logging.getLogger(__name__)

PAIRING_TOL = 1e-10


@dataclass(frozen=True)
class CanonicalPair:
    r_vectors: ComplexMatrix
    s_vectors: ComplexMatrix
    f: npt.NDArray[np.float64]
    t: int
    r_norms: npt.NDArray[np.float64]
    s_norms: npt.NDArray[np.float64]

    @property
    def dim(self) -> int:
        return int(self.r_vectors.shape[0])

    @property
    def fidelity(self) -> float:
        return float(np.sum(self.f))

    @property
    def paired_f(self) -> npt.NDArray[np.float64]:
        return self.f[: self.t]

    def paired_triples(self) -> list[Tuple[float, float, float]]:
        """``(r_m, s_m, f_m)`` for every paired index ``m < t``."""
        return [
            (float(self.r_norms[m]), float(self.s_norms[m]), float(self.f[m]))
            for m in range(self.t)
        ]

    def overlaps(self) -> ComplexMatrix:
        return self.r_vectors.conj().T @ self.s_vectors


def _fix_pair_phases(r: ComplexMatrix, s: ComplexMatrix, paired: int) -> None:
    """Make the first significant entry of each ``r`` column real positive.

    Paired ``s`` columns receive the same phase so ``<r_m|s_m>`` is unchanged.
    """
    for col in range(r.shape[1]):
        significant = np.flatnonzero(np.abs(r[:, col]) > PHASE_EPS)
        if significant.size == 0:
            continue
        lead = r[significant[0], col]
        phase = np.conj(lead) / abs(lead)
        r[:, col] *= phase
        if col < paired:
            s[:, col] *= phase
    for col in range(paired, s.shape[1]):
        significant = np.flatnonzero(np.abs(s[:, col]) > PHASE_EPS)
        if significant.size == 0:
            continue
        lead = s[significant[0], col]
        s[:, col] *= np.conj(lead) / abs(lead)


def canonical_pair(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    *,
    rank_tol: float = RANK_TOL,
    pairing_tol: float = PAIRING_TOL,
) -> CanonicalPair:
    """Simultaneous decomposition of two states into canonical vectors.

    Parameters
    ----------
    rho1, rho2:
        Validated density matrices of equal dimension.
    rank_tol:
        Relative eigenvalue cut for the spectral ensembles.
    pairing_tol:
        Singular values above this count as paired; ``t`` is their number.
    """
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"states have dimensions {rho1.dim} and {rho2.dim}")
    psi1 = spectral_ensemble(rho1, rank_tol).vectors
    psi2 = spectral_ensemble(rho2, rank_tol).vectors

    result = svd(psi1.conj().T @ psi2)
    r = psi1 @ result.left
    s = psi2 @ result.right.conj().T
    f = np.asarray(result.singulars, dtype=np.float64)
    t = int(np.count_nonzero(f > pairing_tol))
    _fix_pair_phases(r, s, min(r.shape[1], s.shape[1]))

    r_norms = np.real(np.einsum("ij,ij->j", r.conj(), r))
    s_norms = np.real(np.einsum("ij,ij->j", s.conj(), s))
    LOGGER.debug("Canonical pair: t=%d, f=%s", t, np.array2string(f, precision=6))
    return CanonicalPair(r_vectors=r, s_vectors=s, f=f, t=t, r_norms=r_norms, s_norms=s_norms)


def fidelity(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Fidelity as the sum of canonical singular values."""
    return canonical_pair(rho1, rho2).fidelity


def fidelity_direct(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` evaluated as the trace norm of ``sqrt(rho1) sqrt(rho2)``."""
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"states have dimensions {rho1.dim} and {rho2.dim}")
    product = matrix_sqrt_psd(rho1.mat) @ matrix_sqrt_psd(rho2.mat)
    return float(np.sum(np.linalg.svd(product, compute_uv=False)))


def _unpaired_complement(vectors: ComplexMatrix, t: int) -> ComplexMatrix:
    """``I - Pi`` with ``Pi`` the projector onto the span of the unpaired vectors."""
    dim = vectors.shape[0]
    unpaired = vectors[:, t:]
    if unpaired.shape[1] == 0:
        return np.eye(dim, dtype=np.complex128)
    basis = range_basis(unpaired)
    return np.eye(dim, dtype=np.complex128) - basis @ basis.conj().T


def reduced_vectors(pair: CanonicalPair, *, isolate_unpaired: bool = True) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Paired canonical vectors, optionally projected off the unpaired spans.

    Unpaired vectors of one state are orthogonal to the other state's support.
    Projecting them out of the paired vectors leaves every ``f_m`` unchanged.
    """
    if pair.t == 0:
        raise EmptyReduction("states have orthogonal supports; nothing to reduce")
    r = pair.r_vectors[:, : pair.t]
    s = pair.s_vectors[:, : pair.t]
    if isolate_unpaired:
        r = _unpaired_complement(pair.r_vectors, pair.t) @ r
        s = _unpaired_complement(pair.s_vectors, pair.t) @ s
    return r, s


def reduced_gram(pair: CanonicalPair, *, isolate_unpaired: bool = True) -> BlockGram:
    """The ``2t x 2t`` Gram matrix of the paired canonical vectors, partition ``(t, t)``."""
    r, s = reduced_vectors(pair, isolate_unpaired=isolate_unpaired)
    stacked = np.hstack([r, s])
    gram = stacked.conj().T @ stacked
    return BlockGram.from_matrix(0.5 * (gram + gram.conj().T), [pair.t, pair.t])


def projected_pair(pair: CanonicalPair) -> CanonicalPair:
    """The paired canonical vectors after projecting off the unpaired spans.

    Cross overlaps stay ``f_m delta_mn``; the norms can only shrink, so bounds
    built from this pair are at least as tight as those of ``pair``.
    """
    r, s = reduced_vectors(pair)
    return CanonicalPair(
        r_vectors=r,
        s_vectors=s,
        f=pair.paired_f.copy(),
        t=pair.t,
        r_norms=np.real(np.einsum("ij,ij->j", r.conj(), r)),
        s_norms=np.real(np.einsum("ij,ij->j", s.conj(), s)),
    )


@dataclass(frozen=True)
class TwoStateReduction:
    """Two-state problem restricted to the paired canonical vectors.

    The optimum of the original problem is ``leftover + weight * p`` with ``p``
    the optimum of the normalized reduced ``problem``.
    """

    pair: CanonicalPair
    reduced_pair: Optional[CanonicalPair]
    problem: Optional[UDProblem]
    leftover: float
    norms: Tuple[float, float]
    weight: float


def reduce_two_state_problem(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    eta1: float,
    eta2: float,
    *,
    isolate_unpaired: bool = True,
) -> TwoStateReduction:
    """Split off the perfectly identifiable components of two states."""
    pair = canonical_pair(rho1, rho2)
    if pair.t == 0:
        LOGGER.info("Orthogonal supports: perfect discrimination")
        return TwoStateReduction(
            pair=pair, reduced_pair=None, problem=None, leftover=eta1 + eta2, norms=(0.0, 0.0), weight=0.0
        )

    r, s = reduced_vectors(pair, isolate_unpaired=isolate_unpaired)
    reduced = projected_pair(pair) if isolate_unpaired else None
    n1 = float(np.real(np.sum(np.abs(r) ** 2)))
    n2 = float(np.real(np.sum(np.abs(s) ** 2)))
    weight = eta1 * n1 + eta2 * n2
    leftover = eta1 * (1.0 - n1) + eta2 * (1.0 - n2)

    ens1 = Ensemble(vectors=r / np.sqrt(n1))
    ens2 = Ensemble(vectors=s / np.sqrt(n2))
    states = (validate_density(ens1.density(), tol=1e-9), validate_density(ens2.density(), tol=1e-9))
    priors = [eta1 * n1 / weight]
    priors.append(1.0 - priors[0])
    problem = UDProblem(states=states, priors=tuple(priors), ensembles=(ens1, ens2))
    LOGGER.debug("Reduced problem: t=%d, N1=%.6g, N2=%.6g, leftover=%.6g", pair.t, n1, n2, leftover)
    return TwoStateReduction(
        pair=pair,
        reduced_pair=reduced,
        problem=problem,
        leftover=leftover,
        norms=(n1, n2),
        weight=weight,
    )


def normalized_canonical_operator(pair: CanonicalPair, side: Literal[1, 2]) -> ComplexMatrix:
    """Sum of projectors onto the normalized paired canonical vectors of one state.

    ``Tr(rho2 C1) = sum_m f_m^2 / r_m`` and ``Tr(rho1 C2) = sum_m f_m^2 / s_m``.
    """
    if side == 1:
        vectors, norms = pair.r_vectors[:, : pair.t], pair.r_norms[: pair.t]
    elif side == 2:
        vectors, norms = pair.s_vectors[:, : pair.t], pair.s_norms[: pair.t]
    else:
        raise ValueError(f"side must be 1 or 2, got {side}")
    unit = vectors / np.sqrt(norms)
    return unit @ unit.conj().T
