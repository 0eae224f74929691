"""Density matrices, ensembles and discrimination problems."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    DimensionMismatch,
    InvalidPriors,
    NonHermitian,
    NotPsd,
    TraceNotOne,
    ValidationError,
)
from src.numerics.linalg import (
    HERMITIAN_TOL,
    RANK_TOL,
    ComplexMatrix,
    as_complex_matrix,
    hermitian_eig,
    hermitian_residual,
    numerical_rank,
)


LOGGER = logging.getLogger(__name__)

DENSITY_TOL = 1e-10
ENSEMBLE_TOL = 1e-9
PRIOR_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    mat: ComplexMatrix

    @property
    def dim(self) -> int:
        return int(self.mat.shape[0])

    def rank(self, tol: float = RANK_TOL) -> int:
        return numerical_rank(hermitian_eig(self.mat).values, tol)


@dataclass(frozen=True)
class Ensemble:
    """Nonnormalized pure-state vectors stored as the columns of ``vectors``."""

    vectors: ComplexMatrix

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def count(self) -> int:
        return int(self.vectors.shape[1])

    def density(self) -> ComplexMatrix:
        return self.vectors @ self.vectors.conj().T

    def gram(self) -> ComplexMatrix:
        return self.vectors.conj().T @ self.vectors

    @classmethod
    def from_vectors(cls, vectors: Sequence[Any], *, rank_tol: float = RANK_TOL) -> "Ensemble":
        """Build an ensemble from a list of vectors, checking linear independence."""
        if len(vectors) == 0:
            raise ValidationError("ensemble must contain at least one vector")
        columns = [np.asarray(vec, dtype=np.complex128).reshape(-1) for vec in vectors]
        dims = {col.size for col in columns}
        if len(dims) != 1:
            raise DimensionMismatch(f"ensemble vectors have different dimensions {sorted(dims)}")
        mat = as_complex_matrix(np.column_stack(columns), name="ensemble")
        ensemble = cls(vectors=mat)
        rank = numerical_rank(hermitian_eig(ensemble.gram()).values, rank_tol)
        if rank < ensemble.count:
            raise ValidationError(
                f"ensemble vectors are linearly dependent (rank {rank} < {ensemble.count})"
            )
        return ensemble


@dataclass(frozen=True)
class UDProblem:
    states: Tuple[DensityMatrix, ...]
    priors: Tuple[float, ...]
    ensembles: Optional[Tuple[Ensemble, ...]] = field(default=None)

    def __post_init__(self) -> None:
        validate_priors(self.priors, len(self.states))
        dims = {state.dim for state in self.states}
        if len(dims) > 1:
            raise DimensionMismatch(f"states have different dimensions {sorted(dims)}")
        if self.ensembles is not None:
            if len(self.ensembles) != len(self.states):
                raise DimensionMismatch("one ensemble per state is required")
            for k, ens in enumerate(self.ensembles):
                if ens.dim not in dims:
                    raise DimensionMismatch(f"ensemble {k} has dimension {ens.dim}")

    @property
    def dim(self) -> int:
        return self.states[0].dim

    @property
    def size(self) -> int:
        return len(self.states)

    def state_ensembles(self, rank_tol: float = RANK_TOL) -> List[Ensemble]:
        """Ensembles generating each state: the supplied ones, else spectral."""
        if self.ensembles is not None:
            return list(self.ensembles)
        return [spectral_ensemble(state, rank_tol) for state in self.states]

    def with_priors(self, priors: Sequence[float]) -> "UDProblem":
        return UDProblem(states=self.states, priors=tuple(float(p) for p in priors), ensembles=self.ensembles)


def validate_priors(priors: Sequence[float], count: int) -> None:
    if len(priors) != count:
        raise InvalidPriors(f"expected {count} priors, got {len(priors)}")
    if count == 0:
        raise InvalidPriors("at least one state is required")
    values = np.asarray(priors, dtype=np.float64)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise InvalidPriors(f"priors must be positive, got {list(priors)}")
    total = float(np.sum(values))
    if abs(total - 1.0) > PRIOR_SUM_TOL:
        raise InvalidPriors(f"priors must sum to 1 (sum = {total!r})")


def validate_density(mat: Any, *, tol: float = DENSITY_TOL) -> DensityMatrix:
    """Check the density-matrix invariants and report every violation.

    The raised error has the class of the first violated invariant (Hermitian,
    unit trace, PSD, in that order) and lists all violations in ``details``.
    """
    m = as_complex_matrix(mat, name="density matrix")
    if m.shape[0] != m.shape[1]:
        raise NonHermitian(f"density matrix must be square, got shape {m.shape}")

    violations: List[Tuple[type, str]] = []
    residual = hermitian_residual(m)
    if residual > tol:
        violations.append((NonHermitian, f"not Hermitian (residual {residual:.3e})"))
    herm = 0.5 * (m + m.conj().T)
    trace = float(np.real(np.trace(herm)))
    if abs(trace - 1.0) > tol:
        violations.append((TraceNotOne, f"trace is {trace:.12g}"))
    lowest = float(np.linalg.eigvalsh(herm)[0])
    if lowest < -tol:
        violations.append((NotPsd, f"min eigenvalue {lowest:.3e}"))

    if violations:
        error_cls, _ = violations[0]
        messages = [msg for _, msg in violations]
        error = error_cls("invalid density matrix", details=messages)
        error.violations = [cls.code for cls, _ in violations]
        raise error
    return DensityMatrix(mat=herm)


def spectral_ensemble(rho: DensityMatrix, rank_tol: float = RANK_TOL) -> Ensemble:
    """Eigen-ensemble ``sqrt(lambda_i) |v_i>`` ordered by descending eigenvalue."""
    eig = hermitian_eig(rho.mat, tol=HERMITIAN_TOL)
    n = eig.values.size
    rank = numerical_rank(eig.values, rank_tol)
    keep = slice(n - rank, n)
    values = eig.values[keep][::-1]
    vectors = eig.vectors[:, keep][:, ::-1]
    return Ensemble(vectors=vectors * np.sqrt(values))


def ensemble_state(ensemble: Ensemble) -> DensityMatrix:
    """Validate the state an ensemble generates."""
    return validate_density(ensemble.density(), tol=ENSEMBLE_TOL)
