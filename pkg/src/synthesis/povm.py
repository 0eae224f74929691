"""POVM induced by a realization: ``E_k = J^dagger U^dagger P_k U J``."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import CompletenessViolation, PartitionMismatch
from src.numerics.linalg import ComplexMatrix, min_eigenvalue
from src.states.density import Ensemble
from src.synthesis.realize import Realization


LOGGER = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class Povm:
    """Elements ``E_0`` (inconclusive) followed by ``E_1 .. E_N``."""

    elements: Tuple[ComplexMatrix, ...]
    success_probabilities: Tuple[float, ...]
    total_success: float

    @property
    def inconclusive(self) -> ComplexMatrix:
        return self.elements[0]

    def outcome_table(self, states: Sequence[ComplexMatrix]) -> np.ndarray:
        """``T[k, l] = Tr(E_k rho_l)`` for ``k = 0..N`` and ``l = 1..N``."""
        return np.array(
            [[float(np.real(np.trace(e @ rho))) for rho in states] for e in self.elements]
        )

    def residuals(self, states: Sequence[ComplexMatrix]) -> Dict[str, float]:
        dim = self.elements[0].shape[0]
        completeness = float(np.max(np.abs(sum(self.elements) - np.eye(dim))))
        positivity = max(0.0, -min(min_eigenvalue(e) for e in self.elements))
        table = self.outcome_table(states)[1:, :]
        off_diagonal = table - np.diag(np.diag(table))
        return {
            "completeness": completeness,
            "positivity": positivity,
            "off_diagonal": float(np.max(np.abs(off_diagonal))) if off_diagonal.size else 0.0,
        }


def extract_povm(real: Realization, ensembles: Sequence[Ensemble], priors: Sequence[float]) -> Povm:
    """Project the dilation onto each state's success coordinates.

    Raises
    ------
    CompletenessViolation
        When ``I - sum_k E_k`` is not PSD.
    """
    if len(ensembles) != len(real.x.blocks) or len(priors) != len(ensembles):
        raise PartitionMismatch("one ensemble and one prior per state are required")
    isometry = real.unitary @ real.embedding()
    dim = real.input_dim

    success: List[ComplexMatrix] = []
    for k in range(len(ensembles)):
        rows = isometry[real.success_rows(k), :]
        element = rows.conj().T @ rows
        success.append(0.5 * (element + element.conj().T))
    inconclusive = np.eye(dim, dtype=np.complex128) - sum(success, np.zeros((dim, dim), dtype=np.complex128))
    inconclusive = 0.5 * (inconclusive + inconclusive.conj().T)
    lowest = min_eigenvalue(inconclusive)
    if lowest < -COMPLETENESS_TOL:
        raise CompletenessViolation(f"E_0 = I - sum E_k has min eigenvalue {lowest:.3e}")

    states = [ens.density() for ens in ensembles]
    probabilities = []
    for element, rho in zip(success, states):
        weight = float(np.real(np.trace(rho)))
        hit = float(np.real(np.trace(element @ rho)))
        probabilities.append(hit / weight if weight > 0 else 0.0)
    total = float(sum(eta * float(np.real(np.trace(e @ rho))) for eta, e, rho in zip(priors, success, states)))
    LOGGER.debug("POVM success probabilities: %s", probabilities)
    return Povm(
        elements=(inconclusive, *success),
        success_probabilities=tuple(probabilities),
        total_success=total,
    )
