"""Quantum state model: density matrices, ensembles, supports."""

from .density import (
    DensityMatrix,
    Ensemble,
    UDProblem,
    ensemble_state,
    spectral_ensemble,
    validate_density,
    validate_priors,
)
from .support import (
    intersection_basis,
    support_basis,
    support_intersection_dim,
    support_projector,
)

__all__ = [
    "DensityMatrix",
    "Ensemble",
    "UDProblem",
    "ensemble_state",
    "intersection_basis",
    "spectral_ensemble",
    "support_basis",
    "support_intersection_dim",
    "support_projector",
    "validate_density",
    "validate_priors",
]
