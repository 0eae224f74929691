"""Canonical decomposition of state pairs."""

from .pair import (
    CanonicalPair,
    TwoStateReduction,
    canonical_pair,
    fidelity,
    fidelity_direct,
    normalized_canonical_operator,
    projected_pair,
    reduce_two_state_problem,
    reduced_gram,
    reduced_vectors,
)

__all__ = [
    "CanonicalPair",
    "TwoStateReduction",
    "canonical_pair",
    "fidelity",
    "fidelity_direct",
    "normalized_canonical_operator",
    "projected_pair",
    "reduce_two_state_problem",
    "reduced_gram",
    "reduced_vectors",
]
