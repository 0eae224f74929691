"""Seeded generators for test fixtures and the ``generate`` command."""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.numerics.linalg import ComplexMatrix
from src.states.density import DensityMatrix, Ensemble, UDProblem, validate_density


def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return q * phases


def random_pure_state(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return (vec / np.linalg.norm(vec)).reshape(-1, 1)


def random_density(dim: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    """Random state of the given rank: G G^dagger / Tr with G a dim x rank Ginibre matrix."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = rho / np.real(np.trace(rho))
    return validate_density(0.5 * (rho + rho.conj().T))


def random_priors(count: int, rng: np.random.Generator, *, low: float = 0.05) -> tuple[float, ...]:
    raw = low + rng.random(count)
    raw = raw / raw.sum()
    priors = [float(p) for p in raw[:-1]]
    priors.append(1.0 - sum(priors))
    return tuple(priors)


def random_pure_pair_problem(
    dim: int, rng: np.random.Generator, eta1: Optional[float] = None
) -> UDProblem:
    vectors = [random_pure_state(dim, rng) for _ in range(2)]
    ensembles = tuple(Ensemble(vectors=v) for v in vectors)
    states = tuple(validate_density(e.density()) for e in ensembles)
    priors = random_priors(2, rng) if eta1 is None else (eta1, 1.0 - eta1)
    return UDProblem(states=states, priors=priors, ensembles=ensembles)


def random_mixed_problem(
    dim: int, rank: int, rng: np.random.Generator, count: int = 2
) -> UDProblem:
    states = tuple(random_density(dim, rank, rng) for _ in range(count))
    return UDProblem(states=states, priors=random_priors(count, rng))
