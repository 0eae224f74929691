from __future__ import annotations

import math

import numpy as np
import pytest

from src.bounds.pairwise import total_upper_bound
from src.canonical.pair import (
    canonical_pair,
    fidelity,
    fidelity_direct,
    normalized_canonical_operator,
    projected_pair,
    reduce_two_state_problem,
    reduced_gram,
    reduced_vectors,
)
from src.errors import DimensionMismatch, EmptyReduction
from src.gram.block import build_block_gram
from src.sdp.barrier import solve
from src.sdp.problem import SolverStatus, formulate
from src.states.density import spectral_ensemble, validate_density
from src.states.random import random_density


def _pure(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1, 1)
    return v @ v.conj().T


@pytest.mark.parametrize("dim,rank1,rank2,seed", [(2, 1, 2, 0), (3, 2, 2, 1), (4, 3, 2, 2), (5, 4, 4, 3)])
def test_canonical_vectors_pair_diagonally(dim: int, rank1: int, rank2: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    rho1, rho2 = random_density(dim, rank1, rng), random_density(dim, rank2, rng)
    pair = canonical_pair(rho1, rho2)

    overlaps = pair.overlaps()
    expected = np.zeros(overlaps.shape, dtype=np.complex128)
    np.fill_diagonal(expected[: pair.f.size, : pair.f.size], pair.f)
    assert np.max(np.abs(overlaps - expected)) < 1e-9
    r, s = pair.r_vectors, pair.s_vectors
    assert np.max(np.abs(r @ r.conj().T - rho1.mat)) < 1e-9
    assert np.max(np.abs(s @ s.conj().T - rho2.mat)) < 1e-9
    assert abs(pair.fidelity - fidelity_direct(rho1, rho2)) < 1e-8


def test_pure_state_fidelity_is_overlap() -> None:
    rho1 = validate_density(_pure([1.0, 0.0]))
    rho2 = validate_density(_pure([0.6, 0.8]))
    assert fidelity(rho1, rho2) == pytest.approx(0.6, abs=1e-12)
    pair = canonical_pair(rho1, rho2)
    assert pair.t == 1
    assert pair.paired_triples()[0] == pytest.approx((1.0, 1.0, 0.6))


def test_orthogonal_supports_have_no_pairs() -> None:
    rho1 = validate_density(np.diag([1.0, 0.0]))
    rho2 = validate_density(np.diag([0.0, 1.0]))
    pair = canonical_pair(rho1, rho2)
    assert pair.t == 0 and pair.fidelity == 0.0
    with pytest.raises(EmptyReduction):
        reduced_vectors(pair)
    reduction = reduce_two_state_problem(rho1, rho2, 0.3, 0.7)
    assert reduction.problem is None
    assert reduction.leftover == pytest.approx(1.0)


def test_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatch):
        canonical_pair(validate_density(np.eye(2) / 2), validate_density(np.eye(3) / 3))


def test_reduction_splits_off_unpaired_mass() -> None:
    # rho1 has a component orthogonal to supp(rho2); only the overlapping part is reduced.
    psi = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    rho1 = validate_density(0.6 * _pure(psi) + 0.4 * _pure([0.0, 0.0, 1.0]))
    rho2 = validate_density(_pure([1.0, 0.0, 0.0]))
    reduction = reduce_two_state_problem(rho1, rho2, 0.5, 0.5)
    assert reduction.pair.t == 1
    assert reduction.leftover == pytest.approx(0.5 * 0.4, abs=1e-10)
    assert reduction.problem is not None
    assert sum(reduction.problem.priors) == pytest.approx(1.0, abs=1e-12)
    gram = reduced_gram(reduction.pair)
    assert gram.blocks == (1, 1)
    assert abs(gram.block(0, 1)[0, 0]) == pytest.approx(reduction.pair.f[0], abs=1e-12)


def test_normalized_operator_traces() -> None:
    rng = np.random.default_rng(7)
    rho1, rho2 = random_density(3, 2, rng), random_density(3, 2, rng)
    pair = canonical_pair(rho1, rho2)
    c1 = normalized_canonical_operator(pair, 1)
    expected = sum(f * f / r for r, _, f in pair.paired_triples())
    assert float(np.real(np.trace(rho2.mat @ c1))) == pytest.approx(expected, abs=1e-9)
    with pytest.raises(ValueError):
        normalized_canonical_operator(pair, 3)  # type: ignore[arg-type]


def _optimum(states, priors) -> float:
    ensembles = [spectral_ensemble(state) for state in states]
    solution = solve(formulate(build_block_gram(ensembles), priors))
    assert solution.status == SolverStatus.OPTIMAL
    return solution.p_star


def _mixed_plus_minus() -> tuple:
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    rho1 = validate_density(0.7 * _pure(plus) + 0.3 * _pure(minus))
    rho2 = validate_density(_pure([1.0, 0.0]))
    return rho1, rho2


@pytest.mark.parametrize("eta1,expected", [(0.5, 0.25), (0.3, 0.15)])
def test_full_optimum_is_leftover_plus_reduced(eta1: float, expected: float) -> None:
    rho1, rho2 = _mixed_plus_minus()
    eta2 = 1.0 - eta1
    reduction = reduce_two_state_problem(rho1, rho2, eta1, eta2)
    assert reduction.problem is not None

    full = _optimum((rho1, rho2), (eta1, eta2))
    reduced = _optimum(reduction.problem.states, reduction.problem.priors)
    assert full == pytest.approx(expected, abs=1e-6)
    assert full == pytest.approx(reduction.leftover + reduction.weight * reduced, abs=1e-6)


@pytest.mark.parametrize("seed", [3, 11])
def test_random_reduction_preserves_optimum(seed: int) -> None:
    rng = np.random.default_rng(seed)
    rho1, rho2 = random_density(3, 2, rng), random_density(3, 1, rng)
    reduction = reduce_two_state_problem(rho1, rho2, 0.4, 0.6)
    assert reduction.pair.t == 1
    assert reduction.problem is not None

    full = _optimum((rho1, rho2), (0.4, 0.6))
    reduced = _optimum(reduction.problem.states, reduction.problem.priors)
    assert full == pytest.approx(reduction.leftover + reduction.weight * reduced, abs=1e-6)


def test_projected_pair_keeps_overlaps_and_shrinks_norms() -> None:
    rho1, rho2 = _mixed_plus_minus()
    pair = canonical_pair(rho1, rho2)
    projected = projected_pair(pair)
    assert projected.t == pair.t == 1
    assert projected.r_vectors.shape[1] == 1
    assert np.allclose(projected.overlaps(), np.diag(pair.paired_f), atol=1e-12)
    assert projected.r_norms[0] == pytest.approx(0.5, abs=1e-12)
    assert projected.r_norms[0] < pair.r_norms[0]
    assert projected.s_norms[0] == pytest.approx(pair.s_norms[0], abs=1e-12)


def test_projected_bound_is_tighter_and_still_valid() -> None:
    rho1, rho2 = _mixed_plus_minus()
    reduction = reduce_two_state_problem(rho1, rho2, 0.5, 0.5)
    assert reduction.reduced_pair is not None
    literal = reduction.leftover + total_upper_bound(0.5, 0.5, reduction.pair).total
    projected = reduction.leftover + total_upper_bound(0.5, 0.5, reduction.reduced_pair).total
    assert projected == pytest.approx(0.25, abs=1e-9)
    assert projected < literal
