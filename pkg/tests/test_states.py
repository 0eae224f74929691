from __future__ import annotations

import numpy as np
import pytest

from src.errors import DimensionMismatch, InvalidPriors, NonHermitian, NotPsd, TraceNotOne, ValidationError
from src.gram.block import build_block_gram
from src.sdp import formulate, solve
from src.states.density import (
    Ensemble,
    UDProblem,
    ensemble_state,
    spectral_ensemble,
    validate_density,
    validate_priors,
)
from src.states.random import random_density, random_mixed_problem, random_pure_pair_problem
from src.states.support import intersection_basis, support_intersection_dim
from src.synthesis import extract_povm, realize


def test_validate_density_accepts_mixed_state() -> None:
    rho = validate_density(np.diag([0.75, 0.25]))
    assert rho.dim == 2
    assert rho.rank() == 2


def test_validate_density_reports_every_violation() -> None:
    bad = np.array([[1.5, 0.0], [0.0, -0.2]])
    with pytest.raises(TraceNotOne) as info:
        validate_density(bad)
    assert info.value.violations == ["trace-not-one", "not-psd"]
    assert len(info.value.details) == 2


def test_validate_density_first_violation_decides_class() -> None:
    with pytest.raises(NonHermitian):
        validate_density([[0.5, 0.1], [0.3, 0.5]])
    with pytest.raises(NotPsd):
        validate_density(np.diag([1.2, -0.2]))


def test_validate_priors() -> None:
    validate_priors([0.25, 0.75], 2)
    with pytest.raises(InvalidPriors):
        validate_priors([0.5, 0.6], 2)
    with pytest.raises(InvalidPriors):
        validate_priors([1.0, 0.0], 2)
    with pytest.raises(InvalidPriors):
        validate_priors([1.0], 2)


def test_ensemble_rejects_dependent_vectors() -> None:
    with pytest.raises(ValidationError):
        Ensemble.from_vectors([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        Ensemble.from_vectors([[1.0, 0.0], [1.0, 0.0, 0.0]])


def test_spectral_ensemble_regenerates_state() -> None:
    rho = random_density(4, 3, np.random.default_rng(0))
    ens = spectral_ensemble(rho)
    assert ens.count == 3
    assert np.allclose(ens.density(), rho.mat, atol=1e-12)
    norms = np.real(np.einsum("ij,ij->j", ens.vectors.conj(), ens.vectors))
    assert np.all(np.diff(norms) <= 1e-15)


def test_ensemble_state_validates_trace() -> None:
    ens = Ensemble.from_vectors([[np.sqrt(0.5), 0.0], [0.0, np.sqrt(0.5)]])
    assert np.allclose(ensemble_state(ens).mat, 0.5 * np.eye(2))
    with pytest.raises(TraceNotOne):
        ensemble_state(Ensemble.from_vectors([[1.0, 0.0], [0.0, 1.0]]))


def test_problem_checks_dimensions() -> None:
    rho2 = validate_density(np.eye(2) / 2)
    rho3 = validate_density(np.eye(3) / 3)
    with pytest.raises(DimensionMismatch):
        UDProblem(states=(rho2, rho3), priors=(0.5, 0.5))


def test_random_generators_are_seeded() -> None:
    first = random_mixed_problem(3, 2, np.random.default_rng(11))
    second = random_mixed_problem(3, 2, np.random.default_rng(11))
    assert np.array_equal(first.states[0].mat, second.states[0].mat)
    assert abs(sum(first.priors) - 1.0) < 1e-12
    pure = random_pure_pair_problem(3, np.random.default_rng(12))
    assert pure.ensembles is not None and all(e.count == 1 for e in pure.ensembles)


def test_support_intersection() -> None:
    rho1 = validate_density(np.diag([0.5, 0.5, 0.0]))
    rho2 = validate_density(np.diag([0.0, 0.5, 0.5]))
    assert support_intersection_dim(rho1, rho2) == 1
    basis = intersection_basis(rho1, rho2)
    assert basis.shape[1] == 1
    assert abs(abs(basis[1, 0]) - 1.0) < 1e-10
    rho3 = validate_density(np.diag([0.0, 0.0, 1.0]))
    assert support_intersection_dim(rho1, rho3) == 0


def test_shared_support_direction_is_never_identified() -> None:
    rho1 = validate_density(np.diag([0.5, 0.5, 0.0]))
    rho2 = validate_density(np.diag([0.0, 0.5, 0.5]))
    problem = UDProblem(states=(rho1, rho2), priors=(0.5, 0.5))
    ensembles = problem.state_ensembles()
    x = build_block_gram(ensembles)
    solution = solve(formulate(x, problem.priors))
    assert solution.p_star == pytest.approx(0.5, abs=1e-6)

    povm = extract_povm(realize(x, solution.y, ensembles), ensembles, problem.priors)
    shared = intersection_basis(rho1, rho2)
    for element in povm.elements[1:]:
        weight = np.real(np.trace(shared.conj().T @ element @ shared))
        assert abs(weight) < 1e-6
    assert np.real(np.trace(shared.conj().T @ povm.inconclusive @ shared)) == pytest.approx(1.0, abs=1e-6)
