from __future__ import annotations

import numpy as np
import pytest

from src.errors import DimensionMismatch, NotPsd, NotUnitary, PartitionMismatch
from src.gram.block import (
    BlockGram,
    QuasiDiagonal,
    apply_unitary_freedom,
    build_block_gram,
    check_partition,
    residual,
)
from src.states.density import spectral_ensemble
from src.states.random import random_density, random_unitary


def _ensembles(seed: int = 0):
    rng = np.random.default_rng(seed)
    return [spectral_ensemble(random_density(4, rank, rng)) for rank in (2, 3)]


def test_build_block_gram_layout() -> None:
    ens = _ensembles()
    x = build_block_gram(ens)
    assert x.blocks == (2, 3)
    assert x.offsets == [0, 2, 5]
    assert np.allclose(x.block(0, 1), ens[0].vectors.conj().T @ ens[1].vectors)
    assert np.allclose(x.block_traces(), [1.0, 1.0])


def test_block_gram_rejects_bad_input() -> None:
    with pytest.raises(PartitionMismatch):
        BlockGram.from_matrix(np.eye(3), [1, 1])
    with pytest.raises(NotPsd):
        BlockGram.from_matrix(np.diag([1.0, -1.0]), [1, 1])
    with pytest.raises(DimensionMismatch):
        build_block_gram([])


def test_unitary_freedom_preserves_spectrum_and_traces() -> None:
    x = build_block_gram(_ensembles(1))
    rng = np.random.default_rng(2)
    rotated = apply_unitary_freedom(x, [random_unitary(n, rng) for n in x.blocks])
    assert np.allclose(np.linalg.eigvalsh(rotated.mat), np.linalg.eigvalsh(x.mat), atol=1e-12)
    assert np.allclose(rotated.block_traces(), x.block_traces())


def test_unitary_freedom_rejects_non_unitary() -> None:
    x = build_block_gram(_ensembles(3))
    with pytest.raises(NotUnitary):
        apply_unitary_freedom(x, [np.eye(2) * 2.0, np.eye(3)])
    with pytest.raises(DimensionMismatch):
        apply_unitary_freedom(x, [np.eye(3), np.eye(3)])


def test_quasi_diagonal_and_residual() -> None:
    x = build_block_gram(_ensembles(4))
    y = QuasiDiagonal.from_blocks([0.1 * x.block(0, 0), np.zeros((3, 3))])
    assert y.partition == (2, 3)
    assert np.allclose(y.as_matrix()[:2, :2], 0.1 * x.block(0, 0))
    b = residual(x, y)
    assert np.allclose(b[2:, 2:], x.block(1, 1))
    assert y.traces()[0] == pytest.approx(0.1)


def test_partition_mismatch_is_detected() -> None:
    x = build_block_gram(_ensembles(5))
    with pytest.raises(PartitionMismatch):
        check_partition(x, QuasiDiagonal.zeros([3, 2]))
