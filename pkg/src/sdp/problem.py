"""Problem and solution types for the optimal unambiguous discrimination SDP.

maximize    sum_k eta_k Tr(Y_kk)
subject to  Y = diag(Y_11, ..., Y_NN) >= 0,  X - Y >= 0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import PartitionMismatch
from src.gram.block import BlockGram, QuasiDiagonal, check_partition, residual
from src.numerics.linalg import PSD_TOL, RANK_TOL, min_eigenvalue, spectral_norm
from src.states.density import validate_priors
from src.utils.config import AppConfig


LOGGER = logging.getLogger(__name__)


class SolverStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    NUMERICAL_LIMIT = "NumericalLimit"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 500
    barrier_shrink: float = 0.2
    init_scale: float = 0.1
    alpha: float = 0.01
    beta: float = 0.5
    psd_tol: float = PSD_TOL
    rank_tol: float = RANK_TOL

    def __post_init__(self) -> None:
        if not (self.tol > 0.0):
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not (0.0 < self.barrier_shrink < 1.0):
            raise ValueError(f"barrier_shrink must lie in (0, 1), got {self.barrier_shrink}")
        if not (0.0 < self.init_scale < 1.0):
            raise ValueError(f"init_scale must lie in (0, 1), got {self.init_scale}")

    @classmethod
    def from_config(cls, cfg: AppConfig, **overrides: object) -> "SolverOptions":
        values = {
            "tol": float(cfg.get("solver.tol", cls.tol)),
            "max_iter": int(cfg.get("solver.max_iter", cls.max_iter)),
            "barrier_shrink": float(cfg.get("solver.barrier_shrink", cls.barrier_shrink)),
            "init_scale": float(cfg.get("solver.init_scale", cls.init_scale)),
            "alpha": float(cfg.get("solver.line_search.alpha", cls.alpha)),
            "beta": float(cfg.get("solver.line_search.beta", cls.beta)),
            "psd_tol": float(cfg.get("numerics.psd_tol", cls.psd_tol)),
            "rank_tol": float(cfg.get("numerics.rank_tol", cls.rank_tol)),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)  # type: ignore[arg-type]


@dataclass(frozen=True)
class SdpProblem:
    x: BlockGram
    priors: Tuple[float, ...]

    @property
    def parameter_count(self) -> int:
        return int(sum(n * n for n in self.x.blocks))

    def objective(self, y: QuasiDiagonal) -> float:
        return float(math.fsum(eta * tr for eta, tr in zip(self.priors, y.traces())))


@dataclass(frozen=True)
class UDSolution:
    y: QuasiDiagonal
    p_star: float
    q_star: float
    dual_gap: float
    status: SolverStatus
    iterations: int
    dual_bound: float = math.inf
    leftover: float = 0.0
    wall_time: float = field(default=0.0, compare=False)

    @property
    def objective(self) -> float:
        """Success probability on the solved Gram matrix, without leftover mass."""
        return self.p_star - self.leftover


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    min_eig_residual: float
    min_eig_blocks: List[float]
    scale: float

    @property
    def min_eig(self) -> float:
        return min([self.min_eig_residual, *self.min_eig_blocks])


def formulate(x: BlockGram, priors: Sequence[float]) -> SdpProblem:
    if len(priors) != len(x.blocks):
        raise PartitionMismatch(f"{len(priors)} priors for {len(x.blocks)} blocks")
    validate_priors(priors, len(x.blocks))
    return SdpProblem(x=x, priors=tuple(float(p) for p in priors))


def feasibility(x: BlockGram, y: QuasiDiagonal, *, tol: float = PSD_TOL) -> FeasibilityResult:
    """Check ``Y >= 0`` block by block and ``X - Y >= 0`` against ``tol * max(1, ||X||_2)``."""
    check_partition(x, y)
    scale = max(1.0, spectral_norm(x.mat))
    lowest_residual = min_eigenvalue(residual(x, y)) if x.size else 0.0
    lowest_blocks = y.min_block_eigenvalues()
    feasible = lowest_residual >= -tol * scale and all(v >= -tol * scale for v in lowest_blocks)
    return FeasibilityResult(
        feasible=feasible,
        min_eig_residual=lowest_residual,
        min_eig_blocks=lowest_blocks,
        scale=scale,
    )


def zero_solution(problem: SdpProblem, status: SolverStatus, iterations: int = 0) -> UDSolution:
    gap = 0.0 if status == SolverStatus.OPTIMAL else math.inf
    return UDSolution(
        y=QuasiDiagonal.zeros(problem.x.blocks),
        p_star=0.0,
        q_star=1.0,
        dual_gap=gap,
        status=status,
        iterations=iterations,
        dual_bound=0.0 if status == SolverStatus.OPTIMAL else math.inf,
    )


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of ``n x n`` Hermitian matrices under ``Re Tr(A B)``.

    Order: ``E_pp``; then for ``p < q`` the pair ``(E_pq + E_qp)/sqrt2``,
    ``i (E_pq - E_qp)/sqrt2``. Returns an array of shape ``(n*n, n, n)``.
    """
    basis = np.zeros((n * n, n, n), dtype=np.complex128)
    idx = 0
    for p in range(n):
        basis[idx, p, p] = 1.0
        idx += 1
    root = 1.0 / math.sqrt(2.0)
    for p in range(n):
        for q in range(p + 1, n):
            basis[idx, p, q] = basis[idx, q, p] = root
            idx += 1
            basis[idx, p, q] = 1j * root
            basis[idx, q, p] = -1j * root
            idx += 1
    return basis


def objective_scale(value: float) -> float:
    return max(1.0, abs(value))


