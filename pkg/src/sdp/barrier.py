"""Log-det barrier path-following solver for the discrimination SDP.

The problem is first restricted to the range of ``X``. With ``K`` a basis of
``ker X`` and ``K_k`` its block-``k`` rows, every feasible ``Y_kk`` vanishes on
``range(K_k)``, so it is parametrized as ``Y_kk = W_k Z_k W_k^dagger`` with
``W_k`` an orthonormal basis of ``range(K_k)^perp``. With ``R`` a basis of
``range X`` and ``M_k = R^dagger W_k`` (``W_k`` embedded in the full space),
the restricted problem

    maximize    sum_k eta_k Tr Z_k
    subject to  Z_k > 0,  S = R^dagger X R - sum_k M_k Z_k M_k^dagger > 0

has a strictly feasible interior. For increasing ``t`` the centering step
minimizes

    phi_t(Z) = -t sum_k eta_k Tr Z_k - sum_k log det Z_k - log det S

by damped Newton steps on a real coordinate vector of the Hermitian blocks.
Each centered point yields the dual point ``W = S^-1 / t`` and its Newton
correction; repaired to satisfy the block constraints, they certify an upper
bound on the optimum. The solver stops when the certified gap falls below
``tol * max(1, P)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
import time
from typing import List, Optional, Sequence, Tuple
import warnings

import numpy as np
from scipy import linalg as sla

from src.errors import NumericalLimit
from src.gram.block import BlockGram, QuasiDiagonal
from src.numerics.linalg import (
    ComplexMatrix,
    hermitian_eig,
    min_eigenvalue,
    numerical_rank,
    spectral_norm,
    svd,
)
from src.sdp.problem import (
    SdpProblem,
    SolverOptions,
    SolverStatus,
    UDSolution,
    feasibility,
    hermitian_basis,
    objective_scale,
    zero_solution,
)


LOGGER = logging.getLogger(__name__)

KERNEL_OVERLAP_TOL = 1e-6
CENTERING_TOL = 1e-9
MAX_BACKTRACKS = 60
MAX_STAGES = 200
FINAL_PSD_TOL = 1e-8


@dataclass(frozen=True)
class Restriction:
    range_basis: ComplexMatrix
    x_range: ComplexMatrix
    frames: Tuple[ComplexMatrix, ...]
    maps: Tuple[ComplexMatrix, ...]
    bases: Tuple[np.ndarray, ...]

    @property
    def rank(self) -> int:
        return int(self.range_basis.shape[1])

    @property
    def widths(self) -> List[int]:
        return [int(w.shape[1]) for w in self.frames]

    @property
    def degree(self) -> int:
        """Barrier parameter ``nu``: the gap at a centered point is ``nu / t``."""
        return self.rank + sum(self.widths)

    @property
    def parameter_count(self) -> int:
        return sum(w * w for w in self.widths)


@dataclass
class _Point:
    z: List[ComplexMatrix]
    chol_z: List[Optional[ComplexMatrix]]
    logdet_z: List[float]
    s: ComplexMatrix
    chol_s: ComplexMatrix
    logdet_s: float


def restrict(x: BlockGram, rank_tol: float) -> Restriction:
    """Range restriction of ``X`` and the per-block frames ``W_k``."""
    eig = hermitian_eig(x.mat)
    n = eig.values.size
    rank = numerical_rank(eig.values, rank_tol)
    r_basis = eig.vectors[:, n - rank :]
    kernel = eig.vectors[:, : n - rank]
    x_range = r_basis.conj().T @ x.mat @ r_basis
    x_range = 0.5 * (x_range + x_range.conj().T)

    off = x.offsets
    frames, maps, bases = [], [], []
    for k, size in enumerate(x.blocks):
        rows = kernel[off[k] : off[k + 1], :]
        if rows.shape[1] == 0:
            frame = np.eye(size, dtype=np.complex128)
        else:
            result = svd(rows)
            constrained = int(np.count_nonzero(result.singulars > KERNEL_OVERLAP_TOL))
            frame = result.left[:, constrained:]
        embedded = np.zeros((n, frame.shape[1]), dtype=np.complex128)
        embedded[off[k] : off[k + 1], :] = frame
        frames.append(frame)
        maps.append(r_basis.conj().T @ embedded)
        bases.append(hermitian_basis(frame.shape[1]))
    return Restriction(
        range_basis=r_basis,
        x_range=x_range,
        frames=tuple(frames),
        maps=tuple(maps),
        bases=tuple(bases),
    )


def _cholesky(mat: ComplexMatrix) -> Optional[ComplexMatrix]:
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


def _logdet(chol: ComplexMatrix) -> float:
    return 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))


def _evaluate(restriction: Restriction, z: Sequence[ComplexMatrix]) -> Optional[_Point]:
    """Factor both cones at ``z``; ``None`` when either is not positive definite."""
    chol_z: List[Optional[ComplexMatrix]] = []
    logdet_z: List[float] = []
    s = restriction.x_range.copy()
    for block, m in zip(z, restriction.maps):
        if block.shape[0] == 0:
            chol_z.append(None)
            logdet_z.append(0.0)
            continue
        herm = 0.5 * (block + block.conj().T)
        chol = _cholesky(herm)
        if chol is None:
            return None
        chol_z.append(chol)
        logdet_z.append(_logdet(chol))
        s = s - m @ herm @ m.conj().T
    s = 0.5 * (s + s.conj().T)
    chol_s = _cholesky(s)
    if chol_s is None:
        return None
    return _Point(
        z=[0.5 * (b + b.conj().T) for b in z],
        chol_z=chol_z,
        logdet_z=logdet_z,
        s=s,
        chol_s=chol_s,
        logdet_s=_logdet(chol_s),
    )


def _inverse(chol: ComplexMatrix) -> ComplexMatrix:
    eye = np.eye(chol.shape[0], dtype=np.complex128)
    inv = sla.cho_solve((chol, True), eye)
    return 0.5 * (inv + inv.conj().T)


def _initial_point(restriction: Restriction, x: BlockGram, init_scale: float) -> _Point:
    """``Z_k = eps W_k^dagger X_kk W_k`` (slightly regularized), halving ``eps`` until interior."""
    seeds = []
    for frame, block in zip(restriction.frames, x.diagonal_blocks()):
        width = frame.shape[1]
        if width == 0:
            seeds.append(np.zeros((0, 0), dtype=np.complex128))
            continue
        local = frame.conj().T @ block @ frame
        local = 0.5 * (local + local.conj().T)
        shift = 1e-6 * max(float(np.real(np.trace(local))), 1e-12) / width
        seeds.append(local + shift * np.eye(width))
    eps = init_scale
    for _ in range(MAX_BACKTRACKS):
        point = _evaluate(restriction, [eps * seed for seed in seeds])
        if point is not None:
            return point
        eps *= 0.5
    raise NumericalLimit("could not find a strictly feasible starting point")


def _primal(point: _Point, priors: Sequence[float]) -> float:
    return float(math.fsum(eta * float(np.real(np.trace(z))) for eta, z in zip(priors, point.z)))


def _newton_step(
    restriction: Restriction, point: _Point, t: float, priors: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient and Newton direction of ``phi_t`` in basis coordinates."""
    s_inv = _inverse(point.chol_s)
    grads, projected, local_blocks = [], [], []
    for k, (m, basis) in enumerate(zip(restriction.maps, restriction.bases)):
        width = m.shape[1]
        if width == 0:
            continue
        z_inv = _inverse(point.chol_z[k])
        grad = -t * priors[k] * np.eye(width) - z_inv + m.conj().T @ s_inv @ m
        grads.append(np.real(np.einsum("ab,iba->i", grad, basis)))
        lifted = np.einsum("ab,ibc,dc->iad", m, basis, m.conj())
        projected.append(np.matmul(s_inv, lifted))
        local = np.matmul(z_inv, basis)
        local_blocks.append(np.real(np.einsum("iab,jba->ij", local, local)))

    g = np.concatenate(grads)
    q = np.concatenate(projected, axis=0)
    hessian = np.real(np.einsum("iab,jba->ij", q, q)) + sla.block_diag(*local_blocks)
    hessian = 0.5 * (hessian + hessian.T)

    # Jacobi scaling before the SPD solve.
    diag = np.sqrt(np.clip(np.diag(hessian), np.finfo(float).tiny, None))
    scaled = hessian / np.outer(diag, diag)
    rhs = -g / diag
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        try:
            step = sla.solve(scaled, rhs, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError):
            step = sla.lstsq(scaled, rhs)[0]
    return g, step / diag


def _unpack(restriction: Restriction, coords: np.ndarray) -> List[ComplexMatrix]:
    blocks, start = [], 0
    for basis in restriction.bases:
        count = basis.shape[0]
        width = basis.shape[1]
        if count == 0:
            blocks.append(np.zeros((width, width), dtype=np.complex128))
            continue
        blocks.append(np.einsum("i,iab->ab", coords[start : start + count], basis))
        start += count
    return blocks


def _line_search(
    restriction: Restriction,
    point: _Point,
    direction: List[ComplexMatrix],
    slope: float,
    t: float,
    priors: Sequence[float],
    options: SolverOptions,
) -> Optional[_Point]:
    """Backtracking on ``phi_t`` that keeps both cones positive definite.

    The decrease is assembled from log-det differences so that it does not
    cancel against the large linear term at high ``t``.
    """
    linear = sum(eta * float(np.real(np.trace(d))) for eta, d in zip(priors, direction))
    step = 1.0
    for _ in range(MAX_BACKTRACKS):
        candidate = _evaluate(restriction, [z + step * d for z, d in zip(point.z, direction)])
        if candidate is not None:
            change = -t * step * linear
            change -= sum(new - old for new, old in zip(candidate.logdet_z, point.logdet_z))
            change -= candidate.logdet_s - point.logdet_s
            if change <= options.alpha * step * slope:
                return candidate
        step *= options.beta
    return None


def _center(
    restriction: Restriction,
    point: _Point,
    t: float,
    priors: Sequence[float],
    options: SolverOptions,
    budget: int,
) -> Tuple[_Point, int, bool]:
    """Damped Newton centering. Returns the point, steps taken and a stall flag.

    Near a face of either cone rounding in the log-dets can hide the decrease
    of ``phi_t`` from the line search. The plain damped Newton step stays
    inside the domain without evaluating ``phi_t``, so it is taken instead for
    as long as the Newton decrement keeps shrinking.
    """
    steps = 0
    last_fallback = math.inf
    while steps < budget:
        g, coords = _newton_step(restriction, point, t, priors)
        slope = float(g @ coords)
        decrement = -slope
        if decrement / 2.0 <= CENTERING_TOL:
            return point, steps, False
        direction = _unpack(restriction, coords)
        candidate = _line_search(restriction, point, direction, slope, t, priors, options)
        if candidate is None:
            if decrement >= last_fallback:
                return point, steps, True
            last_fallback = decrement
            candidate = _damped_step(restriction, point, direction, decrement)
            if candidate is None:
                return point, steps, True
        steps += 1
        point = candidate
    return point, steps, False


def _damped_step(
    restriction: Restriction, point: _Point, direction: List[ComplexMatrix], decrement: float
) -> Optional[_Point]:
    """Newton step scaled by ``1 / (1 + lambda)``; a full step once ``lambda < 1/4``."""
    lam = math.sqrt(max(decrement, 0.0))
    step = 1.0 if lam < 0.25 else 1.0 / (1.0 + lam)
    for _ in range(MAX_BACKTRACKS):
        candidate = _evaluate(restriction, [z + step * d for z, d in zip(point.z, direction)])
        if candidate is not None:
            return candidate
        step *= 0.5
    return None


def _block_corrections(restriction: Restriction) -> List[Optional[ComplexMatrix]]:
    """``M_k G_k^-2 M_k^dagger`` with ``G_k = M_k^dagger M_k``.

    Adding ``delta * C_k`` to a dual point raises ``M_k^dagger W M_k`` by exactly
    ``delta I`` and leaves the other blocks no lower.
    """
    corrections: List[Optional[ComplexMatrix]] = []
    for m in restriction.maps:
        if m.shape[1] == 0:
            corrections.append(None)
            continue
        gram = m.conj().T @ m
        inv = np.linalg.inv(0.5 * (gram + gram.conj().T))
        c = m @ inv @ inv @ m.conj().T
        corrections.append(0.5 * (c + c.conj().T))
    return corrections


def _dual_bound(restriction: Restriction, w: ComplexMatrix, priors: Sequence[float]) -> float:
    """Smallest certified bound ``Tr(X W')`` over two repairs of a PSD candidate ``W``.

    ``W'`` is either ``W`` scaled uniformly until every block constraint
    ``M_k^dagger W' M_k >= eta_k I`` holds, or ``W`` plus per-block corrections
    that close each deficit separately.
    """
    base = float(np.real(np.trace(restriction.x_range @ w)))
    factor, additive = 1.0, base
    corrections = _block_corrections(restriction)
    for eta, m, correction in zip(priors, restriction.maps, corrections):
        if correction is None:
            continue
        lowest = min_eigenvalue(m.conj().T @ w @ m)
        factor = math.inf if lowest <= 0.0 else max(factor, eta / lowest)
        deficit = max(0.0, eta - lowest)
        if deficit > 0.0:
            additive += deficit * float(np.real(np.trace(restriction.x_range @ correction)))
    return min(factor * base, additive)


def _psd_part(mat: ComplexMatrix) -> ComplexMatrix:
    eig = hermitian_eig(mat)
    kept = np.clip(eig.values, 0.0, None)
    return (eig.vectors * kept) @ eig.vectors.conj().T


def _certificate(
    restriction: Restriction, point: _Point, t: float, priors: Sequence[float]
) -> Tuple[float, float]:
    """Primal value and certified upper bound at a (nearly) centered point.

    Two dual candidates are tried: ``S^-1 / t`` and its Newton correction
    ``(S^-1 + S^-1 (sum_k M_k dZ_k M_k^dagger) S^-1) / t``, which satisfies the
    block constraints up to second order in the Newton decrement.
    """
    primal = _primal(point, priors)
    s_inv = _inverse(point.chol_s)
    centered = s_inv / t
    _, coords = _newton_step(restriction, point, t, priors)
    direction = _unpack(restriction, coords)
    lifted = sum(m @ d @ m.conj().T for m, d in zip(restriction.maps, direction))
    newton = (s_inv + s_inv @ lifted @ s_inv) / t
    newton = _psd_part(0.5 * (newton + newton.conj().T))
    dual = min(_dual_bound(restriction, centered, priors), _dual_bound(restriction, newton, priors))
    return primal, dual


def _expand(restriction: Restriction, point: _Point) -> QuasiDiagonal:
    blocks = []
    for frame, z in zip(restriction.frames, point.z):
        y = frame @ z @ frame.conj().T
        blocks.append(0.5 * (y + y.conj().T))
    return QuasiDiagonal(blocks=tuple(blocks))


def solve(problem: SdpProblem, options: Optional[SolverOptions] = None) -> UDSolution:
    """Maximize ``sum_k eta_k Tr Y_kk`` over quasi-diagonal ``0 <= Y <= X``.

    Raises
    ------
    NumericalLimit
        When ``max_iter`` Newton steps pass before the certified gap closes.
    """
    options = options or SolverOptions()
    started = time.perf_counter()
    x = problem.x
    priors = problem.priors

    if x.size == 0:
        return zero_solution(problem, SolverStatus.OPTIMAL)
    scale = max(1.0, spectral_norm(x.mat))
    if min_eigenvalue(x.mat) < -options.psd_tol * scale:
        LOGGER.warning("Gram matrix is not PSD; no discrimination strategy exists")
        return zero_solution(problem, SolverStatus.INFEASIBLE)

    restriction = restrict(x, options.rank_tol)
    if restriction.rank == 0 or restriction.parameter_count == 0:
        LOGGER.info("All success blocks are forced to zero")
        return zero_solution(problem, SolverStatus.OPTIMAL)

    point = _initial_point(restriction, x, options.init_scale)
    upper = sum(eta * tr for eta, tr in zip(priors, x.block_traces()))
    t = restriction.degree / max(upper, options.tol)
    iterations = 0
    stages = 0
    status: Optional[SolverStatus] = None
    primal, dual = _primal(point, priors), math.inf
    previous_gap = math.inf

    while status is None:
        point, steps, stalled = _center(
            restriction, point, t, priors, options, options.max_iter - iterations
        )
        iterations += steps
        stages += 1
        primal, dual = _certificate(restriction, point, t, priors)
        gap = dual - primal
        target = options.tol * objective_scale(primal)
        LOGGER.debug(
            "Barrier stage t=%.3e: P=%.12f gap=%.3e newton=%d", t, primal, gap, steps
        )
        if gap <= target:
            status = SolverStatus.OPTIMAL
        elif stalled and gap <= 10.0 * target:
            status = SolverStatus.OPTIMAL
        elif stalled and gap > 0.5 * previous_gap:
            status = SolverStatus.NUMERICAL_LIMIT
        elif restriction.degree / t <= target and gap <= 10.0 * target:
            status = SolverStatus.OPTIMAL
        elif iterations >= options.max_iter or stages >= MAX_STAGES:
            raise NumericalLimit(
                f"iteration cap {options.max_iter} reached with certified gap {gap:.3e}"
            )
        else:
            previous_gap = gap
            t /= options.barrier_shrink

    y = _expand(restriction, point)
    p_star = problem.objective(y)
    check = feasibility(x, y, tol=FINAL_PSD_TOL)
    if not check.feasible:
        LOGGER.warning("Solution violates PSD constraints (min eig %.3e)", check.min_eig)
        status = SolverStatus.NUMERICAL_LIMIT
    if status == SolverStatus.NUMERICAL_LIMIT:
        LOGGER.warning("Solver stopped at numerical limit: gap=%.3e", dual - primal)

    elapsed = time.perf_counter() - started
    LOGGER.info(
        "Solved SDP: status=%s P*=%.10f gap=%.2e iterations=%d",
        status.value,
        p_star,
        dual - p_star,
        iterations,
    )
    return UDSolution(
        y=y,
        p_star=p_star,
        q_star=1.0 - p_star,
        dual_gap=dual - p_star,
        status=status,
        iterations=iterations,
        dual_bound=dual,
        wall_time=elapsed,
    )
