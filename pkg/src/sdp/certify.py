"""Independent recheck of a solver result."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Optional

import numpy as np

from src.bounds.pairwise import total_upper_bound
from src.canonical.pair import canonical_pair, projected_pair
from src.errors import CertificationFailed
from src.gram.block import check_partition, residual
from src.numerics.linalg import min_eigenvalue, psd_factor, spectral_norm
from src.sdp.problem import SdpProblem, SolverStatus, UDSolution, objective_scale
from src.states.density import DensityMatrix


LOGGER = logging.getLogger(__name__)

PSD_CHECK_TOL = 1e-8
OBJECTIVE_TOL = 1e-8
GAP_TOL = 1e-7
BOUND_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    category: str
    value: float
    tolerance: float
    passed: bool
    message: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "category": self.category,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "message": self.message,
        }


@dataclass
class CertificateReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[Check]:
        return [check for check in self.checks if not check.passed]

    def raise_for_failures(self) -> None:
        failed = self.failures()
        if failed:
            raise CertificationFailed(failed[0].category, [f"{c.name}: {c.message}" for c in failed])


def two_state_bound(problem: SdpProblem) -> Optional[float]:
    """Closed-form upper bound on the objective for a two-block Gram matrix.

    The Gram matrix is factored into vectors so the bound applies to reduced and
    unnormalized problems alike: the unpaired mass counts as success and every
    paired index contributes its pairwise maximum.
    """
    x = problem.x
    if len(x.blocks) != 2:
        return None
    eta1, eta2 = problem.priors
    frame = psd_factor(x.mat).conj().T
    n1 = x.blocks[0]
    v1, v2 = frame[:, :n1], frame[:, n1:]
    rho1 = DensityMatrix(mat=v1 @ v1.conj().T)
    rho2 = DensityMatrix(mat=v2 @ v2.conj().T)
    tr1, tr2 = x.block_traces()
    pair = canonical_pair(rho1, rho2)
    if pair.t == 0:
        return eta1 * tr1 + eta2 * tr2
    paired = projected_pair(pair)
    n_r = float(np.sum(paired.r_norms))
    n_s = float(np.sum(paired.s_norms))
    leftover = eta1 * (tr1 - n_r) + eta2 * (tr2 - n_s)
    return leftover + total_upper_bound(eta1, eta2, paired).total


def certificate_report(problem: SdpProblem, solution: UDSolution) -> CertificateReport:
    """Recompute feasibility, objective, gap and the closed-form bound from scratch."""
    x = problem.x
    y = solution.y
    check_partition(x, y)
    report = CertificateReport()
    scale = max(1.0, spectral_norm(x.mat))

    report.checks.append(
        Check(
            name="status",
            category="objective",
            value=0.0,
            tolerance=0.0,
            passed=solution.status == SolverStatus.OPTIMAL,
            message=f"solver status {SolverStatus(solution.status).value}",
        )
    )

    lowest = min_eigenvalue(residual(x, y))
    report.checks.append(
        Check(
            name="failure_gram_psd",
            category="psd",
            value=lowest,
            tolerance=-PSD_CHECK_TOL * scale,
            passed=lowest >= -PSD_CHECK_TOL * scale,
            message=f"min eig(X - Y) = {lowest:.3e}; X - Y >= 0 is required",
        )
    )
    for k, value in enumerate(y.min_block_eigenvalues()):
        report.checks.append(
            Check(
                name=f"success_block_{k}_psd",
                category="psd",
                value=value,
                tolerance=-PSD_CHECK_TOL * scale,
                passed=value >= -PSD_CHECK_TOL * scale,
                message=f"min eig(Y_{k}{k}) = {value:.3e}",
            )
        )

    objective = problem.objective(y)
    mismatch = abs(objective - solution.objective)
    report.checks.append(
        Check(
            name="objective",
            category="objective",
            value=mismatch,
            tolerance=OBJECTIVE_TOL * objective_scale(objective),
            passed=mismatch <= OBJECTIVE_TOL * objective_scale(objective),
            message=f"recomputed {objective:.12f} vs reported {solution.objective:.12f}",
        )
    )
    total_mismatch = abs(solution.p_star + solution.q_star - 1.0)
    report.checks.append(
        Check(
            name="p_plus_q",
            category="objective",
            value=total_mismatch,
            tolerance=1e-10,
            passed=total_mismatch <= 1e-10,
            message=f"P* + Q* = {solution.p_star + solution.q_star:.12f}",
        )
    )
    if math.isfinite(solution.dual_bound):
        gap = solution.dual_bound - objective
        report.checks.append(
            Check(
                name="dual_gap",
                category="objective",
                value=gap,
                tolerance=GAP_TOL * objective_scale(objective),
                passed=-GAP_TOL <= gap <= GAP_TOL * objective_scale(objective),
                message=f"certified gap {gap:.3e}",
            )
        )

    bound = two_state_bound(problem)
    if bound is not None:
        excess = objective - bound
        report.checks.append(
            Check(
                name="pairwise_bound",
                category="bound",
                value=excess,
                tolerance=BOUND_TOL,
                passed=excess <= BOUND_TOL,
                message=f"objective {objective:.12f} vs closed-form bound {bound:.12f}",
            )
        )
    return report


def certify(problem: SdpProblem, solution: UDSolution) -> CertificateReport:
    """Like :func:`certificate_report` but raises ``CertificationFailed`` on any failure."""
    report = certificate_report(problem, solution)
    if not report.passed:
        LOGGER.warning("Certification failed: %s", ", ".join(c.name for c in report.failures()))
    report.raise_for_failures()
    return report
