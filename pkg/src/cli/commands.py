"""Implementations of the ``udisc`` subcommands.

Every ``cmd_*`` function returns the text destined for stdout. Failures
propagate as :class:`~src.errors.UdiscError` so ``main`` can map them onto
exit codes.
"""

from __future__ import annotations

from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.bounds.pairwise import (
    aggregate_special_case,
    breakpoints,
    classify,
    middle_bound_saturable,
    pair_regions,
    total_upper_bound,
)
from src.bounds.table import check_cosines, cosines_from_angles, table1_ensembles, table1_frame
from src.canonical.pair import canonical_pair, fidelity_direct, projected_pair, reduce_two_state_problem
from src.cli.problem_file import (
    ResultRecord,
    encode_matrix,
    load_problem,
    load_solution,
    priors_match,
    problem_to_dict,
)
from src.errors import (
    CompletenessViolation,
    InfeasiblePair,
    InvalidPriors,
    NumericalLimit,
    ValidationError,
)
from src.gram.block import BlockGram, build_block_gram
from src.numerics.linalg import RANK_TOL
from src.sdp.barrier import solve
from src.sdp.certify import CertificateReport, Check, certificate_report
from src.sdp.problem import SolverOptions, SolverStatus, UDSolution, feasibility, formulate
from src.states.density import Ensemble, UDProblem
from src.states.random import random_mixed_problem, random_pure_pair_problem
from src.states.support import intersection_basis, support_intersection_dim
from src.synthesis.povm import Povm, extract_povm
from src.synthesis.realize import REALIZATION_TOL, Realization, realize, verify_outputs
from src.utils.config import AppConfig
from src.utils.io import dataframe_to_csv, dump_json
from src.utils.seed import make_rng


LOGGER = logging.getLogger(__name__)

POVM_OBJECTIVE_TOL = 1e-7


@dataclass
class CommandContext:
    config: AppConfig
    flags: Dict[str, Any] = field(default_factory=dict)
    csv: bool = False

    @property
    def workers(self) -> int:
        return max(1, int(self.config.get("cli.workers", 1)))

    @property
    def rank_tol(self) -> float:
        return float(self.config.get("numerics.rank_tol", RANK_TOL))


@dataclass(frozen=True)
class SolveOutcome:
    problem: UDProblem
    x: BlockGram
    solution: UDSolution
    ensembles: Tuple[Ensemble, ...]
    realization: Realization
    povm: Povm
    record: ResultRecord


def solver_options(ctx: CommandContext, file_options: Optional[Dict[str, Any]] = None) -> SolverOptions:
    """Config, then problem-file options, then command-line flags."""
    merged: Dict[str, Any] = dict(file_options or {})
    merged.update({key: value for key, value in ctx.flags.items() if value is not None})
    try:
        return SolverOptions.from_config(ctx.config, **merged)
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"invalid solver options: {exc}") from exc


def _require_two_states(problem: UDProblem, command: str) -> None:
    if problem.size != 2:
        raise ValidationError(f"{command} needs exactly two states, got {problem.size}")


def solve_optimum(problem: UDProblem, options: SolverOptions) -> Tuple[BlockGram, UDSolution, Tuple[Ensemble, ...]]:
    """Build the Gram matrix of the problem's ensembles and solve the SDP."""
    ensembles = tuple(problem.state_ensembles(options.rank_tol))
    x = build_block_gram(ensembles)
    solution = solve(formulate(x, problem.priors), options)
    if solution.status != SolverStatus.OPTIMAL:
        raise NumericalLimit(
            f"solver stopped with status {solution.status.value} (certified gap {solution.dual_gap:.3e})"
        )
    return x, solution, ensembles


def bound_section(problem: UDProblem) -> Optional[Dict[str, Any]]:
    """Closed-form bound report of a two-state problem; ``None`` otherwise."""
    if problem.size != 2:
        return None
    eta1, eta2 = problem.priors
    reduction = reduce_two_state_problem(problem.states[0], problem.states[1], eta1, eta2)
    pair = reduction.pair
    fid = pair.fidelity
    section: Dict[str, Any] = {
        "x": math.sqrt(eta1 / eta2),
        "fidelity": fid,
        "leftover": reduction.leftover,
        "middle_bound": 1.0 - 2.0 * math.sqrt(eta1 * eta2) * fid,
        "per_pair": [],
        "breakpoints": [],
        "total": 0.0,
        "upper_bound": reduction.leftover,
        "special_case": None,
        "middle_saturable": None,
    }
    if reduction.reduced_pair is None:
        return section

    pair = reduction.reduced_pair
    report = total_upper_bound(eta1, eta2, pair)
    per_pair = []
    for entry, (r, s, f) in zip(report.per_pair, pair.paired_triples()):
        middle = pair_regions(r, s, min(f, math.sqrt(r * s)))[1]
        per_pair.append(
            {
                "m": entry.m,
                "r": r,
                "s": s,
                "f": f,
                "region": entry.region,
                "P_max": entry.value,
                "lower_edge": middle.lo,
                "upper_edge": middle.hi,
            }
        )
    special = aggregate_special_case(eta1, eta2, pair)
    section.update(
        per_pair=per_pair,
        breakpoints=report.breakpoints,
        total=report.total,
        upper_bound=reduction.leftover + report.total,
        special_case={"kind": special.kind, "value": special.value},
        middle_saturable=middle_bound_saturable(pair, eta1, eta2),
    )
    return section


def solve_problem(problem: UDProblem, options: SolverOptions) -> SolveOutcome:
    """Solve, realize and cross-check one problem; the result record carries every residual."""
    x, solution, ensembles = solve_optimum(problem, options)
    real = realize(x, solution.y, ensembles)
    realization_report = verify_outputs(real)
    povm = extract_povm(real, ensembles, problem.priors)

    states = [ens.density() for ens in ensembles]
    check = feasibility(x, solution.y)
    residuals: Dict[str, float] = {
        "psd_violation": max(0.0, -check.min_eig),
        "p_plus_q": abs(solution.p_star + solution.q_star - 1.0),
        "povm_objective": abs(povm.total_success - solution.p_star),
    }
    residuals.update(realization_report.residuals)
    residuals.update({f"povm_{key}": value for key, value in povm.residuals(states).items()})

    bounds = bound_section(problem)
    regions: List[str] = []
    if bounds is not None:
        regions = [entry["region"] for entry in bounds["per_pair"]]
        bounds["comparison"] = {"P_star": solution.p_star, "gap_to_bound": bounds["upper_bound"] - solution.p_star}

    x_traces = x.block_traces()
    p_k = [tr_y / tr_x if tr_x > 0 else 0.0 for tr_y, tr_x in zip(solution.y.traces(), x_traces)]
    record = ResultRecord(
        status=solution.status.value,
        p_star=solution.p_star,
        q_star=solution.q_star,
        success_probabilities=p_k,
        priors=list(problem.priors),
        y_blocks=list(solution.y.blocks),
        iterations=solution.iterations,
        dual_gap=solution.dual_gap,
        dual_bound=solution.dual_bound,
        bounds=bounds,
        regions=regions,
        residuals=residuals,
        wall_time=solution.wall_time,
    )
    return SolveOutcome(
        problem=problem,
        x=x,
        solution=solution,
        ensembles=ensembles,
        realization=real,
        povm=povm,
        record=record,
    )


# Commands ----------------------------------------------------------------


def cmd_solve(problem_path: str | Path, ctx: CommandContext) -> str:
    problem_file = load_problem(problem_path, rank_tol=ctx.rank_tol)
    problem = problem_file.problem
    LOGGER.info("Solving %s: %d states in dimension %d", problem_path, problem.size, problem.dim)
    outcome = solve_problem(problem, solver_options(ctx, problem_file.options))
    return dump_json(outcome.record.to_dict())


def cmd_bounds(problem_path: str | Path, ctx: CommandContext) -> str:
    problem = load_problem(problem_path, rank_tol=ctx.rank_tol).problem
    _require_two_states(problem, "bounds")
    section = bound_section(problem)
    if ctx.csv:
        columns = ["m", "r", "s", "f", "region", "P_max", "lower_edge", "upper_edge"]
        return dataframe_to_csv(pd.DataFrame(section["per_pair"], columns=columns))
    section["priors"] = list(problem.priors)
    return dump_json(section)


def cmd_canonical(problem_path: str | Path, ctx: CommandContext) -> str:
    problem = load_problem(problem_path, rank_tol=ctx.rank_tol).problem
    _require_two_states(problem, "canonical")
    rho1, rho2 = problem.states
    pair = canonical_pair(rho1, rho2, rank_tol=ctx.rank_tol)

    overlaps = pair.overlaps()
    expected = np.zeros(overlaps.shape, dtype=np.complex128)
    np.fill_diagonal(expected[: pair.f.size, : pair.f.size], pair.f)
    r, s = pair.r_vectors, pair.s_vectors
    residuals = {
        "overlap": float(np.max(np.abs(overlaps - expected))) if overlaps.size else 0.0,
        "rho1_reconstruction": float(np.max(np.abs(r @ r.conj().T - rho1.mat))),
        "rho2_reconstruction": float(np.max(np.abs(s @ s.conj().T - rho2.mat))),
    }

    if ctx.csv:
        size = max(r.shape[1], s.shape[1])
        rows = []
        for m in range(size):
            rows.append(
                {
                    "m": m,
                    "f": float(pair.f[m]) if m < pair.f.size else 0.0,
                    "r_norm": float(pair.r_norms[m]) if m < pair.r_norms.size else 0.0,
                    "s_norm": float(pair.s_norms[m]) if m < pair.s_norms.size else 0.0,
                    "paired": m < pair.t,
                }
            )
        return dataframe_to_csv(pd.DataFrame(rows, columns=["m", "f", "r_norm", "s_norm", "paired"]))

    payload = {
        "t": pair.t,
        "f": pair.f.tolist(),
        "r_norms": pair.r_norms.tolist(),
        "s_norms": pair.s_norms.tolist(),
        "fidelity": pair.fidelity,
        "fidelity_direct": fidelity_direct(rho1, rho2),
        "support_intersection_dim": support_intersection_dim(rho1, rho2),
        "support_intersection": encode_matrix(intersection_basis(rho1, rho2).T),
        "r_vectors": encode_matrix(r.T),
        "s_vectors": encode_matrix(s.T),
        "residuals": residuals,
    }
    return dump_json(payload)


def _table1_cosines(
    theta1: Optional[float], theta2: Optional[float], cos1: Optional[float], cos2: Optional[float]
) -> Tuple[float, float]:
    if cos1 is not None and cos2 is not None:
        check_cosines(cos1, cos2)
        return cos1, cos2
    if theta1 is not None and theta2 is not None:
        return cosines_from_angles(theta1, theta2)
    raise ValidationError("table1 needs --theta1/--theta2 or --cos1/--cos2")


def table1_with_sdp(
    c1: float,
    c2: float,
    grid: int,
    options: SolverOptions,
    *,
    x_max: float = 5.0,
    ru_split: str = "fidelity",
    workers: int = 1,
    with_sdp: bool = True,
) -> pd.DataFrame:
    """Analytic Table-1 columns plus ``P_sdp`` from a full solve at every grid point."""
    try:
        frame = table1_frame(c1, c2, grid, x_max=x_max, ru_split=ru_split)  # type: ignore[arg-type]
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if not with_sdp:
        return frame

    x = build_block_gram(table1_ensembles(c1, c2))

    def optimum(priors: Tuple[float, float]) -> float:
        solution = solve(formulate(x, priors), options)
        if solution.status != SolverStatus.OPTIMAL:
            raise NumericalLimit(f"solver status {solution.status.value} at priors {priors}")
        return solution.p_star

    points = list(zip(frame["eta1"].tolist(), frame["eta2"].tolist()))
    # map() keeps grid order whatever the completion order.
    with ThreadPoolExecutor(max_workers=workers) as pool:
        frame["P_sdp"] = list(pool.map(optimum, points))
    LOGGER.info("Rank-two table: %d grid points solved with %d worker(s)", len(points), workers)
    return frame


def cmd_table1(
    ctx: CommandContext,
    *,
    theta1: Optional[float] = None,
    theta2: Optional[float] = None,
    cos1: Optional[float] = None,
    cos2: Optional[float] = None,
    grid: Optional[int] = None,
    x_max: Optional[float] = None,
    ru_split: str = "fidelity",
    with_sdp: bool = True,
) -> str:
    c1, c2 = _table1_cosines(theta1, theta2, cos1, cos2)
    frame = table1_with_sdp(
        c1,
        c2,
        int(grid if grid is not None else ctx.config.get("table1.grid", 50)),
        solver_options(ctx),
        x_max=float(x_max if x_max is not None else ctx.config.get("table1.x_max", 5.0)),
        ru_split=ru_split,
        workers=ctx.workers,
        with_sdp=with_sdp,
    )
    if ctx.csv:
        return dataframe_to_csv(frame)
    return dump_json({"cos_theta1": c1, "cos_theta2": c2, "rows": frame.to_dict(orient="records")})


def eta_values(spec: Optional[str], default_count: int) -> List[float]:
    """``N`` gives ``eta1 = i/(N+1)`` for ``i = 1..N``; a comma list is taken literally."""
    text = str(default_count) if spec is None else str(spec).strip()
    try:
        if "," in text:
            values = [float(item) for item in text.split(",") if item.strip()]
        else:
            count = int(text)
            if count < 1:
                raise ValidationError(f"eta grid must have at least one point, got {count}")
            values = [i / (count + 1) for i in range(1, count + 1)]
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot read eta grid {text!r}") from exc
    for value in values:
        if not (0.0 < value < 1.0):
            raise InvalidPriors(f"eta1 values must lie in (0, 1), got {value}")
    return values


def scan_frame(problem: UDProblem, etas: Sequence[float], options: SolverOptions, *, workers: int = 1) -> Tuple[pd.DataFrame, List[float]]:
    """Optimum and active pair regions along a sweep of ``eta1``."""
    _require_two_states(problem, "scan")
    pair = canonical_pair(problem.states[0], problem.states[1], rank_tol=options.rank_tol)
    if pair.t:
        pair = projected_pair(pair)
    points = breakpoints(pair) if pair.t else []
    triples = pair.paired_triples()

    def row(eta1: float) -> Dict[str, Any]:
        priors = (eta1, 1.0 - eta1)
        _, solution, _ = solve_optimum(problem.with_priors(priors), options)
        x = math.sqrt(eta1 / (1.0 - eta1))
        section = bound_section(problem.with_priors(priors))
        return {
            "eta1": eta1,
            "x": x,
            "P_star": solution.p_star,
            "Q_star": solution.q_star,
            "upper_bound": section["upper_bound"] if section else math.nan,
            "segment": bisect_left(points, x),
            "regions": ";".join(classify(x, r, s, min(f, math.sqrt(r * s))) for r, s, f in triples),
        }

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, etas))
    columns = ["eta1", "x", "P_star", "Q_star", "upper_bound", "segment", "regions"]
    return pd.DataFrame(rows, columns=columns), points


def cmd_scan(problem_path: str | Path, ctx: CommandContext, eta_grid: Optional[str] = None) -> str:
    problem_file = load_problem(problem_path, rank_tol=ctx.rank_tol)
    etas = eta_values(eta_grid, int(ctx.config.get("scan.eta_grid", 99)))
    frame, points = scan_frame(
        problem_file.problem, etas, solver_options(ctx, problem_file.options), workers=ctx.workers
    )
    if ctx.csv:
        return dataframe_to_csv(frame)
    rows = frame.to_dict(orient="records")
    for entry in rows:
        entry["regions"] = entry["regions"].split(";") if entry["regions"] else []
    return dump_json({"breakpoints": points, "segments": len(points) + 1, "rows": rows})


def _realization_checks(
    x: BlockGram, solution: UDSolution, ensembles: Sequence[Ensemble], priors: Sequence[float]
) -> List[Check]:
    try:
        real = realize(x, solution.y, ensembles)
    except InfeasiblePair as exc:
        return [Check("realization", "realization", math.inf, REALIZATION_TOL, False, str(exc))]

    checks = [
        Check(
            name=f"realization_{key}",
            category="realization",
            value=value,
            tolerance=REALIZATION_TOL,
            passed=value <= REALIZATION_TOL,
            message=f"{key} residual {value:.3e}",
        )
        for key, value in verify_outputs(real).residuals.items()
    ]
    try:
        povm = extract_povm(real, ensembles, priors)
    except CompletenessViolation as exc:
        checks.append(Check("povm_completeness", "realization", math.inf, REALIZATION_TOL, False, str(exc)))
        return checks

    states = [ens.density() for ens in ensembles]
    for key, value in povm.residuals(states).items():
        checks.append(
            Check(
                name=f"povm_{key}",
                category="realization",
                value=value,
                tolerance=REALIZATION_TOL,
                passed=value <= REALIZATION_TOL,
                message=f"POVM {key} residual {value:.3e}",
            )
        )
    mismatch = abs(povm.total_success - solution.p_star)
    checks.append(
        Check(
            name="povm_objective",
            category="objective",
            value=mismatch,
            tolerance=POVM_OBJECTIVE_TOL,
            passed=mismatch <= POVM_OBJECTIVE_TOL,
            message=f"sum_k eta_k Tr(E_k rho_k) = {povm.total_success:.12f} vs P* = {solution.p_star:.12f}",
        )
    )
    return checks


def cmd_verify(
    problem_path: str | Path, solution_path: str | Path, ctx: CommandContext
) -> Tuple[str, CertificateReport]:
    """Recheck a solution file against its problem; the caller decides the exit code."""
    problem = load_problem(problem_path, rank_tol=ctx.rank_tol).problem
    solution, priors = load_solution(solution_path)
    if not priors_match(problem.priors, priors):
        raise InvalidPriors(f"solution priors {list(priors)} differ from problem priors {list(problem.priors)}")

    ensembles = tuple(problem.state_ensembles(ctx.rank_tol))
    x = build_block_gram(ensembles)
    report = certificate_report(formulate(x, problem.priors), solution)
    if not any(check.category == "psd" for check in report.failures()):
        report.checks.extend(_realization_checks(x, solution, ensembles, problem.priors))
    else:
        LOGGER.warning("Skipping realization checks: the solution is not feasible")

    payload = {"passed": report.passed, "checks": [check.to_dict() for check in report.checks]}
    return dump_json(payload), report


def cmd_generate(
    kind: str,
    *,
    dim: int = 2,
    rank: int = 1,
    count: int = 2,
    seed: Optional[int] = None,
) -> str:
    """Random valid problem file for tests and experiments."""
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    rng = make_rng(seed)
    if kind == "pure-pair":
        problem = random_pure_pair_problem(dim, rng)
    elif kind == "mixed":
        if not 1 <= rank <= dim:
            raise ValidationError(f"rank must lie in [1, {dim}], got {rank}")
        if count < 1:
            raise ValidationError(f"count must be positive, got {count}")
        problem = random_mixed_problem(dim, rank, rng, count=count)
    else:
        raise ValidationError(f"unknown problem kind {kind!r}")
    return dump_json(problem_to_dict(problem))
