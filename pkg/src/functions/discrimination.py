from __future__ import annotations

from typing import Any, Dict, Optional, Sequence

import pandas as pd

from src.cli.commands import CommandContext, bound_section, solve_problem, solver_options, table1_with_sdp
from src.states.density import UDProblem, validate_density
from src.utils.config import load_config


def _problem(densities: Sequence[Any], priors: Sequence[float]) -> UDProblem:
    states = tuple(validate_density(rho) for rho in densities)
    return UDProblem(states=states, priors=tuple(float(p) for p in priors))


def solve_states(
    densities: Sequence[Any], priors: Sequence[float], config_path: Optional[str] = None, **options: Any
) -> Dict[str, Any]:
    """Return the result record (P*, Q*, p_k, Y blocks, bounds, residuals) as a dict."""
    ctx = CommandContext(config=load_config(config_path), flags=options)
    return solve_problem(_problem(densities, priors), solver_options(ctx)).record.to_dict()


def pair_bounds(densities: Sequence[Any], priors: Sequence[float]) -> Optional[Dict[str, Any]]:
    """Return the closed-form bound report of a two-state problem."""
    return bound_section(_problem(densities, priors))


def table1(cos1: float, cos2: float, grid: int = 50, *, with_sdp: bool = True, **options: Any) -> pd.DataFrame:
    """Return the rank-two comparison table with columns x, region, P, P_Ra, P_Ru, eta1, eta2[, P_sdp]."""
    ctx = CommandContext(config=load_config(), flags=options)
    return table1_with_sdp(cos1, cos2, grid, solver_options(ctx), with_sdp=with_sdp)
