"""Rank-two example: exact optimum and two literature comparison bounds.

The example pairs two orthogonal canonical vectors of weight 1/2 per state,
``<r_m|s_m> = cos(theta_m) / 2``, so that the fidelity is
``F = (cos(theta1) + cos(theta2)) / 2``. The x-axis ``x = sqrt(eta1/eta2)``
splits into five regions with edges ``c1, c2, 1/c2, 1/c1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import logging
import math
from typing import List, Literal, Tuple

import numpy as np
import pandas as pd

from src.errors import InvalidAngles
from src.states.density import Ensemble


LOGGER = logging.getLogger(__name__)

RuSplit = Literal["fidelity", "table"]


@dataclass(frozen=True)
class Table1Row:
    x: float
    region: int
    P: float
    P_Ra: float
    P_Ru: float
    eta1: float
    eta2: float


def priors_from_ratio(x: float) -> Tuple[float, float]:
    """``(eta1, eta2)`` with ``sqrt(eta1/eta2) = x``."""
    eta2 = 1.0 / (1.0 + x * x)
    return 1.0 - eta2, eta2


def check_cosines(c1: float, c2: float) -> None:
    if not (math.isfinite(c1) and math.isfinite(c2)) or not (0.0 < c1 <= c2 < 1.0):
        raise InvalidAngles(f"need 0 < cos(theta1) <= cos(theta2) < 1, got ({c1}, {c2})")


def cosines_from_angles(theta1: float, theta2: float) -> Tuple[float, float]:
    c1, c2 = math.cos(theta1), math.cos(theta2)
    check_cosines(c1, c2)
    return c1, c2


def ra_edges(c1: float, c2: float) -> Tuple[float, float]:
    ra1 = (c1 * c1 + c2 * c2) / (c1 + c2)
    return ra1, 1.0 / ra1


def region_of(x: float, c1: float, c2: float) -> int:
    """Row id 1..5; boundary points belong to the row nearer the middle."""
    if x < c1:
        return 1
    if x < c2:
        return 2
    if x <= 1.0 / c2:
        return 3
    if x <= 1.0 / c1:
        return 4
    return 5


def _exact(region: int, eta1: float, eta2: float, c1: float, c2: float) -> float:
    sin1, sin2 = 1.0 - c1 * c1, 1.0 - c2 * c2
    root = math.sqrt(eta1 * eta2)
    if region == 1:
        return 0.5 * eta2 * (sin1 + sin2)
    if region == 2:
        return 0.5 - root * c1 + 0.5 * eta2 * sin2
    if region == 3:
        return 1.0 - root * (c1 + c2)
    if region == 4:
        return 0.5 - root * c1 + 0.5 * eta1 * sin2
    return 0.5 * eta1 * (sin1 + sin2)


def _raynal(x: float, eta1: float, eta2: float, c1: float, c2: float) -> float:
    ra1, ra2 = ra_edges(c1, c2)
    spread = (c1 - c2) ** 2 / (c1 * c1 + c2 * c2)
    sines = (1.0 - c1 * c1) + (1.0 - c2 * c2)
    if x < ra1:
        return 0.5 * eta2 * sines + 0.5 * eta1 * spread
    if x > ra2:
        return 0.5 * eta1 * sines + 0.5 * eta2 * spread
    return 1.0 - math.sqrt(eta1 * eta2) * (c1 + c2)


def _rudolph(x: float, eta1: float, eta2: float, c1: float, c2: float, split: RuSplit) -> float:
    fid = 0.5 * (c1 + c2)
    lower, upper = (fid, 1.0 / fid) if split == "fidelity" else ra_edges(c1, c2)
    if x < lower:
        return eta2 * (1.0 - fid * fid)
    if x > upper:
        return eta1 * (1.0 - fid * fid)
    return 1.0 - 2.0 * math.sqrt(eta1 * eta2) * fid


def table1_row(c1: float, c2: float, x: float, *, ru_split: RuSplit = "fidelity") -> Table1Row:
    check_cosines(c1, c2)
    if not (math.isfinite(x) and x >= 0.0):
        raise InvalidAngles(f"x must be finite and nonnegative, got {x}")
    if ru_split not in ("fidelity", "table"):
        raise ValueError(f"unknown ru_split {ru_split!r}")
    eta1, eta2 = priors_from_ratio(x)
    region = region_of(x, c1, c2)
    return Table1Row(
        x=x,
        region=region,
        P=_exact(region, eta1, eta2, c1, c2),
        P_Ra=_raynal(x, eta1, eta2, c1, c2),
        P_Ru=_rudolph(x, eta1, eta2, c1, c2, ru_split),
        eta1=eta1,
        eta2=eta2,
    )


def table1_bounds(
    theta1: float, theta2: float, x: float, *, ru_split: RuSplit = "fidelity"
) -> Table1Row:
    """Exact optimum ``P`` and the comparison bounds ``P_Ra``, ``P_Ru`` at one x.

    ``P_Ru`` switches at ``F`` and ``1/F`` by default. ``ru_split="table"``
    switches at ``Ra_1``/``Ra_2`` instead, which can fall below ``P``.
    """
    c1, c2 = cosines_from_angles(theta1, theta2)
    return table1_row(c1, c2, x, ru_split=ru_split)


def raynal_gap(x: float, c1: float, c2: float) -> float:
    """``P_Ra - P`` on ``[c1, Ra_1]``."""
    check_cosines(c1, c2)
    _, eta2 = priors_from_ratio(x)
    return 0.5 * eta2 * (2.0 * x * c1 - c1 * c1 - 2.0 * x * x * c1 * c2 / (c1 * c1 + c2 * c2))


def raynal_gap_endpoints(c1: float, c2: float) -> Tuple[float, float]:
    """Closed forms of the gap at ``x = c1`` and ``x = Ra_1``; both are nonnegative."""
    check_cosines(c1, c2)
    ra1, _ = ra_edges(c1, c2)
    _, eta2_c1 = priors_from_ratio(c1)
    _, eta2_ra = priors_from_ratio(ra1)
    diff = (c1 - c2) ** 2
    at_c1 = eta2_c1 * c1 * c1 * diff / (2.0 * (c1 * c1 + c2 * c2))
    at_ra1 = eta2_ra * c1 * c1 * diff / (2.0 * (c1 + c2) ** 2)
    return at_c1, at_ra1


def table1_grid(grid: int, x_max: float = 5.0) -> List[float]:
    """``x_i = x_max (i + 1) / grid`` for ``i = 0..grid-1``."""
    if grid < 5:
        raise ValueError(f"grid must be at least 5, got {grid}")
    return [x_max * (i + 1) / grid for i in range(grid)]


def table1_frame(
    c1: float, c2: float, grid: int, *, x_max: float = 5.0, ru_split: RuSplit = "fidelity"
) -> pd.DataFrame:
    rows = [asdict(table1_row(c1, c2, x, ru_split=ru_split)) for x in table1_grid(grid, x_max)]
    return pd.DataFrame(rows, columns=["x", "region", "P", "P_Ra", "P_Ru", "eta1", "eta2"])


def table1_ensembles(c1: float, c2: float) -> Tuple[Ensemble, Ensemble]:
    """Canonical vectors of the example in ``C^4``.

    ``r_1 = e1/sqrt2``, ``r_2 = e2/sqrt2``,
    ``s_1 = (c1 e1 + sin1 e3)/sqrt2``, ``s_2 = (c2 e2 + sin2 e4)/sqrt2``.
    """
    check_cosines(c1, c2)
    half = math.sqrt(0.5)
    sin1, sin2 = math.sqrt(1.0 - c1 * c1), math.sqrt(1.0 - c2 * c2)
    r = np.zeros((4, 2), dtype=np.complex128)
    r[0, 0] = r[1, 1] = half
    s = np.zeros((4, 2), dtype=np.complex128)
    s[0, 0], s[2, 0] = half * c1, half * sin1
    s[1, 1], s[3, 1] = half * c2, half * sin2
    return Ensemble(vectors=r), Ensemble(vectors=s)
