"""Closed-form bounds on the unambiguous success probability."""

from .inequalities import CauchySchwarzReport, cauchy_schwarz_gap
from .pairwise import (
    BoundReport,
    PairBound,
    RegionBound,
    SpecialCase,
    aggregate_special_case,
    breakpoints,
    middle_bound_saturable,
    pair_bound,
    pair_regions,
    total_upper_bound,
)
from .table import (
    Table1Row,
    raynal_gap,
    raynal_gap_endpoints,
    table1_bounds,
    table1_ensembles,
    table1_frame,
    table1_row,
)

__all__ = [
    "BoundReport",
    "CauchySchwarzReport",
    "PairBound",
    "RegionBound",
    "SpecialCase",
    "Table1Row",
    "aggregate_special_case",
    "breakpoints",
    "cauchy_schwarz_gap",
    "middle_bound_saturable",
    "pair_bound",
    "pair_regions",
    "raynal_gap",
    "raynal_gap_endpoints",
    "table1_bounds",
    "table1_ensembles",
    "table1_frame",
    "table1_row",
    "total_upper_bound",
]
