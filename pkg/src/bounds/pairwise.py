"""Closed-form upper bounds for one canonical pair and for their sum.

Each paired canonical index ``m`` is an independent two-pure-state problem with
squared norms ``r``, ``s`` and overlap ``f``. Its optimum depends on
``x = sqrt(eta1 / eta2)`` through three regions of the x-axis:

========  ===================  ===================================
region    x range              P_max
========  ===================  ===================================
low       [0, f/r)             eta2 (s - f^2/r)
middle    [f/r, s/f]           eta1 r + eta2 s - 2 sqrt(eta1 eta2) f
high      (s/f, inf)           eta1 (r - f^2/s)
========  ===================  ===================================

Adjacent formulas agree at the breakpoints, which are reported as ``middle``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np

from src.canonical.pair import CanonicalPair, normalized_canonical_operator, reduced_gram
from src.errors import EmptyReduction, InvalidOverlap, InvalidPriors
from src.numerics.linalg import min_eigenvalue


LOGGER = logging.getLogger(__name__)

Region = Literal["low", "middle", "high"]
REGIONS: Tuple[Region, ...] = ("low", "middle", "high")

OVERLAP_TOL = 1e-12
PRIOR_TOL = 1e-12


@dataclass(frozen=True)
class RegionBound:
    lo: float
    hi: float
    region: Region
    r: float
    s: float
    f: float

    @property
    def expression(self) -> str:
        return {
            "low": "eta2*(s - f^2/r)",
            "middle": "eta1*r + eta2*s - 2*sqrt(eta1*eta2)*f",
            "high": "eta1*(r - f^2/s)",
        }[self.region]

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def value_at(self, eta1: float, eta2: float) -> float:
        return _region_value(self.region, eta1, eta2, self.r, self.s, self.f)


@dataclass(frozen=True)
class PairBound:
    m: int
    region: Region
    value: float


@dataclass
class BoundReport:
    per_pair: List[PairBound]
    total: float
    breakpoints: List[float]
    comparison: Dict[str, float] = field(default_factory=dict)

    @property
    def regions(self) -> List[Region]:
        return [entry.region for entry in self.per_pair]

    def to_dict(self) -> Dict[str, object]:
        return {
            "per_pair": [
                {"m": entry.m, "region": entry.region, "P_max": entry.value} for entry in self.per_pair
            ],
            "total": self.total,
            "breakpoints": list(self.breakpoints),
            "comparison": dict(self.comparison),
        }


@dataclass(frozen=True)
class SpecialCase:
    kind: Literal["middle", "high", "low", "mixed"]
    value: Optional[float]


def _check_priors(eta1: float, eta2: float) -> float:
    if not (eta1 > 0.0 and eta2 > 0.0):
        raise InvalidPriors(f"priors must be positive, got ({eta1}, {eta2})")
    if abs(eta1 + eta2 - 1.0) > PRIOR_TOL:
        raise InvalidPriors(f"priors must sum to 1, got {eta1 + eta2!r}")
    return math.sqrt(eta1 / eta2)


def _check_triple(r: float, s: float, f: float) -> None:
    if not (r > 0.0 and s > 0.0):
        raise InvalidOverlap(f"norms must be positive, got r={r}, s={s}")
    if f < 0.0 or f > math.sqrt(r * s) + OVERLAP_TOL:
        raise InvalidOverlap(f"overlap f={f} violates 0 <= f <= sqrt(r s) = {math.sqrt(r * s)}")


def _region_value(region: Region, eta1: float, eta2: float, r: float, s: float, f: float) -> float:
    if region == "low":
        return eta2 * (s - f * f / r)
    if region == "high":
        return eta1 * (r - f * f / s)
    return eta1 * r + eta2 * s - 2.0 * math.sqrt(eta1 * eta2) * f


def _edges(r: float, s: float, f: float) -> Tuple[float, float]:
    if f <= 0.0:
        return 0.0, math.inf
    return f / r, s / f


def classify(x: float, r: float, s: float, f: float) -> Region:
    lower, upper = _edges(r, s, f)
    if x < lower:
        return "low"
    if x > upper:
        return "high"
    return "middle"


def pair_bound(eta1: float, eta2: float, r: float, s: float, f: float) -> Tuple[Region, float]:
    """Maximal success probability of one canonical pair and its region id."""
    x = _check_priors(eta1, eta2)
    _check_triple(r, s, f)
    region = classify(x, r, s, f)
    return region, _region_value(region, eta1, eta2, r, s, f)


def pair_regions(r: float, s: float, f: float) -> List[RegionBound]:
    """The three intervals of the x-axis for one pair; they tile ``[0, inf)``."""
    _check_triple(r, s, f)
    lower, upper = _edges(r, s, f)
    return [
        RegionBound(lo=0.0, hi=lower, region="low", r=r, s=s, f=f),
        RegionBound(lo=lower, hi=upper, region="middle", r=r, s=s, f=f),
        RegionBound(lo=upper, hi=math.inf, region="high", r=r, s=s, f=f),
    ]


def breakpoints(pair: CanonicalPair) -> List[float]:
    """Sorted distinct finite breakpoints ``{f_m/r_m, s_m/f_m}`` over paired indices."""
    points = set()
    for r, s, f in pair.paired_triples():
        for edge in _edges(r, s, f):
            if 0.0 < edge < math.inf:
                points.add(edge)
    return sorted(points)


def total_upper_bound(eta1: float, eta2: float, pair: CanonicalPair) -> BoundReport:
    """Sum of per-pair maxima over the paired canonical indices."""
    if pair.t == 0:
        raise EmptyReduction("no paired canonical vectors; the states are perfectly distinguishable")
    per_pair = []
    for m, (r, s, f) in enumerate(pair.paired_triples()):
        region, value = pair_bound(eta1, eta2, r, s, min(f, math.sqrt(r * s)))
        per_pair.append(PairBound(m=m, region=region, value=value))
    total = float(math.fsum(entry.value for entry in per_pair))
    return BoundReport(per_pair=per_pair, total=total, breakpoints=breakpoints(pair))


def aggregate_special_case(eta1: float, eta2: float, pair: CanonicalPair) -> SpecialCase:
    """Closed form of the total bound when every pair sits in the same region.

    ``middle``: eta1 sum(r) + eta2 sum(s) - 2 sqrt(eta1 eta2) F.
    ``high``: eta1 (sum(r) - Tr(rho1 C2)), ``low``: eta2 (sum(s) - Tr(rho2 C1)), where
    ``C1``/``C2`` project onto the normalized paired canonical vectors.
    """
    report = total_upper_bound(eta1, eta2, pair)
    kinds = set(report.regions)
    if len(kinds) != 1:
        return SpecialCase(kind="mixed", value=None)
    kind = kinds.pop()
    sum_r = float(np.sum(pair.r_norms[: pair.t]))
    sum_s = float(np.sum(pair.s_norms[: pair.t]))
    if kind == "middle":
        value = eta1 * sum_r + eta2 * sum_s - 2.0 * math.sqrt(eta1 * eta2) * float(np.sum(pair.paired_f))
    elif kind == "high":
        rho1 = pair.r_vectors @ pair.r_vectors.conj().T
        value = eta1 * (sum_r - float(np.real(np.trace(rho1 @ normalized_canonical_operator(pair, 2)))))
    else:
        rho2 = pair.s_vectors @ pair.s_vectors.conj().T
        value = eta2 * (sum_s - float(np.real(np.trace(rho2 @ normalized_canonical_operator(pair, 1)))))
    return SpecialCase(kind=kind, value=value)


def middle_bound_saturable(pair: CanonicalPair, eta1: float, eta2: float, *, tol: float = 1e-9) -> bool:
    """Whether the all-middle bound ``1 - 2 sqrt(eta1 eta2) F`` is attainable.

    Attaining every pair's maximum forces the failure blocks ``B11 = D/x`` and
    ``B22 = x D`` with ``D = diag(f)``; the remaining success blocks must stay PSD.
    """
    x = _check_priors(eta1, eta2)
    report = total_upper_bound(eta1, eta2, pair)
    if any(region != "middle" for region in report.regions):
        return False
    gram = reduced_gram(pair)
    d = np.diag(pair.paired_f).astype(np.complex128)
    y11 = gram.block(0, 0) - d / x
    y22 = gram.block(1, 1) - d * x
    return min_eigenvalue(y11) >= -tol and min_eigenvalue(y22) >= -tol
