"""Semidefinite program for optimal unambiguous discrimination."""

from .barrier import solve
from .certify import CertificateReport, Check, certificate_report, certify, two_state_bound
from .problem import (
    FeasibilityResult,
    SdpProblem,
    SolverOptions,
    SolverStatus,
    UDSolution,
    feasibility,
    formulate,
)

__all__ = [
    "CertificateReport",
    "Check",
    "FeasibilityResult",
    "SdpProblem",
    "SolverOptions",
    "SolverStatus",
    "UDSolution",
    "certificate_report",
    "certify",
    "feasibility",
    "formulate",
    "solve",
    "two_state_bound",
]
