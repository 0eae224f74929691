"""Error hierarchy shared by the library and the command line.

Every error carries a stable machine-readable ``code`` and the process
``exit_code`` the CLI uses when the error escapes a command.
"""

from __future__ import annotations

from typing import Iterable, List, Optional


class UdiscError(Exception):
    code = "udisc-error"
    exit_code = 1

    def __init__(self, message: str, *, details: Optional[Iterable[str]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details: List[str] = list(details or [])

    def __str__(self) -> str:
        if not self.details:
            return self.message
        return f"{self.message} ({'; '.join(self.details)})"


# Parsing -----------------------------------------------------------------


class ParseError(UdiscError):
    code = "parse-error"
    exit_code = 2

    def __init__(self, message: str, *, location: Optional[str] = None) -> None:
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


# Validation --------------------------------------------------------------


class ValidationError(UdiscError, ValueError):
    code = "validation-error"
    exit_code = 3


class NonHermitian(ValidationError):
    code = "non-hermitian"


class NonFinite(ValidationError):
    code = "non-finite"


class NotPsd(ValidationError):
    code = "not-psd"


class TraceNotOne(ValidationError):
    code = "trace-not-one"


class DimensionMismatch(ValidationError):
    code = "dimension-mismatch"


class PartitionMismatch(ValidationError):
    code = "partition-mismatch"


class NotUnitary(ValidationError):
    code = "not-unitary"


class EmptyReduction(ValidationError):
    code = "empty-reduction"


class InvalidOverlap(ValidationError):
    code = "invalid-overlap"


class InvalidAngles(ValidationError):
    code = "invalid-angles"


class InvalidPriors(ValidationError):
    code = "invalid-priors"


class InfeasiblePair(ValidationError):
    code = "infeasible-pair"


class CompletenessViolation(ValidationError):
    code = "completeness-violation"


# Solver ------------------------------------------------------------------


class SolverError(UdiscError):
    code = "solver-error"
    exit_code = 4


class NoConvergence(SolverError):
    code = "no-convergence"


class NumericalLimit(SolverError):
    code = "numerical-limit"


# Verification ------------------------------------------------------------

VERIFY_EXIT_CODES = {
    "psd": 5,
    "objective": 6,
    "bound": 7,
    "realization": 8,
}


class VerificationError(UdiscError):
    code = "verification-failed"
    exit_code = 5


class CertificationFailed(VerificationError):
    code = "certification-failed"

    def __init__(self, check: str, failures: Iterable[str]) -> None:
        self.check = check
        self.exit_code = VERIFY_EXIT_CODES.get(check, VerificationError.exit_code)
        super().__init__(f"{check} check failed", details=failures)
