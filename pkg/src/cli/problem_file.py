"""Problem and solution files.

Both are JSON (or YAML) mappings with ``"version": 1``. Complex numbers are
``[re, im]`` pairs; a bare number is read as a real entry.

Problem file::

    {"version": 1,
     "states": [{"density": [[[re, im], ...], ...]},
                {"ensemble": [[[re, im], ...], ...]}],
     "priors": [0.5, 0.5],
     "options": {"tol": 1e-8, "max_iter": 500}}

An ``ensemble`` lists the (unnormalized) vectors of one state. The output of
``udisc solve`` is a valid solution file for ``udisc verify``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ParseError, ValidationError
from src.gram.block import QuasiDiagonal
from src.numerics.linalg import RANK_TOL, ComplexMatrix
from src.sdp.problem import SolverStatus, UDSolution
from src.states.density import (
    DensityMatrix,
    Ensemble,
    UDProblem,
    ensemble_state,
    spectral_ensemble,
    validate_density,
)
from src.utils.io import read_structured

FORMAT_VERSION = 1
OPTION_KEYS = ("tol", "max_iter", "barrier_shrink", "init_scale")
PROBLEM_KEYS = {"version", "states", "priors", "options", "description"}


@dataclass(frozen=True)
class ProblemFile:
    problem: UDProblem
    options: Dict[str, Any] = field(default_factory=dict)
    source: str = "<memory>"
    version: int = FORMAT_VERSION


@dataclass
class ResultRecord:
    """Everything ``udisc solve`` reports; ``to_dict`` is also the solution-file layout."""

    status: str
    p_star: float
    q_star: float
    success_probabilities: List[float]
    priors: List[float]
    y_blocks: List[ComplexMatrix]
    iterations: int
    dual_gap: float
    dual_bound: float
    bounds: Optional[Dict[str, Any]] = None
    regions: List[str] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": FORMAT_VERSION,
            "kind": "solution",
            "status": self.status,
            "P_star": self.p_star,
            "Q_star": self.q_star,
            "p_k": list(self.success_probabilities),
            "priors": list(self.priors),
            "partition": [int(b.shape[0]) for b in self.y_blocks],
            "Y": [encode_matrix(b) for b in self.y_blocks],
            "iterations": self.iterations,
            "dual_gap": self.dual_gap,
            "dual_bound": self.dual_bound,
            "bounds": self.bounds,
            "regions": list(self.regions),
            "residuals": dict(self.residuals),
            "wall_time": self.wall_time,
        }


# Decoding ----------------------------------------------------------------


def _complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise ParseError("expected a number or an [re, im] pair", location=where)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(float(re), float(im))
    raise ParseError("expected a number or an [re, im] pair", location=where)


def _vector(values: Any, where: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise ParseError("expected a nonempty list of entries", location=where)
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(values)], dtype=np.complex128)


def parse_matrix(rows: Any, where: str) -> ComplexMatrix:
    """Nested ``[[[re, im], ...], ...]`` rows to a complex matrix."""
    if not isinstance(rows, list) or not rows:
        raise ParseError("expected a nonempty list of rows", location=where)
    parsed = [_vector(row, f"{where}[{i}]") for i, row in enumerate(rows)]
    widths = {row.size for row in parsed}
    if len(widths) != 1:
        raise ParseError(f"rows have different lengths {sorted(widths)}", location=where)
    return np.vstack(parsed)


def _located(exc: ValidationError, where: str) -> ValidationError:
    located = type(exc)(f"{where}: {exc.message}", details=exc.details)
    if hasattr(exc, "violations"):
        located.violations = exc.violations  # type: ignore[attr-defined]
    return located


def _parse_state(entry: Any, where: str) -> Tuple[DensityMatrix, Optional[Ensemble]]:
    if not isinstance(entry, dict) or len(entry) != 1:
        raise ParseError('expected {"density": ...} or {"ensemble": ...}', location=where)
    (kind, payload), = entry.items()
    try:
        if kind == "density":
            return validate_density(parse_matrix(payload, f"{where}.density")), None
        if kind == "ensemble":
            if not isinstance(payload, list) or not payload:
                raise ParseError("expected a nonempty list of vectors", location=f"{where}.ensemble")
            vectors = [_vector(v, f"{where}.ensemble[{i}]") for i, v in enumerate(payload)]
            ensemble = Ensemble.from_vectors(vectors)
            return ensemble_state(ensemble), ensemble
    except ValidationError as exc:
        raise _located(exc, where) from exc
    raise ParseError(f"unknown state kind {kind!r}", location=where)


def _parse_options(raw: Any, where: str) -> Dict[str, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ParseError("expected a mapping", location=where)
    options: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in OPTION_KEYS:
            raise ParseError(f"unknown option {key!r}", location=f"{where}.{key}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError("expected a number", location=f"{where}.{key}")
        options[key] = int(value) if key == "max_iter" else float(value)
    return options


def _check_version(data: Dict[str, Any], source: str) -> None:
    version = data.get("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r}, expected {FORMAT_VERSION}", location=f"{source}:version")


def parse_problem(data: Any, source: str = "<memory>", *, rank_tol: float = RANK_TOL) -> ProblemFile:
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", location=source)
    _check_version(data, source)
    unknown = sorted(set(data) - PROBLEM_KEYS)
    if unknown:
        raise ParseError(f"unknown field {unknown[0]!r}", location=f"{source}:{unknown[0]}")

    states_raw = data.get("states")
    if not isinstance(states_raw, list) or not states_raw:
        raise ParseError("expected a nonempty list of states", location=f"{source}:states")
    parsed = [_parse_state(entry, f"{source}:states[{k}]") for k, entry in enumerate(states_raw)]

    priors_raw = data.get("priors")
    if not isinstance(priors_raw, list):
        raise ParseError("expected a list of priors", location=f"{source}:priors")
    priors = [_real(value, f"{source}:priors[{k}]") for k, value in enumerate(priors_raw)]

    states = tuple(state for state, _ in parsed)
    ensembles = None
    if any(ens is not None for _, ens in parsed):
        ensembles = tuple(
            ens if ens is not None else spectral_ensemble(state, rank_tol) for state, ens in parsed
        )
    problem = UDProblem(states=states, priors=tuple(priors), ensembles=ensembles)
    options = _parse_options(data.get("options"), f"{source}:options")
    return ProblemFile(problem=problem, options=options, source=source)


def load_problem(path: str | Path, *, rank_tol: float = RANK_TOL) -> ProblemFile:
    return parse_problem(read_structured(path), str(path), rank_tol=rank_tol)


def _real(value: Any, where: str) -> float:
    if value in ("inf", "-inf", "nan"):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("expected a real number", location=where)
    return float(value)


def _number(data: Dict[str, Any], key: str, source: str, default: Optional[float] = None) -> float:
    return _real(data.get(key, default), f"{source}:{key}")


def parse_solution(data: Any, source: str = "<memory>") -> Tuple[UDSolution, Tuple[float, ...]]:
    """Decode a solution file into the solver result and the priors it was solved for."""
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", location=source)
    _check_version(data, source)
    blocks_raw = data.get("Y")
    if not isinstance(blocks_raw, list):
        raise ParseError("expected a list of blocks", location=f"{source}:Y")
    blocks = []
    for k, raw in enumerate(blocks_raw):
        if raw == []:
            blocks.append(np.zeros((0, 0), dtype=np.complex128))
            continue
        mat = parse_matrix(raw, f"{source}:Y[{k}]")
        if mat.shape[0] != mat.shape[1]:
            raise ParseError(f"block is not square: shape {mat.shape}", location=f"{source}:Y[{k}]")
        blocks.append(0.5 * (mat + mat.conj().T))
    y = QuasiDiagonal.from_blocks(blocks)

    try:
        status = SolverStatus(data.get("status"))
    except ValueError as exc:
        raise ParseError(f"unknown status {data.get('status')!r}", location=f"{source}:status") from exc
    priors_raw = data.get("priors")
    if not isinstance(priors_raw, list):
        raise ParseError("expected a list of priors", location=f"{source}:priors")
    priors = tuple(_real(p, f"{source}:priors[{k}]") for k, p in enumerate(priors_raw))

    p_star = _number(data, "P_star", source)
    solution = UDSolution(
        y=y,
        p_star=p_star,
        q_star=_number(data, "Q_star", source, default=1.0 - p_star),
        dual_gap=_number(data, "dual_gap", source, default=math.inf),
        status=status,
        iterations=int(_number(data, "iterations", source, default=0)),
        dual_bound=_number(data, "dual_bound", source, default=math.inf),
    )
    return solution, priors


def load_solution(path: str | Path) -> Tuple[UDSolution, Tuple[float, ...]]:
    return parse_solution(read_structured(path), str(path))


# Encoding ----------------------------------------------------------------


def encode_complex(value: complex) -> List[float]:
    return [float(np.real(value)), float(np.imag(value))]


def encode_matrix(mat: Any) -> List[List[List[float]]]:
    arr = np.asarray(mat, dtype=np.complex128)
    return [[encode_complex(v) for v in row] for row in arr]


def problem_to_dict(problem: UDProblem, options: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Problem-file layout; states with ensembles are written as ensembles."""
    states: List[Dict[str, Any]] = []
    for k, state in enumerate(problem.states):
        if problem.ensembles is not None:
            vectors = problem.ensembles[k].vectors
            states.append({"ensemble": [[encode_complex(v) for v in col] for col in vectors.T]})
        else:
            states.append({"density": encode_matrix(state.mat)})
    payload: Dict[str, Any] = {
        "version": FORMAT_VERSION,
        "states": states,
        "priors": [float(p) for p in problem.priors],
    }
    if options:
        payload["options"] = dict(options)
    return payload


def priors_match(expected: Sequence[float], found: Sequence[float], tol: float = 1e-12) -> bool:
    return len(expected) == len(found) and all(abs(a - b) <= tol for a, b in zip(expected, found))
