"""Trace Cauchy-Schwarz check on a two-block failure Gram matrix."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Any, Optional, Sequence

import numpy as np

from src.errors import NotPsd, PartitionMismatch
from src.numerics.linalg import PSD_TOL, ensure_hermitian, min_eigenvalue, spectral_norm


@dataclass(frozen=True)
class CauchySchwarzReport:
    lhs: float
    rhs: float
    fidelity: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - 1e-9

    @property
    def above_fidelity(self) -> Optional[bool]:
        if self.fidelity is None:
            return None
        return self.lhs >= self.fidelity - 1e-8


def cauchy_schwarz_gap(
    b: Any, partition: Sequence[int], *, fidelity: Optional[float] = None, tol: float = PSD_TOL
) -> CauchySchwarzReport:
    """``lhs = sqrt(Tr B11 Tr B22)`` and ``rhs = |Tr B12|`` for a PSD ``B``.

    When ``fidelity`` is given the report also says whether ``lhs >= F``,
    which holds for the failure Gram of the canonical decomposition.
    """
    mat = ensure_hermitian(b, name="failure Gram matrix")
    if len(partition) != 2 or sum(partition) != mat.shape[0]:
        raise PartitionMismatch(f"need a two-block partition of {mat.shape[0]}, got {list(partition)}")
    if mat.size and min_eigenvalue(mat) < -tol * max(1.0, spectral_norm(mat)):
        raise NotPsd(f"failure Gram matrix has min eigenvalue {min_eigenvalue(mat):.3e}")
    n1, n2 = int(partition[0]), int(partition[1])
    tr11 = max(0.0, float(np.real(np.trace(mat[:n1, :n1]))))
    tr22 = max(0.0, float(np.real(np.trace(mat[n1:, n1:]))))
    k = min(n1, n2)
    tr12 = abs(complex(np.trace(mat[:k, n1 : n1 + k])))
    return CauchySchwarzReport(lhs=math.sqrt(tr11 * tr22), rhs=tr12, fidelity=fidelity)
