"""Unitary realization and POVM synthesis."""

from .povm import Povm, extract_povm
from .realize import Realization, RealizationReport, realize, verify_outputs

__all__ = ["Povm", "Realization", "RealizationReport", "extract_povm", "realize", "verify_outputs"]
