"""Numerical laboratory for mixed-norm Strichartz estimates and local well-posedness."""

from .exponents import (
    INF,
    EquationParams,
    ExponentTriple,
    SelectionResult,
    critical_index,
    scaling_exponent,
    select_schrodinger_exponents,
    select_wave_exponents,
)
from .spectral import Field, TorusGrid, build_cutoff, lp_project, propagate

__version__ = "0.1.0"

__all__ = [
    "INF",
    "EquationParams",
    "ExponentTriple",
    "SelectionResult",
    "critical_index",
    "scaling_exponent",
    "select_schrodinger_exponents",
    "select_wave_exponents",
    "Field",
    "TorusGrid",
    "build_cutoff",
    "lp_project",
    "propagate",
]
