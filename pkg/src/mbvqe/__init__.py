"""Measurement-based variational quantum eigensolver toolkit.

Graph-state ansatze with causal flow, a statevector and pattern simulator,
heavy-hex cluster compilation via Pauli measurements, lattice models, and a
VQE loop with finite-shot noise and Clifford data regression.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .models import SchwingerParams, XYParams, build_model, schwinger, xy_chain, xy_periodic4
from .pattern import (
    MeasurementPattern,
    OpenGraph,
    PatternError,
    determinism_check,
    edge_wise_decoration,
    execute,
    find_causal_flow,
    node_wise_decoration,
    tree_pattern,
)
from .pauli import PauliString, PauliSum

__all__ = [
    "MeasurementPattern",
    "OpenGraph",
    "PatternError",
    "PauliString",
    "PauliSum",
    "SchwingerParams",
    "XYParams",
    "__version__",
    "build_model",
    "determinism_check",
    "edge_wise_decoration",
    "execute",
    "find_causal_flow",
    "node_wise_decoration",
    "schwinger",
    "tree_pattern",
    "xy_chain",
    "xy_periodic4",
]
