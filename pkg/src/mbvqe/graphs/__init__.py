"""Stabilizer-level graph-state tools: LC, Pauli-measurement rewriting, heavy-hex compilation."""

from .state import GraphError, GraphWithLC, local_complement, pauli_measure_graph
from .heavyhex import (
    HeavyHexLattice,
    HexClusterPlan,
    adjusted_stabilizers,
    apply_plan,
    check_cluster,
    eagle127,
    falcon27,
    heavy_hex_for_grid,
    hexcluster_pattern,
    honeycomb,
    load_coupling_map,
)
from .tableau import StabilizerTableau
from .prep import PrepCircuit, prep_circuit_mb, prep_circuit_naive
from .verify import PlanVerification, verify_exhaustive, verify_sampled

__all__ = [
    "GraphError",
    "GraphWithLC",
    "HeavyHexLattice",
    "HexClusterPlan",
    "PlanVerification",
    "PrepCircuit",
    "StabilizerTableau",
    "adjusted_stabilizers",
    "apply_plan",
    "check_cluster",
    "eagle127",
    "falcon27",
    "heavy_hex_for_grid",
    "hexcluster_pattern",
    "honeycomb",
    "load_coupling_map",
    "local_complement",
    "pauli_measure_graph",
    "prep_circuit_mb",
    "prep_circuit_naive",
    "verify_exhaustive",
    "verify_sampled",
]
