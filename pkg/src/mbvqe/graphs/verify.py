"""Checks of heavy-hex cluster extraction against independent simulators."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..pauli import PauliSum
from ..statevector import MAX_PATTERN_QUBITS, expectation, fidelity, measure_pauli, prepare_graph_state
from .heavyhex import HexClusterPlan, adjusted_stabilizers, apply_plan, check_cluster
from .state import GraphError
from .tableau import StabilizerTableau


@dataclass
class PlanVerification:
    samples: int
    failures: int
    min_stabilizer: float
    worst_fidelity: float | None = None
    problems: list[str] = field(default_factory=list)
    stabilizer_means: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "failures": self.failures,
            "min_stabilizer": self.min_stabilizer,
            "worst_fidelity": self.worst_fidelity,
            "problems": self.problems[:20],
            "stabilizer_means": {str(k): v for k, v in self.stabilizer_means.items()},
        }


def verify_exhaustive(plan: HexClusterPlan, tol: float = 1e-9) -> PlanVerification:
    """Every outcome branch on the statevector: graph-rule state and adjusted stabilizers.

    Only for plans whose used subgraph fits the pattern simulator.
    """
    sub = plan.used_subgraph()
    if sub.number_of_nodes() > MAX_PATTERN_QUBITS:
        raise GraphError("plan too large for exhaustive statevector verification")
    start = prepare_graph_state(sub)
    worst, min_stab, failures, problems = 1.0, 1.0, 0, []
    sums: dict = {}
    count = 0
    for bits in itertools.product((0, 1), repeat=len(plan.order)):
        outs = dict(zip(plan.order, bits))
        st = start
        for q in plan.order:
            _, st = measure_pauli(st, q, plan.axes[q], outs[q])
        g = apply_plan(plan, outcomes=outs)
        problems += check_cluster(plan, g)
        order = list(st.labels)
        f = fidelity(st, g.to_statevector(order=order))
        worst = min(worst, f)
        bad = f < 1 - tol
        for s in adjusted_stabilizers(g, order):
            val = s.sign * expectation(st, PauliSum([(1.0, s.pauli)]))
            sums[s.vertex] = sums.get(s.vertex, 0.0) + val
            min_stab = min(min_stab, val)
            bad |= val < 1 - tol
        failures += bad
        count += 1
    means = {v: x / count for v, x in sums.items()}
    return PlanVerification(count, failures + len(problems), min_stab, worst, problems, means)


def verify_sampled(plan: HexClusterPlan, samples: int, rng: np.random.Generator) -> PlanVerification:
    """Random outcome assignments checked at stabilizer level with a tableau simulator."""
    sub = plan.used_subgraph()
    failures, problems = 0, []
    sums: dict = {}
    min_stab = 1.0
    for _ in range(samples):
        tb = StabilizerTableau.graph_state(sub)
        outs = {}
        for q in plan.order:
            outs[q], _ = tb.measure(q, plan.axes[q], rng)
        g = apply_plan(plan, outcomes=outs)
        found = check_cluster(plan, g)
        problems += found
        bad = bool(found)
        order = sorted(g.adj)
        for s in adjusted_stabilizers(g, order):
            sign = tb.contains(s.pauli, order)
            val = 0.0 if sign is None else float(sign * s.sign)
            sums[s.vertex] = sums.get(s.vertex, 0.0) + val
            min_stab = min(min_stab, val)
            bad |= val != 1.0
        failures += bad
    means = {v: x / samples for v, x in sums.items()} if samples else {}
    return PlanVerification(samples, failures, min_stab, None, problems, means)
