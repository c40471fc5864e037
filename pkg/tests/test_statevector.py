from __future__ import annotations

import math

import networkx as nx
import numpy as np
import pytest

from mbvqe.pauli import PauliString, PauliSum
from mbvqe.statevector import (
    H_MATRIX,
    SimulationError,
    StateVector,
    derive_seed,
    expectation,
    fidelity,
    ground_state_energy,
    make_rng,
    measure_pauli,
    measure_xy,
    phase_gate,
    plus_state,
    prepare_graph_state,
    run_circuit,
    states_equal_up_to_global_phase,
    u3_gate,
)


def _dense_graph_state(g: nx.Graph, order):
    n = len(order)
    idx = {v: k for k, v in enumerate(order)}
    psi = np.ones(2**n, dtype=complex) / math.sqrt(2**n)
    for k in range(2**n):
        bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
        parity = sum(bits[idx[a]] * bits[idx[b]] for a, b in g.edges)
        psi[k] *= (-1) ** parity
    return psi


def test_graph_state_matches_dense_formula_and_stabilizers():
    g = nx.cycle_graph(5)
    g.add_edge(0, 2)
    order = list(g.nodes)
    sv = prepare_graph_state(g)
    assert np.allclose(sv.vector, _dense_graph_state(g, order))
    for v in order:
        sites = {v: "X", **{w: "Z" for w in g[v]}}
        stab = PauliSum([(1.0, PauliString.from_sites(5, sites))])
        assert expectation(sv, stab) == pytest.approx(1.0, abs=1e-12)


def test_qubit_limit_and_self_loops():
    with pytest.raises(SimulationError):
        prepare_graph_state(nx.path_graph(15))
    with pytest.raises(SimulationError):
        prepare_graph_state(([0, 1], [(0, 0)]))


def test_measure_xy_branches_and_probabilities():
    # |+> on the measured qubit: P(out 0) = (1 + cos theta)/2
    sv = plus_state([0])
    for theta in (0.0, 0.3, math.pi / 2):
        m, _ = measure_xy(sv, 0, theta, outcome=0)
        assert m.probability == pytest.approx((1 + math.cos(theta)) / 2)
    # measuring the first qubit of a 2-vertex graph state teleports H P(theta)|+>
    theta = 0.9
    g = prepare_graph_state(nx.path_graph(2))
    _, out = measure_xy(g, 0, theta, outcome=0)
    expect = H_MATRIX @ phase_gate(theta) @ np.array([1, 1]) / math.sqrt(2)
    assert states_equal_up_to_global_phase(out, StateVector(expect, [1]))


def test_zero_probability_outcome_raises():
    sv = plus_state([0])
    with pytest.raises(SimulationError):
        measure_pauli(sv, 0, "X", outcome=1)
    with pytest.raises(SimulationError):
        measure_pauli(sv, 0, "Q", outcome=0)


def test_u3_matches_euler_form():
    z, e, x = 0.4, 1.1, -0.7
    rz = lambda a: np.diag([1, np.exp(1j * a)])  # noqa: E731
    ry = np.array([[math.cos(z / 2), -math.sin(z / 2)], [math.sin(z / 2), math.cos(z / 2)]])
    assert np.allclose(u3_gate(z, e, x), rz(e) @ ry @ rz(x))
    u = u3_gate(z, e, x)
    assert np.allclose(u.conj().T @ u, np.eye(2))


def test_run_circuit_against_kron():
    gates = [("H", 0), ("P", 0.5, 1), ("CZ", 0, 1), ("U3", 0.1, 0.2, 0.3, 1)]
    sv = run_circuit(plus_state([0, 1]), gates)
    i2 = np.eye(2)
    cz = np.diag([1, 1, 1, -1])
    m = np.kron(i2, u3_gate(0.1, 0.2, 0.3)) @ cz @ np.kron(i2, phase_gate(0.5)) @ np.kron(H_MATRIX, i2)
    assert np.allclose(sv.vector, m @ np.full(4, 0.5))


def test_expectation_reorder_and_fidelity():
    rng = np.random.default_rng(0)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    sv = StateVector(v / np.linalg.norm(v), ["a", "b", "c"])
    h = PauliSum.from_labels([(0.7, "XYZ"), (-0.2, "ZZI")])
    dense = np.vdot(sv.vector, h.to_matrix() @ sv.vector).real
    assert expectation(sv, h) == pytest.approx(dense)
    r = sv.reordered(["c", "a", "b"])
    assert fidelity(sv, r) == pytest.approx(1.0)
    assert expectation(r, h, qubits=["a", "b", "c"]) == pytest.approx(dense)


def test_ground_state_energy_small():
    e, psi = ground_state_energy(PauliSum.from_labels([(1.0, "ZZ"), (0.5, "XI")]))
    assert e == pytest.approx(-math.sqrt(1.25))
    assert psi.norm() == pytest.approx(1.0)


def test_rng_streams_independent_and_reproducible():
    a = make_rng(5, 1).integers(1 << 30, size=4)
    b = make_rng(5, 1).integers(1 << 30, size=4)
    c = make_rng(5, 2).integers(1 << 30, size=4)
    assert (a == b).all() and not (a == c).all()
    assert derive_seed(5, 1) == derive_seed(5, 1) != derive_seed(5, 2)
