from __future__ import annotations

import itertools
import json
import math

import networkx as nx
import numpy as np
import pytest

from mbvqe.pattern import (
    CorrectionSets,
    Measurement,
    MeasurementPattern,
    OpenGraph,
    PatternError,
    apply_frame,
    bind,
    determinism_check,
    edge_wise_decoration,
    equivalent_circuit,
    execute,
    exhaustive_flow_search,
    find_causal_flow,
    flow_violations,
    node_wise_decoration,
    simulate_circuit,
    tree_pattern,
)
from mbvqe.pauli import PauliString, PauliSum
from mbvqe.statevector import expectation, fidelity, make_rng


def _angles(p, seed=0):
    return list(np.random.default_rng(seed).uniform(0, 2 * math.pi, p.num_params))


def test_node_wise_shape():
    p = node_wise_decoration(nx.path_graph(3), 2)
    assert p.num_params == 6
    assert p.graph.number_of_nodes() == 9
    assert p.outputs == (0, 1, 2)
    assert p.order == [6, 7, 8, 3, 4, 5]
    assert p.measurements[7] == Measurement(4)
    assert node_wise_decoration(nx.path_graph(3), 0).num_params == 0
    with pytest.raises(PatternError):
        node_wise_decoration(nx.path_graph(3), -1)


def test_flow_on_node_wise_and_tree():
    p = node_wise_decoration(nx.path_graph(3), 3)
    flow = find_causal_flow(p.open_graph)
    assert flow is not None
    assert flow.f == {v: v - 3 for v in range(3, 12)}
    assert flow_violations(p.open_graph, flow) == []
    t = tree_pattern()
    tf = find_causal_flow(t.open_graph)
    assert tf is not None and flow_violations(t.open_graph, tf) == []
    assert tf.precedes(4, 5) and tf.precedes(4, 6)


def test_edge_wise_flow_depends_on_degree():
    single = edge_wise_decoration(nx.path_graph(2))
    assert find_causal_flow(single.open_graph) is not None
    path = edge_wise_decoration(nx.path_graph(3))
    assert path.graph.number_of_nodes() == 11
    assert find_causal_flow(path.open_graph) is None
    assert exhaustive_flow_search(path.open_graph) is None


def test_flow_violations_detects_bad_successor():
    p = node_wise_decoration(nx.path_graph(2), 1)
    flow = find_causal_flow(p.open_graph)
    bad = type(flow)({2: 1, 3: 0}, flow.depth)  # crossed successors
    assert flow_violations(p.open_graph, bad)


@pytest.mark.parametrize("seed", range(30))
def test_greedy_flow_agrees_with_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 8))
    g = nx.gnp_random_graph(n, 0.45, seed=seed)
    k = int(rng.integers(1, n))
    outputs = tuple(int(v) for v in rng.choice(n, k, replace=False))
    og = OpenGraph(g, (), outputs)
    flow = find_causal_flow(og)
    brute = exhaustive_flow_search(og)
    assert (flow is None) == (brute is None)
    if flow is not None:
        assert flow_violations(og, flow) == []


def test_json_roundtrip():
    for p in (node_wise_decoration(nx.cycle_graph(3), 2), edge_wise_decoration(nx.path_graph(3)), tree_pattern()):
        q = MeasurementPattern.from_json(json.loads(p.dumps()))
        assert nx.utils.graphs_equal(q.graph, p.graph)
        assert q.measurements == p.measurements and q.layers == p.layers and q.outputs == p.outputs
    with pytest.raises(PatternError):
        MeasurementPattern.from_json({"vertices": [0]})


def test_pattern_validation():
    og = OpenGraph(nx.path_graph(2), (), (0,))
    with pytest.raises(PatternError):
        MeasurementPattern(og, {}, [])
    with pytest.raises(PatternError):
        MeasurementPattern(og, {1: Measurement(0)}, [[1, 1]])
    with pytest.raises(PatternError):
        OpenGraph(nx.path_graph(2), (), (5,))


@pytest.mark.parametrize("l", [1, 2])
def test_equivalent_circuit_matches_pattern(l):
    p = node_wise_decoration(nx.path_graph(3), l)
    gates = equivalent_circuit(p)
    for seed in range(5):
        th = _angles(p, seed)
        res = execute(p, th, "adaptive", rng=make_rng(seed))
        ideal = simulate_circuit(bind(gates, th), p.outputs)
        assert fidelity(res.corrected_state(), ideal) == pytest.approx(1.0, abs=1e-10)


def test_adaptive_frame_folding_matches_corrected_state():
    p = node_wise_decoration(nx.path_graph(3), 2)
    h = PauliSum.from_labels([(0.3, "XZY"), (1.0, "ZZI"), (-0.5, "IYX")])
    th = _angles(p, 4)
    rng = make_rng(9)
    for _ in range(10):
        res = execute(p, th, "adaptive", rng=rng)
        folded = expectation(res.state, apply_frame(h, res.frame, list(p.outputs)))
        assert folded == pytest.approx(expectation(res.corrected_state(), h), abs=1e-12)


def test_postselect_mode():
    t = tree_pattern()
    res = execute(t, [0.3, 1.0, 2.0], "postselect", rng=make_rng(1), postselect_on=[4])
    assert res.outcomes[4] == 0
    res = execute(t, [0.3, 1.0, 2.0], "postselect", rng=make_rng(1))
    assert all(s == 0 for s in res.outcomes.values()) and res.frame.is_identity()


def test_execute_errors():
    p = node_wise_decoration(nx.path_graph(2), 1)
    with pytest.raises(PatternError):
        execute(p, [0.0], "forced")
    with pytest.raises(PatternError):
        execute(p, [0.0, 0.0], "adaptive")
    with pytest.raises(PatternError):
        execute(p, [0.0, 0.0], "nope")
    ew = edge_wise_decoration(nx.path_graph(3))
    with pytest.raises(PatternError):
        execute(ew, _angles(ew), "adaptive", rng=make_rng(0))
    # flowless all-zero forced run is allowed
    execute(ew, _angles(ew), "forced")


@pytest.mark.parametrize("n,l", [(2, 1), (2, 3), (3, 2)])
def test_determinism_with_flow(n, l):
    p = node_wise_decoration(nx.path_graph(n), l)
    rep = determinism_check(p, _angles(p, n * 10 + l))
    assert rep.branches == 2 ** (n * l)
    assert rep.deterministic and rep.worst_pair is None


def test_edge_wise_branch_relations():
    """Flipping inner outcomes at the degree-2 vertex acts as Z X Z on the outputs."""
    p = edge_wise_decoration(nx.path_graph(3))
    mids = sorted(q for q, v in p.meta["inner"].items() if v == 1)
    th = _angles(p, 2)
    none = CorrectionSets({}, {})

    def out(a, b):
        o = {v: 0 for v in p.order}
        o[mids[0]], o[mids[1]] = a, b
        return execute(p, th, "forced", outcomes=o, corrections=none).state.reordered(list(p.outputs))

    zxz = PauliString("ZXZ")
    for (a, b), (c, d) in (((1, 0), (0, 1)), ((1, 1), (0, 0))):
        lhs = out(a, b)
        rhs = out(c, d).copy().apply_pauli(zxz)
        assert fidelity(lhs, rhs) == pytest.approx(1.0, abs=1e-10)


def test_edge_wise_not_repairable_by_output_frame():
    """Some branch differs from the all-zero branch by more than any output Pauli."""
    p = edge_wise_decoration(nx.path_graph(3))
    th = _angles(p, 5)
    none = CorrectionSets({}, {})
    ref = execute(p, th, "forced", corrections=none).state.reordered(list(p.outputs))
    worst = 1.0
    for bits in itertools.product((0, 1), repeat=len(p.order)):
        st = execute(p, th, "forced", outcomes=bits, corrections=none).state.reordered(list(p.outputs))
        best = max(
            fidelity(ref, st.copy().apply_pauli(PauliString("".join(ls))))
            for ls in itertools.product("IXYZ", repeat=3)
        )
        worst = min(worst, best)
    assert worst < 0.9
