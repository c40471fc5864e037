"""Measurement patterns on open graphs.

Outcome convention: bit 0 is the projection onto ``|theta_+>``.  A ``1`` on a
measured vertex ``v`` with flow successor ``f(v)`` is equivalent to the ``0``
branch with ``X`` on ``f(v)`` and ``Z`` on ``N(f(v)) - {v}`` applied first.
Accumulated X parity flips the sign of a later angle, Z parity adds ``pi``;
what reaches the outputs is kept as a classical :class:`PauliFrame`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .pauli import PauliString, PauliSum
from .statevector import (
    MAX_PATTERN_QUBITS,
    SimulationError,
    StateVector,
    measure_xy,
    plus_state,
    run_circuit,
)

Vertex = Hashable


class PatternError(ValueError):
    """Raised for malformed patterns or unsupported execution requests."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class OpenGraph:
    graph: nx.Graph
    inputs: tuple = ()
    outputs: tuple = ()

    def __post_init__(self) -> None:
        if not self.outputs:
            raise PatternError("an open graph needs at least one output")
        missing = [v for v in (*self.inputs, *self.outputs) if v not in self.graph]
        if missing:
            raise PatternError(f"inputs/outputs not in graph: {missing}")

    @property
    def measured(self) -> list[Vertex]:
        outs = set(self.outputs)
        return [v for v in self.graph.nodes if v not in outs]


@dataclass(frozen=True)
class Measurement:
    """XY-plane measurement at ``angle`` plus, if ``param`` is set, ``angles[param]``."""

    param: int | None = None
    angle: float = 0.0

    def resolve(self, angles: Sequence[float]) -> float:
        return self.angle + (angles[self.param] if self.param is not None else 0.0)


PAULI_X = Measurement(None, 0.0)
PAULI_Y = Measurement(None, math.pi / 2)


@dataclass
class MeasurementPattern:
    open_graph: OpenGraph
    measurements: dict[Vertex, Measurement]
    layers: list[list[Vertex]]
    kind: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        measured = set(self.open_graph.measured)
        if set(self.measurements) != measured:
            raise PatternError("every non-output vertex needs exactly one measurement")
        flat = [v for layer in self.layers for v in layer]
        if sorted(map(repr, flat)) != sorted(map(repr, measured)) or len(flat) != len(set(flat)):
            raise PatternError("layers must list every measured vertex once")

    @property
    def graph(self) -> nx.Graph:
        return self.open_graph.graph

    @property
    def outputs(self) -> tuple:
        return self.open_graph.outputs

    @property
    def order(self) -> list[Vertex]:
        return [v for layer in self.layers for v in layer]

    @property
    def num_params(self) -> int:
        idx = [m.param for m in self.measurements.values() if m.param is not None]
        return max(idx) + 1 if idx else 0

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "vertices": list(self.graph.nodes),
            "edges": [list(e) for e in self.graph.edges],
            "inputs": list(self.open_graph.inputs),
            "outputs": list(self.outputs),
            "measurements": {str(v): {"param": m.param, "angle": m.angle} for v, m in self.measurements.items()},
            "layers": [list(layer) for layer in self.layers],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> MeasurementPattern:
        try:
            g = nx.Graph()
            g.add_nodes_from(data["vertices"])
            g.add_edges_from(tuple(e) for e in data["edges"])
            lookup = {str(v): v for v in g.nodes}
            meas = {lookup[k]: Measurement(m.get("param"), float(m.get("angle", 0.0))) for k, m in data["measurements"].items()}
            og = OpenGraph(g, tuple(data.get("inputs", ())), tuple(data["outputs"]))
            return cls(og, meas, [list(layer) for layer in data["layers"]], data.get("kind", "custom"), dict(data.get("meta", {})))
        except (KeyError, TypeError) as exc:
            raise PatternError(f"malformed pattern: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class FlowMap:
    """Successor function ``f`` and depth labels; larger depth is measured earlier."""

    f: dict
    depth: dict

    def precedes(self, a: Vertex, b: Vertex) -> bool:
        return self.depth[a] > self.depth[b]

    def layers(self) -> list[list[Vertex]]:
        top = max(self.depth.values(), default=0)
        return [sorted((v for v, d in self.depth.items() if d == k), key=repr) for k in range(top, 0, -1)]


@dataclass(frozen=True)
class CorrectionSets:
    """Per measured vertex: the X target and the Z targets of a ``1`` outcome."""

    x_target: dict
    z_targets: dict
    dropped: dict = field(default_factory=dict)


@dataclass
class PauliFrame:
    """``X^a Z^b`` per output qubit; real output = frame * ideal output."""

    bits: dict

    @classmethod
    def identity(cls, outputs: Iterable[Vertex]) -> PauliFrame:
        return cls({v: (0, 0) for v in outputs})

    def pauli(self, order: Sequence[Vertex]) -> PauliString:
        letters = []
        for v in order:
            a, b = self.bits[v]
            letters.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(a, b)])
        return PauliString("".join(letters))

    def is_identity(self) -> bool:
        return all(a == 0 and b == 0 for a, b in self.bits.values())


# ---------------------------------------------------------------------------
# flow


def find_causal_flow(og: OpenGraph) -> FlowMap | None:
    """Causal flow by layer-wise elimination from the outputs, or ``None``.

    A processed, still-correcting vertex with exactly one unprocessed
    neighbour ``u`` becomes ``f(u)``.  Runs in polynomial time.
    """
    g = og.graph
    inputs = set(og.inputs)
    processed = set(og.outputs)
    depth = {v: 0 for v in og.outputs}
    f: dict = {}
    correctors = set(og.outputs) - inputs
    k = 1
    while True:
        new_out: set = set()
        used: set = set()
        for v in sorted(correctors, key=repr):
            unprocessed = [u for u in g[v] if u not in processed]
            if len(unprocessed) != 1:
                continue
            u = unprocessed[0]
            if u in new_out:
                continue
            f[u] = v
            depth[u] = k
            new_out.add(u)
            used.add(v)
        if not new_out:
            break
        processed |= new_out
        correctors = (correctors - used) | (new_out - inputs)
        k += 1
    if processed != set(g.nodes):
        return None
    return FlowMap(f, depth)


def flow_violations(og: OpenGraph, flow: FlowMap) -> list[str]:
    """Axioms a flow breaks; empty for a valid causal flow."""
    g = og.graph
    out = []
    for v in og.measured:
        if v not in flow.f:
            out.append(f"{v!r} has no successor")
            continue
        fv = flow.f[v]
        if fv not in g[v]:
            out.append(f"f({v!r}) = {fv!r} is not a neighbour")
        if not flow.precedes(v, fv):
            out.append(f"{v!r} does not precede f({v!r})")
        for w in g[fv]:
            if w != v and not flow.precedes(v, w):
                out.append(f"{v!r} does not precede neighbour {w!r} of f({v!r})")
    return out


def exhaustive_flow_search(og: OpenGraph) -> dict | None:
    """Brute force over all successor maps; returns one consistent ``f`` or ``None``."""
    g = og.graph
    measured = og.measured
    if len(g) > 12:
        raise PatternError("exhaustive search is limited to 12 vertices")
    outs_inputs = set(og.inputs)
    choices = [[u for u in g[v] if u not in outs_inputs] for v in measured]
    for combo in itertools.product(*choices):
        if len(set(combo)) != len(combo):
            continue
        f = dict(zip(measured, combo))
        order = nx.DiGraph()
        order.add_nodes_from(g.nodes)
        for v, fv in f.items():
            order.add_edge(v, fv)
            for w in g[fv]:
                if w != v:
                    order.add_edge(v, w)
        if nx.is_directed_acyclic_graph(order):
            return f
    return None


def correction_sets(og: OpenGraph, flow: FlowMap) -> CorrectionSets:
    g = og.graph
    return CorrectionSets(
        {v: flow.f[v] for v in og.measured},
        {v: frozenset(w for w in g[flow.f[v]] if w != v) for v in og.measured},
    )


def successor_corrections(pattern: MeasurementPattern, successor: Mapping[Vertex, Vertex]) -> CorrectionSets:
    """Correction sets from an arbitrary successor choice, for patterns without flow.

    Targets that are measured no later than the source are dropped and kept
    in ``dropped``; the resulting execution is generally not deterministic.
    """
    pos = {v: i for i, v in enumerate(pattern.order)}
    layer_of = {v: k for k, layer in enumerate(pattern.layers) for v in layer}
    g = pattern.graph

    def later(v, w):
        return w not in pos or layer_of[w] > layer_of[v]

    xs, zs, dropped = {}, {}, {}
    for v in pattern.order:
        fv = successor[v]
        targets = {w for w in g[fv] if w != v}
        zs[v] = frozenset(w for w in targets if later(v, w))
        lost = targets - zs[v]
        if not later(v, fv):
            lost.add(fv)
        if lost:
            dropped[v] = frozenset(lost)
        xs[v] = fv if later(v, fv) else None
    return CorrectionSets(xs, zs, dropped)


# ---------------------------------------------------------------------------
# execution


@dataclass
class ExecutionResult:
    state: StateVector
    frame: PauliFrame
    outcomes: dict
    angles: dict
    retries: int = 0
    probability: float = 1.0

    def corrected_state(self) -> StateVector:
        """Output state with the frame removed (up to global phase)."""
        out = self.state.copy()
        return out.apply_pauli(self.frame.pauli(out.labels), out.labels)


MODES = ("forced", "adaptive", "postselect")


def execute(
    p: MeasurementPattern,
    angles: Sequence[float],
    mode: str = "forced",
    outcomes: Mapping[Vertex, int] | Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
    corrections: CorrectionSets | None = None,
    postselect_on: Iterable[Vertex] | None = None,
    max_qubits: int = MAX_PATTERN_QUBITS,
    max_retries: int | None = None,
) -> ExecutionResult:
    """Run a pattern on a lazily prepared graph state.

    ``forced``: outcomes given (mapping, or sequence in measurement order;
    default all zero) with adaptive corrections.  ``adaptive``: outcomes drawn
    from ``rng``.  ``postselect``: outcomes drawn from ``rng`` and the run is
    repeated until every vertex in ``postselect_on`` (default: all measured)
    gives 0; other vertices are corrected adaptively.
    """
    if mode not in MODES:
        raise PatternError(f"unknown mode {mode!r}")
    if len(angles) != p.num_params:
        raise PatternError(f"expected {p.num_params} angles, got {len(angles)}")
    if corrections is None:
        flow = find_causal_flow(p.open_graph)
        if flow is None:
            if mode == "forced" and _all_zero(outcomes):
                corrections = CorrectionSets({}, {})
            else:
                raise PatternError("pattern has no causal flow; pass explicit corrections")
        else:
            corrections = correction_sets(p.open_graph, flow)
    order = p.order
    if mode == "forced":
        if outcomes is None:
            forced = {v: 0 for v in order}
        elif isinstance(outcomes, Mapping):
            forced = {v: int(outcomes[v]) for v in order}
        else:
            if len(outcomes) != len(order):
                raise PatternError("outcome vector length does not match measured vertices")
            forced = dict(zip(order, map(int, outcomes)))
        return _run(p, angles, corrections, forced, None, max_qubits)
    if rng is None:
        raise PatternError(f"mode {mode!r} needs a random generator")
    if mode == "adaptive":
        return _run(p, angles, corrections, None, rng, max_qubits)
    targets = set(order if postselect_on is None else postselect_on)
    limit = max_retries if max_retries is not None else 10 * 2 ** len(targets)
    for attempt in range(limit):
        res = _run(p, angles, corrections, None, rng, max_qubits, reject=targets)
        if res is not None:
            res.retries = attempt
            return res
    raise PatternError(f"postselection failed after {limit} attempts")


def _all_zero(outcomes) -> bool:
    if outcomes is None:
        return True
    vals = outcomes.values() if isinstance(outcomes, Mapping) else outcomes
    return all(int(s) == 0 for s in vals)


def _run(p, angles, corr: CorrectionSets, forced, rng, max_qubits, reject=frozenset()):
    g = p.graph
    outputs = list(p.outputs)
    state = StateVector(np.ones(1, dtype=complex), [])
    present: set = set()
    measured: set = set()
    sx = {v: 0 for v in g.nodes}
    sz = {v: 0 for v in g.nodes}
    record: dict = {}
    used_angles: dict = {}
    prob = 1.0

    def add(v):
        nonlocal state
        if v in present:
            return
        if state.n + 1 > max_qubits:
            raise SimulationError(f"pattern needs more than {max_qubits} live qubits")
        state = state.tensor_with(plus_state([v]))
        present.add(v)
        for w in g[v]:
            if w in present and w not in measured:
                state.apply_cz(v, w)

    for v in p.order:
        add(v)
        for w in g[v]:
            if w in measured:
                continue
            add(w)
        base = p.measurements[v].resolve(angles)
        theta = (-1) ** sx[v] * base + sz[v] * math.pi
        used_angles[v] = theta
        outcome = forced[v] if forced is not None else rng
        m, state = measure_xy(state, v, theta, outcome)
        measured.add(v)
        prob *= m.probability
        record[v] = m.outcome
        if m.outcome and v in reject:
            return None
        if m.outcome:
            xt = corr.x_target.get(v)
            if xt is not None:
                if xt in measured:
                    raise PatternError(f"correction from {v!r} targets measured vertex {xt!r}")
                sx[xt] ^= 1
            for w in corr.z_targets.get(v, ()):
                if w in measured:
                    raise PatternError(f"correction from {v!r} targets measured vertex {w!r}")
                sz[w] ^= 1
    for v in outputs:
        add(v)
    state = state.reordered(outputs)
    frame = PauliFrame({v: (sx[v], sz[v]) for v in outputs})
    return ExecutionResult(state, frame, record, used_angles, 0, prob)


def apply_frame(observable: PauliSum, frame: PauliFrame, order: Sequence[Vertex] | None = None) -> PauliSum:
    """Conjugate the observable by the frame Paulis; only signs change."""
    order = list(frame.bits) if order is None else list(order)
    if observable.n != len(order):
        raise PatternError("observable size does not match frame")
    return observable.conjugated_by(frame.pauli(order))


# ---------------------------------------------------------------------------
# pattern builders


def _ansatz_nodes(g0: nx.Graph) -> list:
    return sorted(g0.nodes, key=repr)


def node_wise_decoration(g0: nx.Graph, layers: int) -> MeasurementPattern:
    """Stack ``layers`` copies of ``g0`` below it, joined vertically.

    Vertex ``k * n + i`` is copy ``k`` of the ``i``-th ansatz vertex; copy 0
    are the outputs.  The farthest copy is measured first; copy ``k >= 1``
    vertex ``i`` carries angle parameter ``(k - 1) * n + i``.
    """
    if layers < 0:
        raise PatternError("layers must be non-negative")
    nodes = _ansatz_nodes(g0)
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    g = nx.Graph()
    g.add_nodes_from(range(n * (layers + 1)))
    base_edges = sorted(tuple(sorted((idx[a], idx[b]))) for a, b in g0.edges)
    for k in range(layers + 1):
        for a, b in base_edges:
            g.add_edge(k * n + a, k * n + b)
        if k:
            for i in range(n):
                g.add_edge(k * n + i, (k - 1) * n + i)
    meas = {k * n + i: Measurement((k - 1) * n + i) for k in range(1, layers + 1) for i in range(n)}
    order = [[k * n + i for i in range(n)] for k in range(layers, 0, -1)]
    og = OpenGraph(g, (), tuple(range(n)))
    return MeasurementPattern(og, meas, order, "node-wise", {"n": n, "layers": layers, "edges": base_edges})


def edge_wise_decoration(g0: nx.Graph) -> MeasurementPattern:
    """Attach a pendant two-path at both ends of every ansatz edge (4 qubits per edge).

    Outer qubits are measured first, then inner ones.  Returns the pattern;
    ``meta["inner"]`` maps each inner qubit to its ansatz vertex.
    """
    nodes = _ansatz_nodes(g0)
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    g = nx.Graph()
    g.add_nodes_from(range(n))
    base_edges = sorted(tuple(sorted((idx[a], idx[b]))) for a, b in g0.edges)
    g.add_edges_from(base_edges)
    nxt = n
    inner, outer = [], []
    inner_of: dict = {}
    for a, b in base_edges:
        for end in (a, b):
            i, o = nxt, nxt + 1
            nxt += 2
            g.add_edge(end, i)
            g.add_edge(i, o)
            inner.append(i)
            outer.append(o)
            inner_of[i] = end
    meas = {}
    for k, v in enumerate(sorted(inner + outer)):
        meas[v] = Measurement(k)
    og = OpenGraph(g, (), tuple(range(n)))
    return MeasurementPattern(og, meas, [outer, inner], "edge-wise", {"n": n, "edges": base_edges, "inner": inner_of})


def tree_pattern() -> MeasurementPattern:
    """Seven-qubit tree: parent 4 (angle 0) over mid qubits 5, 6 (angles 1, 2).

    Mid qubit 5 holds outputs 0 and 1, mid qubit 6 holds outputs 2 and 3,
    and the two mid qubits share an edge.  Read on the periodic chain
    ``0-1-2-3-0`` with all outcomes 0 this yields
    ``<sum XX> = 2 (1 + cos t0)`` and ``<sum YY> = -sin t0 (sin t1 + sin t2)``.
    The parent is measured first.
    """
    g = nx.Graph([(4, 5), (4, 6), (5, 6), (5, 0), (5, 1), (6, 2), (6, 3)])
    meas = {4: Measurement(0), 5: Measurement(1), 6: Measurement(2)}
    og = OpenGraph(g, (), (0, 1, 2, 3))
    return MeasurementPattern(og, meas, [[4], [5, 6]], "tree", {"parent": 4, "mid": [5, 6]})


# ---------------------------------------------------------------------------
# equivalent circuit


@dataclass(frozen=True)
class Param:
    index: int


def equivalent_circuit(p: MeasurementPattern) -> list[tuple]:
    """Gate list (on ``|+>^n`` over the outputs) that the node-wise pattern implements.

    CZ on the ansatz edges, then per layer from the farthest: ``P(theta)``
    and ``H`` on every qubit followed by the CZ layer again.  Angles appear
    as :class:`Param` placeholders; see :func:`bind`.
    """
    if p.kind != "node-wise":
        raise PatternError("equivalent circuits are defined for node-wise patterns")
    n, layers, edges = p.meta["n"], p.meta["layers"], p.meta["edges"]
    cz = [("CZ", a, b) for a, b in edges]
    gates: list[tuple] = list(cz)
    for k in range(layers, 0, -1):
        for i in range(n):
            gates.append(("P", Param((k - 1) * n + i), i))
            gates.append(("H", i))
        gates.extend(cz)
    return gates


def bind(gates: Sequence[tuple], angles: Sequence[float]) -> list[tuple]:
    out = []
    for g in gates:
        out.append(tuple(angles[x.index] if isinstance(x, Param) else x for x in g))
    return out


def simulate_circuit(gates: Sequence[tuple], outputs: Sequence[Vertex]) -> StateVector:
    return run_circuit(plus_state(list(outputs)), gates)


# ---------------------------------------------------------------------------
# determinism


def nearest_output_successor(p: MeasurementPattern) -> dict:
    """For each measured vertex, the neighbour closest to the outputs (ties: lowest label)."""
    g = p.graph
    dist = nx.multi_source_dijkstra_path_length(g, set(p.outputs))
    return {v: min(g[v], key=lambda w: (dist.get(w, math.inf), repr(w))) for v in p.order if len(g[v])}


@dataclass
class DeterminismReport:
    branches: int
    min_fidelity: float
    worst_pair: tuple[dict, dict] | None
    corrections: str

    @property
    def deterministic(self) -> bool:
        return self.min_fidelity >= 1 - 1e-9

    def to_json(self) -> dict:
        pair = None
        if self.worst_pair is not None:
            pair = [{str(k): v for k, v in o.items()} for o in self.worst_pair]
        return {
            "branches": self.branches,
            "min_pairwise_fidelity": self.min_fidelity,
            "deterministic": self.deterministic,
            "worst_pair": pair,
            "corrections": self.corrections,
        }


def determinism_check(
    p: MeasurementPattern,
    angles: Sequence[float],
    corrections: CorrectionSets | None = None,
    max_measured: int = 12,
) -> DeterminismReport:
    """Execute every forced outcome branch; report the least similar pair after correction.

    Without a flow (and no explicit corrections) the nearest-output successor
    map supplies corrections, with targets that are already measured dropped.
    """
    order = p.order
    if len(order) > max_measured:
        raise PatternError(f"{len(order)} measured qubits exceeds the enumeration limit {max_measured}")
    kind = "explicit"
    if corrections is None:
        flow = find_causal_flow(p.open_graph)
        if flow is not None:
            corrections, kind = correction_sets(p.open_graph, flow), "causal flow"
        else:
            corrections = successor_corrections(p, nearest_output_successor(p))
            kind = "nearest-output successor (flowless)"
    vecs, outs = [], []
    for bits in itertools.product((0, 1), repeat=len(order)):
        o = dict(zip(order, bits))
        try:
            res = execute(p, angles, "forced", outcomes=o, corrections=corrections)
        except SimulationError:
            continue
        st = res.corrected_state().reordered(list(p.outputs))
        v = st.vector
        vecs.append(v / np.linalg.norm(v))
        outs.append(o)
    m = np.array(vecs)
    gram = np.abs(m.conj() @ m.T) ** 2
    i, j = np.unravel_index(np.argmin(gram), gram.shape)
    worst = float(gram[i, j])
    pair = (outs[i], outs[j]) if worst < 1 - 1e-9 else None
    return DeterminismReport(len(vecs), min(worst, 1.0), pair, kind)
