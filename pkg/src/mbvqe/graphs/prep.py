"""Preparation circuits for cluster states and their CNOT metrics.

Two-qubit gates are counted in CNOTs: a CZ is one CNOT between Hadamards, a
SWAP three CNOTs.  CNOT depth is the largest number of CNOTs on any path of
the circuit DAG.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .heavyhex import HeavyHexLattice, HexClusterPlan
from .state import GraphError

CNOT_COST = {"CZ": 1, "CNOT": 1, "SWAP": 3}


@dataclass
class PrepCircuit:
    """Layers of gates; ``("CZ", a, b)``, ``("SWAP", a, b)`` or ``("H", q)``."""

    layers: list[list[tuple]] = field(default_factory=list)
    num_qubits: int = 0

    @property
    def gates(self) -> list[tuple]:
        return [g for layer in self.layers for g in layer]

    @property
    def cnot_count(self) -> int:
        return sum(CNOT_COST.get(g[0], 0) for g in self.gates)

    @property
    def cnot_depth(self) -> int:
        depth: dict = {}
        for g in self.gates:
            cost = CNOT_COST.get(g[0], 0)
            if not cost:
                continue
            d = max(depth.get(g[1], 0), depth.get(g[2], 0)) + cost
            depth[g[1]] = depth[g[2]] = d
        return max(depth.values(), default=0)

    def metrics(self) -> dict:
        return {"cnot_count": self.cnot_count, "cnot_depth": self.cnot_depth, "layers": len(self.layers)}

    def to_json(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "layers": [[list(g) for g in layer] for layer in self.layers],
            "metrics": self.metrics(),
        }


def edge_coloring(g: nx.Graph) -> dict[frozenset, int]:
    """Proper edge colouring; uses ``max degree`` colours on bipartite graphs.

    Colours edges one at a time, flipping an alternating two-colour path
    (Kempe chain) when the endpoints have no common free colour.
    """
    color: dict[frozenset, int] = {}
    at: dict = {v: {} for v in g.nodes}  # vertex -> colour -> neighbour
    delta = max((d for _, d in g.degree), default=0)
    palette = range(max(delta, 1) + 1)

    def free(v):
        return next(c for c in palette if c not in at[v])

    for u, v in sorted(g.edges, key=lambda e: (min(e), max(e))):
        a, b = free(u), free(v)
        if a not in at[v]:
            c = a
        else:
            # walk the a/b path from v and swap its colours; it cannot end at u in a bipartite graph
            path = []
            x, want = v, a
            while want in at[x]:
                y = at[x][want]
                path.append((x, y))
                x, want = y, (b if want == a else a)
            for x, y in path:
                del at[x][color[frozenset((x, y))]]
            for x, y in path:
                e = frozenset((x, y))
                color[e] = b if color[e] == a else a
            for x, y in path:
                at[x][color[frozenset((x, y))]] = y
                at[y][color[frozenset((x, y))]] = x
            if a in at[u] or a in at[v]:
                raise GraphError("edge colouring failed; graph is not bipartite")
            c = a
        color[frozenset((u, v))] = c
        at[u][c] = v
        at[v][c] = u
    return color


def prep_circuit_mb(plan: HexClusterPlan) -> PrepCircuit:
    """CZ on every edge of the used heavy-hex subgraph, one colour class per layer."""
    sub = plan.used_subgraph()
    colors = edge_coloring(sub)
    nlayers = max(colors.values(), default=-1) + 1
    layers: list[list[tuple]] = [[("H", q) for q in sorted(sub.nodes)]]
    for k in range(nlayers):
        layer = sorted(tuple(sorted(e)) for e, c in colors.items() if c == k)
        layers.append([("CZ", a, b) for a, b in layer])
    return PrepCircuit(layers, sub.number_of_nodes())


def _default_layout(rows: int, cols: int, coupling) -> dict[tuple[int, int], int]:
    if isinstance(coupling, HeavyHexLattice):
        out = {}
        rws = coupling.rows()
        if len(rws) < rows:
            raise GraphError("not enough lattice rows for the grid")
        for i in range(rows):
            row = sorted((q for q, (r, _) in coupling.coords.items() if r == rws[i]), key=lambda q: coupling.coords[q][1])
            if len(row) < cols:
                raise GraphError("lattice row too short for the grid")
            for j in range(cols):
                out[(i, j)] = row[j]
        return out
    nodes = sorted(coupling.nodes)
    if len(nodes) < rows * cols:
        raise GraphError("coupling graph too small for the grid")
    return {(i, j): nodes[i * cols + j] for i in range(rows) for j in range(cols)}


def prep_circuit_naive(rows: int, cols: int, coupling, layout: dict | None = None) -> PrepCircuit:
    """Gate-based cluster preparation routed on ``coupling`` with SWAP chains.

    Each cluster CZ (row-major order) moves its first qubit along a shortest
    path until adjacent; the layout is not restored.  Gates are packed ASAP.
    """
    graph = coupling.graph if isinstance(coupling, HeavyHexLattice) else coupling
    if not nx.is_connected(graph):
        raise GraphError("coupling graph is disconnected")
    pos = dict(layout or _default_layout(rows, cols, coupling))
    where = {p: k for k, p in pos.items()}  # physical -> logical
    ops: list[tuple] = [("H", pos[(i, j)]) for i in range(rows) for j in range(cols)]
    cluster_edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                cluster_edges.append(((i, j), (i, j + 1)))
            if i + 1 < rows:
                cluster_edges.append(((i, j), (i + 1, j)))
    for a, b in cluster_edges:
        pa, pb = pos[a], pos[b]
        if not graph.has_edge(pa, pb):
            path = nx.shortest_path(graph, pa, pb)
            for x, y in zip(path[:-2], path[1:-1]):
                ops.append(("SWAP", x, y))
                la, lb = where.pop(x, None), where.pop(y, None)
                if la is not None:
                    pos[la], where[y] = y, la
                if lb is not None:
                    pos[lb], where[x] = x, lb
            pa = pos[a]
        ops.append(("CZ", min(pa, pb), max(pa, pb)))
    return PrepCircuit(_asap_layers(ops), graph.number_of_nodes())


def _asap_layers(ops: list[tuple]) -> list[list[tuple]]:
    level: dict = {}
    layers: list[list[tuple]] = []
    for g in ops:
        qs = g[1:]
        k = max((level.get(q, 0) for q in qs), default=0)
        if len(layers) <= k:
            layers.append([])
        layers[k].append(g)
        for q in qs:
            level[q] = k + 1
    return layers
