"""Heavy-hex lattices and their SWAP-free reduction to 2D cluster states.

Coordinates: row qubits sit at ``(r, c)`` with integer ``r``; a bridge qubit
between ``(r, c)`` and ``(r + 1, c)`` sits at ``(r + 0.5, c)``.  Bridges between
rows ``r`` and ``r + 1`` occupy columns ``c = offset + 2 (r mod 2)  (mod 4)``, so
every row qubit carrying a bridge (a *corner*) alternates between up and down
links along its row.

The reduction keeps one corner per pair ``(c, c + 2)`` of adjacent corners:

* the connector between the two corners of a pair and the discarded corner
  are both measured in X, which fuses the pair into one degree-4 vertex;
* every other connector (row qubits between pairs and bridges) is measured
  in Y, which turns ``u - m - v`` into an edge ``u - v`` with ``sqrt(+-iZ)``
  byproducts on both ends.

Cells of the hexagonal lattice map one-to-one onto squares of the cluster.
Qubits outside the requested grid are never prepared.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from ..pauli import IDENTITY, PAULI_Z, SQRT_IZ, SQRT_MIZ, PauliString, SingleQubitClifford
from .state import GraphError, GraphWithLC, _measure_inplace

ROLE_CLUSTER = "cluster"
ROLE_AUX = "edge-auxiliary"
ROLE_DISCARD = "discard"

EVEN_BYPRODUCTS = frozenset({IDENTITY, PAULI_Z})
ODD_BYPRODUCTS = frozenset({IDENTITY, PAULI_Z, SQRT_IZ, SQRT_MIZ})


@dataclass
class HeavyHexLattice:
    """A heavy-hex coupling graph with row/column coordinates for every qubit."""

    graph: nx.Graph
    coords: dict[int, tuple[float, int]]
    offset: int = 0
    name: str = "heavy-hex"

    def __post_init__(self) -> None:
        if set(self.coords) != set(self.graph.nodes):
            raise GraphError("every qubit needs coordinates")
        if max((d for _, d in self.graph.degree), default=0) > 3:
            raise GraphError("heavy-hex graphs have degree at most 3")
        if not nx.is_bipartite(self.graph):
            raise GraphError("heavy-hex graphs are bipartite")
        self._at = {xy: q for q, xy in self.coords.items()}

    @property
    def num_qubits(self) -> int:
        return self.graph.number_of_nodes()

    def at(self, r: float, c: int) -> int | None:
        return self._at.get((r, c))

    def row_qubits(self) -> list[int]:
        return sorted((q for q, (r, _) in self.coords.items() if float(r).is_integer()), key=lambda q: self.coords[q])

    def rows(self) -> list[int]:
        return sorted({int(r) for r, _ in self.coords.values() if float(r).is_integer()})

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "offset": self.offset,
            "edges": sorted([min(e), max(e)] for e in self.graph.edges),
            "coords": {str(q): list(xy) for q, xy in sorted(self.coords.items())},
        }


def build_heavy_hex(
    spans: list[tuple[int, int]],
    offset: int = 0,
    dangling_top: bool = False,
    dangling_bottom: bool = False,
    name: str = "heavy-hex",
) -> HeavyHexLattice:
    """Heavy-hex lattice with ``len(spans)`` rows; row ``r`` covers columns ``spans[r]``.

    Qubits are numbered row-major with each bridge row between its two rows.
    ``dangling_*`` adds bridge qubits pointing to absent rows, as on real chips.
    """
    coords: dict[int, tuple[float, int]] = {}
    q = 0

    def link_cols(boundary: int, lo: int, hi: int) -> list[int]:
        base = (offset + 2 * (boundary % 2)) % 4
        return [c for c in range(lo, hi + 1) if c % 4 == base]

    if dangling_top:
        for c in link_cols(-1, *spans[0]):
            coords[q] = (-0.5, c)
            q += 1
    for r, (lo, hi) in enumerate(spans):
        for c in range(lo, hi + 1):
            coords[q] = (float(r), c)
            q += 1
        if r + 1 < len(spans):
            lo2, hi2 = spans[r + 1]
            for c in link_cols(r, max(lo, lo2), min(hi, hi2)):
                coords[q] = (r + 0.5, c)
                q += 1
        elif dangling_bottom:
            for c in link_cols(r, lo, hi):
                coords[q] = (r + 0.5, c)
                q += 1
    at = {xy: k for k, xy in coords.items()}
    g = nx.Graph()
    g.add_nodes_from(coords)
    for k, (r, c) in coords.items():
        if float(r).is_integer():
            nxt = at.get((r, c + 1))
            if nxt is not None:
                g.add_edge(k, nxt)
        else:
            for rr in (r - 0.5, r + 0.5):
                other = at.get((rr, c))
                if other is not None:
                    g.add_edge(k, other)
    return HeavyHexLattice(g, {k: (float(r) if float(r).is_integer() else r, c) for k, (r, c) in coords.items()}, offset, name)


def falcon27() -> HeavyHexLattice:
    """27-qubit layout: two rows of ten, three bridges, four dangling bridges."""
    return build_heavy_hex([(0, 9), (1, 10)], offset=1, dangling_top=True, dangling_bottom=True, name="falcon27")


def eagle127() -> HeavyHexLattice:
    """127-qubit layout: seven rows (14/15 qubits) joined by six rows of four bridges."""
    spans = [(0, 13)] + [(0, 14)] * 5 + [(1, 14)]
    return build_heavy_hex(spans, offset=0, name="eagle127")


def honeycomb() -> HeavyHexLattice:
    """A single 12-qubit cell."""
    return build_heavy_hex([(0, 4), (0, 4)], offset=0, name="honeycomb")


def heavy_hex_for_grid(rows: int, cols: int) -> HeavyHexLattice:
    """Smallest lattice in this family that hosts a ``rows x cols`` cluster."""
    if rows < 1 or cols < 1:
        raise GraphError("grid must be at least 1x1")
    width = 4 * cols - 2
    return build_heavy_hex([(0, width)] * rows, offset=0, name=f"heavy-hex-{rows}x{cols}")


def load_coupling_map(path: str | Path) -> HeavyHexLattice:
    """Read ``{"num_qubits", "edges", "coords", "offset"?}`` JSON into a lattice.

    ``coords`` maps qubit index to ``[row, col]``; bridge rows are half-integers.
    """
    data = json.loads(Path(path).read_text())
    return lattice_from_json(data)


def lattice_from_json(data: Mapping) -> HeavyHexLattice:
    n = int(data["num_qubits"])
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for a, b in data["edges"]:
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"edge ({a}, {b}) out of range")
        g.add_edge(int(a), int(b))
    if "coords" not in data:
        raise GraphError("coupling map needs a 'coords' grid mapping for cluster extraction")
    coords = {}
    for k, (r, c) in data["coords"].items():
        r = float(r)
        coords[int(k)] = (r, int(c))
    return HeavyHexLattice(g, coords, int(data.get("offset", 0)), str(data.get("name", "device")))


@dataclass
class HexClusterPlan:
    """Measurement assignment reducing a heavy-hex graph state to a cluster grid."""

    lattice: HeavyHexLattice
    shape: tuple[int, int]
    cluster: dict[tuple[int, int], int]
    roles: dict[int, str]
    axes: dict[int, str]
    order: list[int]
    special_neighbor: dict[int, int] = field(default_factory=dict)

    @property
    def used(self) -> list[int]:
        return sorted(q for q, r in self.roles.items() if r != ROLE_DISCARD)

    @property
    def auxiliary(self) -> list[int]:
        return list(self.order)

    def used_subgraph(self) -> nx.Graph:
        return self.lattice.graph.subgraph(self.used).copy()

    def cluster_graph(self) -> nx.Graph:
        rows, cols = self.shape
        g = nx.Graph()
        g.add_nodes_from(self.cluster.values())
        for (i, j), q in self.cluster.items():
            if i + 1 < rows:
                g.add_edge(q, self.cluster[(i + 1, j)])
            if j + 1 < cols:
                g.add_edge(q, self.cluster[(i, j + 1)])
        return g

    def coloring(self) -> dict[int, int]:
        return {q: (i + j) % 2 for (i, j), q in self.cluster.items()}

    def to_json(self) -> dict:
        return {
            "device": self.lattice.name,
            "shape": list(self.shape),
            "cluster": {f"{i},{j}": q for (i, j), q in sorted(self.cluster.items())},
            "axes": {str(q): a for q, a in sorted(self.axes.items())},
            "order": self.order,
            "special_neighbor": {str(k): v for k, v in self.special_neighbor.items()},
            "discarded": sorted(q for q, r in self.roles.items() if r == ROLE_DISCARD),
        }


def _try_plan(lat: HeavyHexLattice, rows: int, cols: int, r0: int, p0: int) -> HexClusterPlan | None:
    at = lat.at

    def link_col(boundary_row: int, pair_c: int) -> int:
        base = (lat.offset + 2 * (boundary_row % 2)) % 4
        return pair_c if pair_c % 4 == base else pair_c + 2

    cluster: dict[tuple[int, int], int] = {}
    roles: dict[int, str] = {}
    merges: list[tuple[int, int, int]] = []  # (connector, discarded corner, survivor)
    ys: list[int] = []
    for i in range(rows):
        r = float(r0 + i)
        for j in range(cols):
            c = p0 + 4 * j
            left, right = at(r, c), at(r, c + 2)
            needs = set()
            if i > 0:
                needs.add(link_col(r0 + i - 1, c))
            if i + 1 < rows:
                needs.add(link_col(r0 + i, c))
            if j > 0:
                needs.add(c)
            if j + 1 < cols:
                needs.add(c + 2)
            present = {cc for cc, q in ((c, left), (c + 2, right)) if q is not None}
            if not needs <= present or not present:
                return None
            if needs <= {c} and left is not None:
                survivor = left
            elif needs <= {c + 2} and right is not None:
                survivor = right
            else:
                mid = at(r, c + 1)
                if mid is None:
                    return None
                merges.append((mid, left, right))
                survivor = right
                roles[mid] = roles[left] = ROLE_AUX
            cluster[(i, j)] = survivor
            roles[survivor] = ROLE_CLUSTER
            if j + 1 < cols:
                e = at(r, c + 3)
                if e is None:
                    return None
                ys.append(e)
            if i + 1 < rows:
                b = at(r + 0.5, link_col(r0 + i, c))
                if b is None:
                    return None
                ys.append(b)
    for q in ys:
        roles[q] = ROLE_AUX
    for q in lat.graph.nodes:
        roles.setdefault(q, ROLE_DISCARD)
    used = {q for q, role in roles.items() if role != ROLE_DISCARD}
    # every used qubit must be wired exactly as the reduction assumes
    sub = lat.graph.subgraph(used)
    if not nx.is_connected(sub):
        return None
    axes = {}
    order = []
    special = {}
    for mid, corner, survivor in merges:
        axes[mid] = "X"
        axes[corner] = "X"
        special[mid] = corner
        order += [mid, corner]
    for q in ys:
        axes[q] = "Y"
        order.append(q)
    return HexClusterPlan(lat, (rows, cols), cluster, roles, axes, order, special)


def hexcluster_pattern(lattice: HeavyHexLattice, rows: int, cols: int) -> HexClusterPlan:
    """Pauli bases for every auxiliary qubit so that a ``rows x cols`` cluster remains.

    Tries every row offset and both corner pairings; returns the first fit.
    """
    irows = lattice.rows()
    corner_cols = sorted({c for q, (r, c) in lattice.coords.items() if float(r).is_integer() and lattice.graph.degree(q) == 3} | {
        c for q, (r, c) in lattice.coords.items() if not float(r).is_integer()
    })
    if not corner_cols:
        raise GraphError("lattice has no bridges")
    parity = corner_cols[0] % 2
    lo = min(c for _, c in lattice.coords.values())
    hi = max(c for _, c in lattice.coords.values())
    for r0 in irows:
        if r0 + rows - 1 > irows[-1]:
            break
        for shift in (0, 2):
            start = lo - 4 + ((parity + shift - (lo - 4)) % 4)
            for k in range((hi - start) // 4 + 1):
                p0 = start + 4 * k
                plan = _try_plan(lattice, rows, cols, r0, p0)
                if plan is not None:
                    return plan
    raise GraphError(f"a {rows}x{cols} cluster does not fit on {lattice.name}")


def apply_plan(plan: HexClusterPlan, outcomes: Mapping[int, int] | None = None, rng: np.random.Generator | None = None) -> GraphWithLC:
    """Run the plan's Pauli measurements on the prepared heavy-hex graph state.

    Outcomes default to random bits from ``rng`` (or all zero without one).
    """
    g = GraphWithLC(plan.used_subgraph())
    for q in plan.order:
        if outcomes is not None:
            s = int(outcomes[q])
        elif rng is not None:
            s = int(rng.integers(2))
        else:
            s = 0
        _measure_inplace(g, q, plan.axes[q], s, plan.special_neighbor.get(q))
    return g


def check_cluster(plan: HexClusterPlan, g: GraphWithLC) -> list[str]:
    """Problems found in a post-measurement graph; empty when it is the planned cluster."""
    problems = []
    want = {frozenset(e) for e in plan.cluster_graph().edges}
    if set(g.adj) != set(plan.cluster.values()):
        problems.append("surviving vertices differ from the cluster map")
    if g.edges() != want:
        problems.append("adjacency is not the cluster grid")
    for v in g.adj:
        allowed = EVEN_BYPRODUCTS if len(want_neighbors(plan, v)) % 2 == 0 else ODD_BYPRODUCTS
        if g.vc[v] not in allowed:
            problems.append(f"byproduct {g.vc[v].name} on vertex {v} outside the allowed set")
    return problems


def want_neighbors(plan: HexClusterPlan, v: int) -> set[int]:
    return set(plan.cluster_graph()[v])


@dataclass(frozen=True)
class AdjustedStabilizer:
    vertex: int
    pauli: PauliString   # unsigned measurement string on the cluster qubits
    sign: int            # expected product of +-1 outcomes is ``sign``


def adjusted_stabilizers(g: GraphWithLC, order: list[int] | None = None) -> list[AdjustedStabilizer]:
    """Cluster stabilizers conjugated by the byproducts on each qubit.

    Z byproducts only contribute signs; ``sqrt(+-iZ)`` swaps X for Y.
    """
    for v, c in g.vc.items():
        if c not in ODD_BYPRODUCTS:
            raise GraphError(f"unexpected byproduct {c.name} on vertex {v}")
    order = order or sorted(g.adj)
    out = []
    for v, p in g.stabilizers(order).items():
        out.append(AdjustedStabilizer(v, p.unsigned(), p.sign))
    return out
