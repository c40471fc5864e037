"""Graph states dressed with local Clifford corrections.

A :class:`GraphWithLC` represents ``(prod_v vc_v) |G>``.  Pauli measurements
are pushed through ``vc_v`` to find the effective axis on the bare graph
state, the standard graphical rule for that axis rewrites the graph, and the
rule's outcome-dependent byproducts are composed into ``vc``.
"""

from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Mapping

import networkx as nx

from ..pauli import (
    IDENTITY,
    PAULI_Z,
    SQRT_IY,
    SQRT_IZ,
    SQRT_MIX,
    SQRT_MIY,
    SQRT_MIZ,
    PauliString,
    SingleQubitClifford,
    conjugate,
)
from ..statevector import MAX_PATTERN_QUBITS, StateVector, prepare_graph_state

Vertex = Hashable


class GraphError(ValueError):
    """Raised for operations on deleted vertices or impossible outcomes."""


class GraphWithLC:
    """Adjacency sets plus one single-qubit Clifford per live vertex."""

    def __init__(
        self,
        graph: nx.Graph | Iterable[tuple[Vertex, Vertex]] = (),
        vertices: Iterable[Vertex] = (),
        vc: Mapping[Vertex, SingleQubitClifford] | None = None,
    ):
        g = graph if isinstance(graph, nx.Graph) else nx.Graph(list(graph))
        self.adj: dict[Vertex, set[Vertex]] = {v: set(g[v]) for v in g.nodes}
        for v in vertices:
            self.adj.setdefault(v, set())
        for v, nb in self.adj.items():
            if v in nb:
                raise GraphError(f"self-loop on {v!r}")
        self.vc: dict[Vertex, SingleQubitClifford] = {v: IDENTITY for v in self.adj}
        if vc:
            for v, c in vc.items():
                self._require_live(v)
                self.vc[v] = c
        self.deleted: set[Vertex] = set()

    def copy(self) -> GraphWithLC:
        out = GraphWithLC.__new__(GraphWithLC)
        out.adj = {v: set(nb) for v, nb in self.adj.items()}
        out.vc = dict(self.vc)
        out.deleted = set(self.deleted)
        return out

    def _require_live(self, v: Vertex) -> None:
        if v not in self.adj:
            raise GraphError(f"vertex {v!r} is not live")

    @property
    def vertices(self) -> list[Vertex]:
        return list(self.adj)

    def neighbors(self, v: Vertex) -> set[Vertex]:
        self._require_live(v)
        return self.adj[v]

    def edges(self) -> set[frozenset]:
        return {frozenset((a, b)) for a, nb in self.adj.items() for b in nb}

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.adj)
        g.add_edges_from(tuple(e) for e in self.edges())
        return g

    def toggle(self, a: Vertex, b: Vertex) -> None:
        if b in self.adj[a]:
            self.adj[a].discard(b)
            self.adj[b].discard(a)
        else:
            self.adj[a].add(b)
            self.adj[b].add(a)

    def _tau(self, v: Vertex) -> None:
        """Edge-complement the neighbourhood of ``v`` (graph only)."""
        for a, b in itertools.combinations(sorted(self.adj[v], key=_key), 2):
            self.toggle(a, b)

    def _apply_byproduct(self, v: Vertex, u: SingleQubitClifford) -> None:
        # state = vc U |G'>  ->  vc_v <- vc_v * U_v
        self.vc[v] = self.vc[v].compose(u)

    def _remove(self, v: Vertex) -> None:
        for w in self.adj.pop(v):
            self.adj[w].discard(v)
        del self.vc[v]
        self.deleted.add(v)

    # -- state-level views --------------------------------------------------

    def stabilizers(self, order: list[Vertex] | None = None) -> dict[Vertex, PauliString]:
        """Generators ``vc K_v vc^dag`` of the represented state, in ``order``."""
        order = order or sorted(self.adj, key=_key)
        pos = {v: i for i, v in enumerate(order)}
        out = {}
        for v in order:
            sites = {pos[v]: "X", **{pos[w]: "Z" for w in self.adj[v]}}
            p = PauliString.from_sites(len(order), sites)
            for w, i in pos.items():
                if p.letters[i] != "I":
                    p = conjugate(self.vc[w], p, i)
            out[v] = p
        return out

    def to_statevector(self, order: list[Vertex] | None = None, max_qubits: int = MAX_PATTERN_QUBITS) -> StateVector:
        order = order or sorted(self.adj, key=_key)
        edges = [tuple(e) for e in self.edges()]
        sv = prepare_graph_state((order, edges), max_qubits=max_qubits)
        for v in order:
            if self.vc[v] != IDENTITY:
                sv.apply_1q(self.vc[v].matrix(), v)
        return sv

    def __repr__(self) -> str:
        return f"GraphWithLC(|V|={len(self.adj)}, |E|={len(self.edges())}, deleted={len(self.deleted)})"


def _key(v):
    return (str(type(v)), v) if not isinstance(v, (int, float)) else ("", v)


def _lc_inplace(g: GraphWithLC, v: Vertex) -> None:
    """LC at ``v`` keeping the represented state fixed.

    ``|tau_v G> = sqrt(-iX_v) prod_{j in N(v)} sqrt(iZ_j) |G>`` and ``tau_v`` is an
    involution, so the same local unitary maps ``tau_v G`` back to ``G``.
    """
    g._require_live(v)
    nb = list(g.adj[v])
    g._tau(v)
    g._apply_byproduct(v, SQRT_MIX)
    for w in nb:
        g._apply_byproduct(w, SQRT_IZ)


def local_complement(g: GraphWithLC, v: Vertex) -> GraphWithLC:
    """Return a copy with the neighbourhood of ``v`` complemented, same state."""
    out = g.copy()
    _lc_inplace(out, v)
    return out


def effective_axis(c: SingleQubitClifford, axis: str, outcome: int) -> tuple[str, int]:
    """Axis/outcome seen by the bare graph state when measuring ``axis`` after ``c``."""
    sign, letter = c.preimage(axis)
    return letter, outcome ^ (sign < 0)


def _measure_inplace(g: GraphWithLC, v: Vertex, axis: str, outcome: int, neighbor: Vertex | None) -> None:
    g._require_live(v)
    if outcome not in (0, 1):
        raise GraphError(f"outcome must be 0 or 1, got {outcome!r}")
    eff, s = effective_axis(g.vc[v], axis, outcome)
    nv = set(g.adj[v])
    if eff == "Z":
        if s:
            for w in nv:
                g._apply_byproduct(w, PAULI_Z)
        g._remove(v)
    elif eff == "Y":
        g._tau(v)
        for w in nv:
            g._apply_byproduct(w, SQRT_IZ if s else SQRT_MIZ)
        g._remove(v)
    elif eff == "X":
        if not nv:
            # isolated |+>: X is deterministic
            if s:
                raise GraphError(f"X outcome 1 on isolated vertex {v!r} has zero probability")
            g._remove(v)
            return
        b0 = min(nv, key=_key) if neighbor is None else neighbor
        if b0 not in nv:
            raise GraphError(f"{b0!r} is not a neighbour of {v!r}")
        nb0 = set(g.adj[b0])
        if s == 0:
            zs = nv - nb0 - {b0}
            g._apply_byproduct(b0, SQRT_IY)
        else:
            zs = nb0 - nv - {v}
            g._apply_byproduct(b0, SQRT_MIY)
        for w in zs:
            g._apply_byproduct(w, PAULI_Z)
        g._tau(b0)
        g._tau(v)
        g._remove(v)
        g._tau(b0)
    else:
        raise GraphError(f"bad effective axis {eff!r}")


def pauli_measure_graph(
    g: GraphWithLC, v: Vertex, axis: str, outcome: int, neighbor: Vertex | None = None
) -> GraphWithLC:
    """Measure ``v`` in the physical Pauli basis ``axis``; outcome 0 is the +1 eigenvalue.

    For an effective X measurement ``neighbor`` selects the special neighbour of
    the rule; by default the lowest-labelled live neighbour.
    """
    out = g.copy()
    _measure_inplace(out, v, axis, outcome, neighbor)
    return out
