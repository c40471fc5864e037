"""Bit-packed stabilizer tableau for Pauli measurements on graph states.

Generators are stored as ``i^r X^x Z^z`` with ``x``, ``z`` Python-int bit
masks (bit ``k`` is qubit ``order[k]``).  This is an oracle independent of
the graph-rewriting rules: it measures the actual Pauli operators.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Sequence

import networkx as nx
import numpy as np

from ..pauli import PauliString
from .state import GraphError

Vertex = Hashable


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _mul(a: tuple[int, int, int], b: tuple[int, int, int]) -> tuple[int, int, int]:
    xa, za, ra = a
    xb, zb, rb = b
    # X^xa Z^za X^xb Z^zb = (-1)^{|za & xb|} X^{xa^xb} Z^{za^zb}
    return xa ^ xb, za ^ zb, (ra + rb + 2 * _popcount(za & xb)) % 4


def _bit(t: tuple[int, int, int], b: int, n: int) -> int:
    return (t[0] >> b & 1) if b < n else (t[1] >> (b - n) & 1)


def _anticommute(a: tuple[int, int, int], b: tuple[int, int, int]) -> bool:
    return bool(_popcount((a[0] & b[1]) ^ (a[1] & b[0])) & 1)


class StabilizerTableau:
    def __init__(self, order: Sequence[Vertex], gens: Iterable[tuple[int, int, int]]):
        self.order = list(order)
        self.index = {v: k for k, v in enumerate(self.order)}
        self.gens = list(gens)
        self._reduced: list[tuple[int, tuple[int, int, int]]] | None = None

    @classmethod
    def graph_state(cls, g: nx.Graph, order: Sequence[Vertex] | None = None) -> StabilizerTableau:
        order = list(order) if order is not None else sorted(g.nodes)
        idx = {v: k for k, v in enumerate(order)}
        gens = []
        for v in order:
            z = 0
            for w in g[v]:
                z |= 1 << idx[w]
            gens.append((1 << idx[v], z, 0))
        return cls(order, gens)

    def single(self, q: Vertex, letter: str) -> tuple[int, int, int]:
        bit = 1 << self.index[q]
        return {"X": (bit, 0, 0), "Z": (0, bit, 0), "Y": (bit, bit, 1)}[letter]

    def encode(self, p: PauliString, qubits: Sequence[Vertex]) -> tuple[int, int, int]:
        """``p`` (with sign) on the listed qubits as an ``i^r X^x Z^z`` triple."""
        x = z = 0
        r = p.phase
        for q, letter in zip(qubits, p.letters):
            bit = 1 << self.index[q]
            if letter in "XY":
                x |= bit
            if letter in "ZY":
                z |= bit
            if letter == "Y":
                r += 1  # Y = i X Z
        return x, z, r % 4

    def measure(self, q: Vertex, letter: str, outcome: int | np.random.Generator) -> tuple[int, bool]:
        """Measure a single-qubit Pauli; returns ``(bit, was_deterministic)``.

        A forced outcome that contradicts a deterministic result raises
        ``GraphError``.
        """
        m = self.single(q, letter)
        anti = [k for k, gk in enumerate(self.gens) if _anticommute(gk, m)]
        if not anti:
            sign = self.sign_of(m)
            bit = 0 if sign == 1 else 1
            if isinstance(outcome, (int, np.integer)) and int(outcome) != bit:
                raise GraphError(f"outcome {outcome} on {q!r} has zero probability")
            return bit, True
        s = int(outcome.integers(2)) if isinstance(outcome, np.random.Generator) else int(outcome)
        first = anti[0]
        pivot = self.gens[first]
        for k in anti[1:]:
            self.gens[k] = _mul(self.gens[k], pivot)
        self.gens[first] = (m[0], m[1], (m[2] + 2 * s) % 4)
        self._reduced = None
        return s, False

    def sign_of(self, p: tuple[int, int, int]) -> int | None:
        """``+1``/``-1`` if ``p`` or ``-p`` is in the stabilizer group, else ``None``."""
        if any(_anticommute(gk, p) for gk in self.gens):
            return None
        n = len(self.order)
        acc = (0, 0, 0)
        for b, row in self._reduce():
            if _bit(p, b, n):
                acc = _mul(acc, row)
        if (acc[0], acc[1]) != (p[0], p[1]):
            return None
        return {0: 1, 2: -1}.get((p[2] - acc[2]) % 4)

    def _reduce(self) -> list[tuple[int, tuple[int, int, int]]]:
        """Gauss-Jordan form as ``(pivot bit, row)``; generators commute so order is irrelevant."""
        if self._reduced is not None:
            return self._reduced
        rows = list(self.gens)
        n = len(self.order)
        pivots = []
        free = list(range(len(rows)))
        for b in range(2 * n):
            piv = next((k for k in free if _bit(rows[k], b, n)), None)
            if piv is None:
                continue
            free.remove(piv)
            for k in range(len(rows)):
                if k != piv and _bit(rows[k], b, n):
                    rows[k] = _mul(rows[k], rows[piv])
            pivots.append((b, piv))
        self._reduced = [(b, rows[k]) for b, k in pivots]
        return self._reduced

    def contains(self, p: PauliString, qubits: Sequence[Vertex]) -> int | None:
        return self.sign_of(self.encode(p, qubits))
