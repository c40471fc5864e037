"""Dense statevector backend.

A :class:`StateVector` keeps one tensor axis per live qubit together with a
label for each axis, so qubits can be measured out and contracted away while
callers keep addressing them by vertex name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .pauli import SINGLE_MATRICES, PauliString, PauliSum, SingleQubitClifford

Label = Hashable

MAX_PATTERN_QUBITS = 14
MAX_HAMILTONIAN_QUBITS = 10
ZERO_PROBABILITY = 1e-14

SQRT1_2 = 1 / math.sqrt(2)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2


class SimulationError(ValueError):
    """Raised on impossible branches, bad indices or oversized states."""


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Splittable PRNG: independent streams for distinct ``keys`` under one seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(keys))))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the stream ``make_rng(seed, *keys)`` would give."""
    words = np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(2, np.uint32)
    return int((int(words[0]) << 31) ^ int(words[1]))


def phase_gate(theta: float) -> np.ndarray:
    """``P(theta) = diag(1, exp(-i theta))``, a Z rotation up to global phase."""
    return np.array([[1, 0], [0, np.exp(-1j * theta)]], dtype=complex)


def u3_gate(zeta: float, eta: float, xi: float) -> np.ndarray:
    """Euler rotation with ``xi`` on the upper-right and ``eta`` on the lower-left phase."""
    c, s = math.cos(zeta / 2), math.sin(zeta / 2)
    return np.array(
        [[c, -np.exp(1j * xi) * s], [np.exp(1j * eta) * s, np.exp(1j * (eta + xi)) * c]],
        dtype=complex,
    )


def xy_basis_state(theta: float, outcome: int) -> np.ndarray:
    """``|theta_+>`` for outcome 0, ``|theta_->`` for outcome 1."""
    return np.array([1, (-1) ** outcome * np.exp(1j * theta)], dtype=complex) * SQRT1_2


_PAULI_EIGEN = {
    "X": (np.array([1, 1]) * SQRT1_2, np.array([1, -1]) * SQRT1_2),
    "Y": (np.array([1, 1j]) * SQRT1_2, np.array([1, -1j]) * SQRT1_2),
    "Z": (np.array([1, 0]), np.array([0, 1])),
}


@dataclass(frozen=True)
class MeasurementOutcome:
    qubit: Label
    basis: float | str
    outcome: int
    probability: float


class StateVector:
    """Amplitudes over labelled qubits; axis ``k`` of ``tensor`` belongs to ``labels[k]``."""

    __slots__ = ("tensor", "labels")

    def __init__(self, amplitudes: np.ndarray, labels: Sequence[Label] | None = None):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(amplitudes.size))) if amplitudes.size > 1 else 0
        if 2**n != amplitudes.size:
            raise SimulationError("amplitude count is not a power of two")
        self.tensor = amplitudes.reshape((2,) * n)
        self.labels = list(range(n)) if labels is None else list(labels)
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise SimulationError("labels must be unique, one per qubit")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def vector(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def copy(self) -> StateVector:
        return StateVector(self.tensor.copy(), self.labels)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalized(self) -> StateVector:
        return StateVector(self.tensor / self.norm(), self.labels)

    def axis(self, q: Label) -> int:
        try:
            return self.labels.index(q)
        except ValueError:
            raise SimulationError(f"qubit {q!r} is not live") from None

    def reordered(self, labels: Sequence[Label]) -> StateVector:
        """Same state with axes permuted to ``labels`` order."""
        perm = [self.axis(q) for q in labels]
        if len(perm) != self.n:
            raise SimulationError("reorder needs every live label")
        return StateVector(np.transpose(self.tensor, perm).copy(), labels)

    def tensor_with(self, other: StateVector) -> StateVector:
        if set(self.labels) & set(other.labels):
            raise SimulationError("labels overlap")
        t = np.multiply.outer(self.tensor, other.tensor)
        return StateVector(t, self.labels + other.labels)

    # -- in-place gate kernels -------------------------------------------------

    def apply_1q(self, u: np.ndarray, q: Label) -> StateVector:
        ax = self.axis(q)
        self.tensor = np.moveaxis(np.tensordot(u, self.tensor, axes=([1], [ax])), 0, ax)
        return self

    def apply_cz(self, a: Label, b: Label) -> StateVector:
        ia, ib = self.axis(a), self.axis(b)
        if ia == ib:
            raise SimulationError("CZ needs two distinct qubits")
        idx = [slice(None)] * self.n
        idx[ia] = 1
        idx[ib] = 1
        self.tensor[tuple(idx)] *= -1
        return self

    def apply_pauli(self, p: PauliString, qubits: Sequence[Label] | None = None) -> StateVector:
        qubits = self.labels if qubits is None else qubits
        for q, letter in zip(qubits, p.letters):
            if letter != "I":
                self.apply_1q(SINGLE_MATRICES[letter], q)
        self.tensor = self.tensor * 1j**p.phase
        return self


def zero_state(labels: Sequence[Label]) -> StateVector:
    t = np.zeros((2,) * len(labels), dtype=complex)
    t[(0,) * len(labels)] = 1
    return StateVector(t, labels)


def plus_state(labels: Sequence[Label]) -> StateVector:
    n = len(labels)
    return StateVector(np.full((2,) * n, 2 ** (-n / 2), dtype=complex), labels)


def _edges_and_nodes(graph) -> tuple[list[Label], list[tuple[Label, Label]]]:
    if hasattr(graph, "nodes") and hasattr(graph, "edges"):
        return list(graph.nodes), [tuple(e) for e in graph.edges]
    nodes, edges = graph
    return list(nodes), [tuple(e) for e in edges]


def prepare_graph_state(
    graph,
    inputs: Mapping[Label, np.ndarray] | None = None,
    max_qubits: int = MAX_PATTERN_QUBITS,
) -> StateVector:
    """``prod CZ |+>^V`` with optional input vertices initialised to given states.

    ``graph`` is a networkx graph or a ``(nodes, edges)`` pair.
    """
    nodes, edges = _edges_and_nodes(graph)
    if len(nodes) > max_qubits:
        raise SimulationError(f"{len(nodes)} qubits exceeds the limit of {max_qubits}")
    for a, b in edges:
        if a == b:
            raise SimulationError(f"self-loop on {a!r}")
    inputs = inputs or {}
    state = np.array([1.0 + 0j])
    for v in nodes:
        psi = np.asarray(inputs[v], dtype=complex) if v in inputs else np.array([SQRT1_2, SQRT1_2], dtype=complex)
        if abs(np.linalg.norm(psi) - 1) > 1e-10:
            raise SimulationError(f"input state on {v!r} is not normalised")
        state = np.multiply.outer(state, psi)
    sv = StateVector(state.reshape((2,) * len(nodes)), nodes)
    for a, b in edges:
        sv.apply_cz(a, b)
    return sv


Gate = tuple


def gate_matrix(gate: Gate) -> np.ndarray:
    """Single-qubit matrix for a gate tuple (all but the trailing qubit entry)."""
    kind = gate[0]
    if kind == "H":
        return H_MATRIX
    if kind == "P":
        return phase_gate(gate[1])
    if kind == "U3":
        return u3_gate(*gate[1:4])
    if kind in ("X", "Y", "Z", "I"):
        return SINGLE_MATRICES[kind]
    if kind == "C":
        c = gate[1]
        return c.matrix() if isinstance(c, SingleQubitClifford) else np.asarray(c, dtype=complex)
    raise SimulationError(f"unknown gate {kind!r}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate tuple, returning a new state.

    Supported forms: ``("CZ", a, b)``, ``("H", q)``, ``("P", theta, q)``,
    ``("U3", zeta, eta, xi, q)``, ``("X"|"Y"|"Z", q)``, ``("C", clifford, q)``.
    """
    out = state.copy()
    if gate[0] == "CZ":
        return out.apply_cz(gate[1], gate[2])
    return out.apply_1q(gate_matrix(gate), gate[-1])


def run_circuit(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    out = state.copy()
    for g in gates:
        if g[0] == "CZ":
            out.apply_cz(g[1], g[2])
        else:
            out.apply_1q(gate_matrix(g), g[-1])
    return out


def _project(
    state: StateVector, q: Label, bra_vectors: tuple[np.ndarray, np.ndarray], outcome, renormalize: bool
) -> tuple[int, float, StateVector]:
    ax = state.axis(q)
    branches = [np.tensordot(np.conj(v), state.tensor, axes=([0], [ax])) for v in bra_vectors]
    probs = [float(np.vdot(b, b).real) for b in branches]
    total = probs[0] + probs[1]
    if isinstance(outcome, np.random.Generator):
        s = int(outcome.random() * total >= probs[0])
    elif outcome is None:
        raise SimulationError("need a forced outcome or a random generator")
    else:
        s = int(outcome)
        if s not in (0, 1):
            raise SimulationError(f"outcome must be 0 or 1, got {outcome!r}")
    p = probs[s] / total if total > 0 else 0.0
    if p <= ZERO_PROBABILITY:
        raise SimulationError(f"outcome {s} on qubit {q!r} has zero probability")
    branch = branches[s]
    if renormalize:
        branch = branch / math.sqrt(probs[s])
    labels = state.labels[:ax] + state.labels[ax + 1 :]
    return s, p, StateVector(branch, labels)


def measure_xy(
    state: StateVector, qubit: Label, theta: float, outcome=None, renormalize: bool = True
) -> tuple[MeasurementOutcome, StateVector]:
    """Project ``qubit`` onto ``|theta_+->`` and contract it out.

    ``outcome`` is a forced bit or a ``numpy.random.Generator``.
    """
    vecs = (xy_basis_state(theta, 0), xy_basis_state(theta, 1))
    s, p, out = _project(state, qubit, vecs, outcome, renormalize)
    return MeasurementOutcome(qubit, float(theta), s, p), out


def measure_pauli(
    state: StateVector, qubit: Label, axis: str, outcome=None, renormalize: bool = True
) -> tuple[MeasurementOutcome, StateVector]:
    """Measure in a Pauli eigenbasis; outcome 0 is the +1 eigenvector."""
    if axis not in _PAULI_EIGEN:
        raise SimulationError(f"bad Pauli axis {axis!r}")
    vecs = tuple(np.asarray(v, dtype=complex) for v in _PAULI_EIGEN[axis])
    s, p, out = _project(state, qubit, vecs, outcome, renormalize)
    return MeasurementOutcome(qubit, axis, s, p), out


def _pauli_action_indices(p: PauliString, n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n)
    z = p.z_bits()
    parity = np.zeros(idx.shape, dtype=np.int64)
    t = idx & z
    while np.any(t):
        parity ^= t & 1
        t >>= 1
    return idx ^ p.x_bits(), 1 - 2 * parity


def expectation(state: StateVector, observable: PauliSum, qubits: Sequence[Label] | None = None) -> float:
    """``<psi|H|psi>`` with Pauli position ``k`` acting on ``qubits[k]`` (default: live order)."""
    if qubits is not None:
        state = state.reordered(qubits)
    if observable.n != state.n:
        raise SimulationError(f"observable on {observable.n} qubits, state has {state.n}")
    psi = state.vector
    total = 0.0
    for c, p in observable:
        flip, sign = _pauli_action_indices(p, state.n)
        ny = p.letters.count("Y")
        # <psi| P |psi> = sum_k conj(psi[k^x]) i^ny (-1)^{k.z} psi[k]
        val = np.vdot(psi[flip], sign * psi) * 1j**ny
        total += c * val.real
    return float(total)


def ground_state_energy(h: PauliSum, max_qubits: int = MAX_HAMILTONIAN_QUBITS) -> tuple[float, StateVector]:
    """Smallest eigenvalue and a unit eigenvector by dense diagonalisation."""
    if h.n > max_qubits:
        raise SimulationError(f"{h.n} qubits exceeds the diagonalisation limit of {max_qubits}")
    m = h.to_matrix()
    w, v = np.linalg.eigh(m)
    return float(w[0]), StateVector(v[:, 0].copy())


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.n != b.n:
        raise SimulationError("state sizes differ")
    if a.labels != b.labels and set(a.labels) == set(b.labels):
        b = b.reordered(a.labels)
    return complex(np.vdot(a.vector, b.vector))


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2`` of the normalised states."""
    return abs(overlap(a, b)) ** 2 / (a.norm() ** 2 * b.norm() ** 2)


def states_equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    return abs(overlap(a, b)) / (a.norm() * b.norm()) >= 1 - tol
