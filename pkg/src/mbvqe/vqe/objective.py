"""Energy objectives for measurement-based ansätze.

The parameter vector is the pattern's measurement angles followed, when the
U3 layer is on, by ``(zeta, eta, xi)`` for every output qubit in order.
Node-wise patterns are evaluated through their equivalent circuit with a
batched simulator; other patterns run the measurement pattern itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..pattern import (
    CorrectionSets,
    MeasurementPattern,
    PatternError,
    correction_sets,
    execute,
    find_causal_flow,
)
from ..pauli import PauliString, PauliSum, commutes, qubitwise_groups
from ..statevector import H_MATRIX, SimulationError, StateVector, u3_gate

EVAL_MODES = ("exact", "shots")
EXECUTION_MODES = ("forced", "adaptive", "postselect")
MAX_BRANCH_QUBITS = 12


class ObjectiveError(ValueError):
    """Raised for inconsistent objective specifications or empty samples."""


@dataclass(frozen=True)
class NoiseModel:
    """Global depolarizing channel of strength ``p`` on the output register."""

    p: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p < 1.0:
            raise ObjectiveError("depolarizing strength must lie in [0, 1)")

    def scale(self, value: float, identity_part: float = 0.0) -> float:
        return (1 - self.p) * (value - identity_part) + identity_part


@dataclass
class ObjectiveSpec:
    pattern: MeasurementPattern
    hamiltonian: PauliSum
    u3_layer: bool = False
    eval_mode: str = "exact"
    shots: int = 0
    execution: str = "forced"
    postselect_on: tuple | None = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    backend: str = "auto"

    def __post_init__(self) -> None:
        if self.hamiltonian.n != len(self.pattern.outputs):
            raise ObjectiveError("Hamiltonian size does not match the output register")
        if self.eval_mode not in EVAL_MODES:
            raise ObjectiveError(f"eval_mode must be one of {EVAL_MODES}")
        if self.eval_mode == "shots" and self.shots <= 0:
            raise ObjectiveError("shots mode needs a positive shot count")
        if self.execution not in EXECUTION_MODES:
            raise ObjectiveError(f"execution must be one of {EXECUTION_MODES}")
        if self.backend not in ("auto", "circuit", "pattern"):
            raise ObjectiveError("backend must be auto, circuit or pattern")
        if self.backend == "circuit" and self.pattern.kind != "node-wise":
            raise ObjectiveError("circuit backend needs a node-wise pattern")

    @property
    def n_outputs(self) -> int:
        return len(self.pattern.outputs)

    @property
    def num_params(self) -> int:
        return self.pattern.num_params + (3 * self.n_outputs if self.u3_layer else 0)

    def uses_circuit(self) -> bool:
        if self.backend == "auto":
            return self.pattern.kind == "node-wise" and self.eval_mode == "exact"
        return self.backend == "circuit"


@dataclass(frozen=True)
class Evaluation:
    value: float
    stderr: float = 0.0
    acceptance: float = 1.0
    shots_used: int = 0


# ---------------------------------------------------------------------------
# batched kernels


class PauliOperator:
    """Precomputed action of a PauliSum for batched expectation values."""

    def __init__(self, h: PauliSum):
        self.n = h.n
        dim = 2**h.n
        idx = np.arange(dim)
        self.identity = 0.0
        acc: dict[int, np.ndarray] = {}
        for c, p in h:
            if p.weight == 0:
                self.identity += c
                continue
            x, z = p.x_bits(), p.z_bits()
            parity = np.array([bin(k & z).count("1") & 1 for k in range(dim)])
            vec = c * (1j ** p.letters.count("Y")) * (1 - 2 * parity)
            acc[x] = acc.get(x, 0) + vec
        self.masks = sorted(acc)
        self.coeffs = [acc[x] for x in self.masks]
        self.flips = [idx ^ x for x in self.masks]

    def expectation(self, psi: np.ndarray) -> np.ndarray:
        """Real expectation per row of ``psi`` (shape ``(B, 2**n)``)."""
        out = np.full(psi.shape[0], self.identity)
        for flip, c in zip(self.flips, self.coeffs):
            out += np.einsum("bk,bk->b", np.conj(psi[:, flip]), c * psi).real
        return out


def _apply_1q_batch(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    """Apply per-row 2x2 matrices ``u`` (shape ``(B, 2, 2)``) to qubit ``q``."""
    b = psi.shape[0]
    t = psi.reshape(b, 2**q, 2, 2 ** (n - q - 1))
    return np.einsum("bij,bajc->baic", u, t).reshape(b, -1)


def _u3_batch(zeta, eta, xi) -> np.ndarray:
    c, s = np.cos(zeta / 2), np.sin(zeta / 2)
    u = np.empty((len(zeta), 2, 2), dtype=complex)
    u[:, 0, 0] = c
    u[:, 0, 1] = -np.exp(1j * xi) * s
    u[:, 1, 0] = np.exp(1j * eta) * s
    u[:, 1, 1] = np.exp(1j * (eta + xi)) * c
    return u


class NodeWiseSimulator:
    """Batched statevector of the node-wise equivalent circuit (plus optional U3 layer)."""

    def __init__(self, n: int, edges: Sequence[tuple[int, int]], layers: int, u3: bool):
        self.n, self.layers, self.u3 = n, layers, u3
        dim = 2**n
        idx = np.arange(dim)
        sign = np.ones(dim)
        for a, b in edges:
            both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            sign *= 1 - 2 * both
        self.cz = sign
        self.num_params = n * layers + (3 * n if u3 else 0)

    def states(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        b, n = thetas.shape[0], self.n
        psi = np.full((b, 2**n), 2 ** (-n / 2), dtype=complex) * self.cz
        r = 1 / math.sqrt(2)
        for k in range(self.layers, 0, -1):
            for i in range(n):
                t = psi.reshape(b, 2**i, 2, 2 ** (n - i - 1))
                phase = np.exp(-1j * thetas[:, (k - 1) * n + i])
                a0, a1 = t[:, :, 0, :], t[:, :, 1, :] * phase[:, None, None]
                psi = np.stack(((a0 + a1) * r, (a0 - a1) * r), axis=2).reshape(b, -1)
            psi = psi * self.cz
        if self.u3:
            off = n * self.layers
            for i in range(n):
                z, e, x = (thetas[:, off + 3 * i + j] for j in range(3))
                psi = _apply_1q_batch(psi, n, i, _u3_batch(z, e, x))
        return psi


# ---------------------------------------------------------------------------
# measurement-setting sampling


_TO_Z = {"X": H_MATRIX, "Y": H_MATRIX @ np.diag([1, -1j]), "Z": np.eye(2), "I": np.eye(2)}


@dataclass(frozen=True)
class Setting:
    basis: str
    terms: tuple[tuple[float, PauliString], ...]


def measurement_settings(h: PauliSum) -> tuple[float, list[Setting]]:
    """Identity offset and qubit-wise commuting settings covering ``h``."""
    ident = sum(c for c, p in h if p.weight == 0)
    terms = [(c, p) for c, p in h if p.weight > 0]
    groups = qubitwise_groups([p for _, p in terms])
    out = []
    for g in groups:
        basis = ["Z"] * h.n
        for i in g:
            for q, letter in enumerate(terms[i][1].letters):
                if letter != "I":
                    basis[q] = letter
        out.append(Setting("".join(basis), tuple(terms[i] for i in g)))
    return ident, out


def _setting_values(setting: Setting, n: int, frame: PauliString | None) -> np.ndarray:
    """Per-bitstring value of the setting's observable (frame signs folded in)."""
    dim = 2**n
    idx = np.arange(dim)
    vals = np.zeros(dim)
    for c, p in setting.terms:
        mask = p.x_bits() | p.z_bits()
        parity = np.array([bin(int(k) & mask).count("1") & 1 for k in idx])
        sign = -1.0 if frame is not None and not commutes(frame, p) else 1.0
        vals += sign * c * (1 - 2 * parity)
    return vals


def _basis_probs(state: StateVector, basis: str, noise: NoiseModel) -> np.ndarray:
    s = state.copy()
    for q, letter in zip(s.labels, basis):
        if letter in ("X", "Y"):
            s.apply_1q(_TO_Z[letter], q)
    probs = np.abs(s.vector) ** 2
    probs = probs / probs.sum()
    if noise.p:
        probs = (1 - noise.p) * probs + noise.p / probs.size
    return probs


# ---------------------------------------------------------------------------
# the objective


@dataclass
class _Branch:
    probability: float
    state: StateVector
    frame: PauliString
    accepted: bool


class Objective:
    """Callable ``theta -> energy`` for an :class:`ObjectiveSpec`.

    ``rng`` drives shot sampling and random branches; exact evaluation of a
    pattern averages over all outcome branches (weighted by probability) when
    there are at most ``2**12`` of them.
    """

    def __init__(self, spec: ObjectiveSpec, rng: np.random.Generator | None = None):
        self.spec = spec
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.op = PauliOperator(spec.hamiltonian)
        self.n_evals = 0
        p = spec.pattern
        self._sim = None
        if spec.uses_circuit():
            self._sim = NodeWiseSimulator(p.meta["n"], p.meta["edges"], p.meta["layers"], spec.u3_layer)
        self._corr: CorrectionSets | None = None
        if spec.execution == "adaptive" or (spec.execution == "postselect" and spec.postselect_on is not None):
            flow = find_causal_flow(p.open_graph)
            if flow is None:
                raise ObjectiveError("adaptive execution needs a pattern with causal flow")
            self._corr = correction_sets(p.open_graph, flow)
        self._ident, self._settings = measurement_settings(spec.hamiltonian)

    @property
    def num_params(self) -> int:
        return self.spec.num_params

    def __call__(self, theta: Sequence[float]) -> float:
        return self.evaluate(theta).value

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.num_params:
            raise ObjectiveError(f"expected {self.num_params} parameters, got {theta.size}")
        return theta

    def batch(self, thetas: np.ndarray) -> np.ndarray:
        """Exact-mode energies for a stack of parameter vectors."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.num_params:
            raise ObjectiveError(f"expected {self.num_params} parameters, got {thetas.shape[1]}")
        if self._sim is not None and self.spec.eval_mode == "exact":
            self.n_evals += thetas.shape[0]
            vals = self.op.expectation(self._sim.states(thetas))
            return np.array([self.spec.noise.scale(v, self.op.identity) for v in vals])
        return np.array([self.evaluate(t).value for t in thetas])

    def evaluate(self, theta: Sequence[float]) -> Evaluation:
        theta = self._check(theta)
        spec = self.spec
        if self._sim is not None and spec.eval_mode == "exact":
            return Evaluation(float(self.batch(theta[None, :])[0]))
        self.n_evals += 1
        branches = self._branches(theta)
        accepted = [b for b in branches if b.accepted]
        acc = sum(b.probability for b in accepted)
        if not accepted or acc <= 0:
            raise ObjectiveError("postselection accepted no branches")
        if spec.eval_mode == "exact":
            total = 0.0
            for b in accepted:
                h = spec.hamiltonian if spec.u3_layer else spec.hamiltonian.conjugated_by(b.frame)
                val = PauliOperator(h).expectation(b.state.vector[None, :])[0]
                total += b.probability * val
            value = spec.noise.scale(total / acc, self._ident)
            return Evaluation(float(value), 0.0, float(acc))
        return self._sample(branches, acc)

    # -- branch construction -------------------------------------------------

    def _angles_and_u3(self, theta: np.ndarray):
        k = self.spec.pattern.num_params
        return theta[:k], theta[k:]

    def _finish(self, state: StateVector, frame: PauliString, u3: np.ndarray) -> tuple[StateVector, PauliString]:
        if not self.spec.u3_layer:
            return state, frame
        # the frame is undone inside the final local rotation
        out = state.copy().apply_pauli(frame, state.labels)
        for i, q in enumerate(out.labels):
            out.apply_1q(u3_gate(*u3[3 * i : 3 * i + 3]), q)
        return out, PauliString.identity(out.n)

    def _branches(self, theta: np.ndarray) -> list[_Branch]:
        spec = self.spec
        p = spec.pattern
        angles, u3 = self._angles_and_u3(theta)
        order = p.order
        if spec.execution == "forced":
            res = execute(p, list(angles), "forced", corrections=self._corr or CorrectionSets({}, {}))
            st, fr = self._finish(res.state, res.frame.pauli(p.outputs), u3)
            return [_Branch(1.0, st, fr, True)]
        targets = set(order if spec.postselect_on is None else spec.postselect_on)
        if spec.execution == "postselect" and spec.postselect_on is None:
            corr = CorrectionSets({}, {})
        else:
            corr = self._corr
        out = []
        if len(order) > MAX_BRANCH_QUBITS:
            raise ObjectiveError("too many measured qubits to enumerate branches")
        for bits in itertools.product((0, 1), repeat=len(order)):
            outcomes = dict(zip(order, bits))
            accepted = True
            if spec.execution == "postselect":
                accepted = all(outcomes[v] == 0 for v in targets)
                if not accepted and spec.eval_mode == "exact":
                    continue
            try:
                res = execute(p, list(angles), "forced", outcomes=outcomes, corrections=corr)
            except SimulationError:
                continue  # zero-probability branch
            st, fr = self._finish(res.state, res.frame.pauli(p.outputs), u3)
            out.append(_Branch(res.probability, st, fr, accepted))
        return out

    # -- sampling --------------------------------------------------------------

    def _sample(self, branches: list[_Branch], acc: float) -> Evaluation:
        """Per-setting shot sampling with an equal shot split across settings."""
        spec = self.spec
        n = self.spec.n_outputs
        per = spec.shots // max(len(self._settings), 1)
        if per == 0:
            raise ObjectiveError("shot budget smaller than the number of settings")
        probs = np.array([b.probability for b in branches])
        probs = probs / probs.sum()
        mean, var, used, kept_total = self._ident, 0.0, 0, 0
        for setting in self._settings:
            counts = self.rng.multinomial(per, probs)
            values, weights = [], []
            for b, c in zip(branches, counts):
                if c == 0 or not b.accepted:
                    continue
                dist = _basis_probs(b.state, setting.basis, spec.noise)
                hist = self.rng.multinomial(c, dist)
                vals = _setting_values(setting, n, b.frame)
                values.append(vals)
                weights.append(hist)
            kept = int(sum(w.sum() for w in weights))
            used += per
            kept_total += kept
            if kept == 0:
                raise ObjectiveError("postselection kept no shots")
            v = np.concatenate(values)
            w = np.concatenate(weights).astype(float)
            m = float(np.dot(w, v) / kept)
            s2 = float(np.dot(w, (v - m) ** 2) / max(kept - 1, 1))
            mean += m
            var += s2 / kept
        return Evaluation(mean, math.sqrt(var), kept_total / used, used)


# ---------------------------------------------------------------------------
# gradients


def gradient(obj: Objective, theta: Sequence[float], method: str = "fd", eps: float = 1e-6) -> np.ndarray:
    """Central finite differences (step ``eps``) or the two-term parameter-shift rule."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    k = theta.size
    if k == 0:
        return np.zeros(0)
    if method == "fd":
        step = eps
    elif method == "shift":
        step = math.pi / 2
    else:
        raise ObjectiveError(f"unknown gradient method {method!r}")
    shifts = np.concatenate([np.eye(k), -np.eye(k)]) * step
    vals = obj.batch(theta[None, :] + shifts)
    diff = vals[:k] - vals[k:]
    return diff / (2 * eps) if method == "fd" else diff / 2


def value_and_gradient(obj: Objective, theta: Sequence[float], method: str = "fd", eps: float = 1e-6):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    k = theta.size
    if k == 0:
        return float(obj.batch(theta[None, :])[0]), np.zeros(0)
    step = eps if method == "fd" else math.pi / 2
    if method not in ("fd", "shift"):
        raise ObjectiveError(f"unknown gradient method {method!r}")
    pts = np.concatenate([theta[None, :], theta + np.eye(k) * step, theta - np.eye(k) * step])
    vals = obj.batch(pts)
    diff = vals[1 : k + 1] - vals[k + 1 :]
    g = diff / (2 * eps) if method == "fd" else diff / 2
    return float(vals[0]), g


__all__ = [
    "EVAL_MODES",
    "EXECUTION_MODES",
    "Evaluation",
    "NodeWiseSimulator",
    "NoiseModel",
    "Objective",
    "ObjectiveError",
    "ObjectiveSpec",
    "PauliOperator",
    "PatternError",
    "Setting",
    "gradient",
    "measurement_settings",
    "value_and_gradient",
]
