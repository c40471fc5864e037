"""Model Hamiltonians and the analytic tree-ansatz expectation.

Formulas use 1-based sites; Pauli positions are 0-based (site ``i`` lives at
position ``i - 1``).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .pauli import PauliString, PauliSum


class ModelError(ValueError):
    """Raised for invalid model parameters."""


@dataclass(frozen=True)
class SchwingerParams:
    S: int
    J: float = 1.0
    w: float = 1.0
    mu: float = 4.0

    def __post_init__(self) -> None:
        if self.S < 2:
            raise ModelError("Schwinger model needs S >= 2 sites")
        if not all(math.isfinite(x) for x in (self.J, self.w, self.mu)):
            raise ModelError("couplings must be finite")


PERTURB_MODES = ("first-two", "all")


@dataclass(frozen=True)
class XYParams:
    n: int
    g: float = 1.0
    d: float = 0.01
    perturb_sites: str = "first-two"

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ModelError("XY chain needs n >= 2 sites")
        if self.perturb_sites not in PERTURB_MODES:
            raise ModelError(f"perturb_sites must be one of {PERTURB_MODES}")


def _z(n: int, *sites: int) -> PauliString:
    """Product of Z on 1-based ``sites`` (repeated sites cancel)."""
    letters = ["I"] * n
    for s in sites:
        letters[s - 1] = "I" if letters[s - 1] == "Z" else "Z"
    return PauliString("".join(letters))


def _pair(n: int, letter: str, a: int, b: int) -> PauliString:
    return PauliString.from_sites(n, {a - 1: letter, b - 1: letter})


def schwinger(p: SchwingerParams) -> PauliSum:
    """Jordan-Wigner Schwinger Hamiltonian with long-range Z couplings.

    ``(J/2) sum_{n<k<S} (S-k) Z_n Z_k + (w/2) sum_n (X_n X_{n+1} + Y_n Y_{n+1})
    + (mu/2) sum_n (-1)^n Z_n - (J/2) sum_{n<S} (n mod 2) sum_{k<=n} Z_k``.
    """
    S, J, w, mu = p.S, p.J, p.w, p.mu
    terms: list[tuple[float, PauliString]] = []
    for n in range(1, S - 1):
        for k in range(n + 1, S):
            terms.append((J / 2 * (S - k), _z(S, n, k)))
    for n in range(1, S):
        terms.append((w / 2, _pair(S, "X", n, n + 1)))
        terms.append((w / 2, _pair(S, "Y", n, n + 1)))
    for n in range(1, S + 1):
        terms.append((mu / 2 * (-1) ** n, _z(S, n)))
    for n in range(1, S):
        if n % 2:
            for k in range(1, n + 1):
                terms.append((-J / 2, _z(S, k)))
    return PauliSum(terms, S).simplify()


def xy_chain(p: XYParams) -> PauliSum:
    """Open XY chain with anisotropy ``g`` and a ``d Z`` field on the first two (or all) sites."""
    n = p.n
    terms: list[tuple[float, PauliString]] = []
    for i in range(1, n):
        terms.append(((1 + p.g) / 2, _pair(n, "X", i, i + 1)))
        terms.append(((1 - p.g) / 2, _pair(n, "Y", i, i + 1)))
    sites = range(1, 3) if p.perturb_sites == "first-two" else range(1, n + 1)
    for i in sites:
        terms.append((p.d, _z(n, i)))
    return PauliSum(terms, n).simplify()


def _ring(letter: str, n: int = 4) -> PauliSum:
    return PauliSum([(1.0, _pair(n, letter, i, i % n + 1)) for i in range(1, n + 1)], n)


def xy_periodic4(g: float) -> tuple[PauliSum, PauliSum, PauliSum]:
    """Periodic 4-site XY Hamiltonian ``-(1+g)/2 H_X + (1-g)/2 H_Y``; returns ``(H, H_X, H_Y)``."""
    hx, hy = _ring("X"), _ring("Y")
    h = (hx * (-(1 + g) / 2) + hy * ((1 - g) / 2)).simplify()
    return h, hx, hy


def tree_expectation_analytic(theta1: float, theta2: float, theta3: float, g: float) -> float:
    return -(1 + g) * (1 + math.cos(theta1)) - (1 - g) / 2 * math.sin(theta1) * (math.sin(theta2) + math.sin(theta3))


def tree_components_analytic(theta1: float, theta2: float, theta3: float) -> tuple[float, float]:
    """``(<H_X>, <H_Y>)`` on the tree ansatz."""
    return 2 * (1 + math.cos(theta1)), -math.sin(theta1) * (math.sin(theta2) + math.sin(theta3))


def hamiltonian_json(h: PauliSum, params: SchwingerParams | XYParams | None = None) -> str:
    data: dict = {"num_qubits": h.n, "terms": h.to_json()}
    if params is not None:
        data["model"] = type(params).__name__
        data["params"] = asdict(params)
    return json.dumps(data, indent=2)


def build_model(name: str, n: int, **kw) -> PauliSum:
    """``"schwinger"`` or ``"xy"`` by name, for config-driven callers."""
    if name == "schwinger":
        return schwinger(SchwingerParams(n, **kw))
    if name == "xy":
        return xy_chain(XYParams(n, **kw))
    raise ModelError(f"unknown model {name!r}")
