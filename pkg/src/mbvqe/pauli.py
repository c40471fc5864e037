"""Pauli strings, Hermitian Pauli sums and the single-qubit Clifford group.

Phases are stored as an integer ``k`` meaning ``i**k``.  Strings are dense:
one letter per qubit, qubit 0 first.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

LETTERS = "IXYZ"

# (a, b) -> (k, c) with a*b = i**k * c
_PRODUCT: dict[tuple[str, str], tuple[int, str]] = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (0, _a)
    _PRODUCT[(_a, "I")] = (0, _a)
    _PRODUCT[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1, _c)
    _PRODUCT[(_b, _a)] = (3, _c)

_PHASE_LABEL = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_LABEL_PHASE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}

SINGLE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    """Raised on malformed Pauli objects or mismatched qubit counts."""


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Paulis, ``i**phase * P_0 ... P_{n-1}``."""

    letters: str
    phase: int = 0

    def __post_init__(self) -> None:
        if any(ch not in LETTERS for ch in self.letters):
            raise PauliError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @property
    def n(self) -> int:
        return len(self.letters)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse labels such as ``"+XZIY"``, ``"-iXX"`` or ``"ZZ"``."""
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in _LABEL_PHASE:
            raise PauliError(f"bad phase prefix in {label!r}")
        return cls(body, _LABEL_PHASE[prefix])

    @classmethod
    def from_sites(cls, n: int, sites: Mapping[int, str], phase: int = 0) -> PauliString:
        letters = ["I"] * n
        for q, p in sites.items():
            if not 0 <= q < n:
                raise PauliError(f"site {q} out of range for {n} qubits")
            letters[q] = p
        return cls("".join(letters), phase)

    @property
    def label(self) -> str:
        return _PHASE_LABEL[self.phase] + self.letters

    def __str__(self) -> str:
        return self.label

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, p in enumerate(self.letters) if p != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def sign(self) -> int:
        """Real sign of the string; raises for imaginary phases."""
        if self.phase % 2:
            raise PauliError(f"{self.label} has an imaginary phase")
        return 1 if self.phase == 0 else -1

    def unsigned(self) -> PauliString:
        return PauliString(self.letters)

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.letters, phase)

    def __neg__(self) -> PauliString:
        return PauliString(self.letters, self.phase + 2)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def x_bits(self) -> int:
        """Bit mask (qubit 0 is the most significant bit) of X/Y sites."""
        mask = 0
        for p in self.letters:
            mask = (mask << 1) | (p in "XY")
        return mask

    def z_bits(self) -> int:
        mask = 0
        for p in self.letters:
            mask = (mask << 1) | (p in "ZY")
        return mask

    def matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix, qubit 0 as the most significant factor."""
        out = np.array([[1j**self.phase]], dtype=complex)
        for p in self.letters:
            out = np.kron(out, SINGLE_MATRICES[p])
        return out


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise PauliError(f"qubit counts differ: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` with phase tracking."""
    _check_sizes(a, b)
    k = a.phase + b.phase
    out = []
    for pa, pb in zip(a.letters, b.letters):
        dk, c = _PRODUCT[(pa, pb)]
        k += dk
        out.append(c)
    return PauliString("".join(out), k)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff ``ab == ba``; counts the sites where the letters anticommute."""
    _check_sizes(a, b)
    clashes = sum(1 for pa, pb in zip(a.letters, b.letters) if pa != "I" and pb != "I" and pa != pb)
    return clashes % 2 == 0


def qubitwise_compatible(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return all(pa == "I" or pb == "I" or pa == pb for pa, pb in zip(a.letters, b.letters))


# ---------------------------------------------------------------------------
# single-qubit Clifford group


SignedLetter = tuple[int, str]


def _signed_product(a: SignedLetter, b: SignedLetter) -> tuple[int, str]:
    """Product of two signed letters as ``(phase power of i, letter)``."""
    dk, c = _PRODUCT[(a[1], b[1])]
    k = dk + (0 if a[0] > 0 else 2) + (0 if b[0] > 0 else 2)
    return k % 4, c


@dataclass(frozen=True)
class SingleQubitClifford:
    """A single-qubit Clifford modulo global phase, stored as its conjugation tableau.

    ``x_image`` and ``z_image`` are the signed Paulis ``C X C^dag`` and
    ``C Z C^dag``.
    """

    x_image: SignedLetter
    z_image: SignedLetter

    def __post_init__(self) -> None:
        for s, p in (self.x_image, self.z_image):
            if s not in (1, -1) or p not in "XYZ":
                raise PauliError(f"bad tableau entry {(s, p)}")
        if self.x_image[1] == self.z_image[1]:
            raise PauliError("X and Z images must anticommute")

    @property
    def y_image(self) -> SignedLetter:
        # Y = i X Z  =>  C Y C^dag = i C(X) C(Z)
        k, c = _signed_product(self.x_image, self.z_image)
        k = (k + 1) % 4
        if k % 2:
            raise PauliError("inconsistent tableau")
        return (1 if k == 0 else -1, c)

    def image(self, letter: str) -> SignedLetter:
        if letter == "I":
            return (1, "I")
        if letter == "X":
            return self.x_image
        if letter == "Z":
            return self.z_image
        if letter == "Y":
            return self.y_image
        raise PauliError(f"bad letter {letter!r}")

    def preimage(self, letter: str) -> SignedLetter:
        """Signed Pauli ``C^dag P C``."""
        return self.inverse().image(letter)

    def compose(self, other: SingleQubitClifford) -> SingleQubitClifford:
        """``self * other``: apply ``other`` first."""

        def chase(letter: str) -> SignedLetter:
            s, p = other.image(letter)
            s2, p2 = self.image(p)
            return (s * s2, p2)

        return SingleQubitClifford(chase("X"), chase("Z"))

    __matmul__ = compose

    def inverse(self) -> SingleQubitClifford:
        for c in CLIFFORD_GROUP:
            if c.compose(self) == IDENTITY:
                return c
        raise PauliError("no inverse found")  # unreachable for valid tableaux

    @property
    def is_diagonal(self) -> bool:
        """True for Z-axis rotations (the Clifford commutes with Z)."""
        return self.z_image == (1, "Z")

    @property
    def name(self) -> str:
        return _NAMES.get(self, self._tableau_label())

    def _tableau_label(self) -> str:
        sx = "+" if self.x_image[0] > 0 else "-"
        sz = "+" if self.z_image[0] > 0 else "-"
        return f"C[X->{sx}{self.x_image[1]},Z->{sz}{self.z_image[1]}]"

    def __repr__(self) -> str:
        return f"SingleQubitClifford({self.name})"

    def matrix(self) -> np.ndarray:
        """A unitary representative (global phase arbitrary)."""
        return _MATRICES[self].copy()


def conjugate(c: SingleQubitClifford, p: PauliString, site: int) -> PauliString:
    """Return ``c p c^dag`` with ``c`` acting on ``site``."""
    if not 0 <= site < p.n:
        raise PauliError(f"site {site} out of range for {p.n} qubits")
    s, q = c.image(p.letters[site])
    letters = p.letters[:site] + q + p.letters[site + 1 :]
    return PauliString(letters, p.phase + (0 if s > 0 else 2))


def _rotation(letter: str, sign: int) -> np.ndarray:
    """``exp(sign * i pi/4 P) = (I + sign*i P)/sqrt 2``, i.e. ``sqrt(sign * i P)``."""
    return (SINGLE_MATRICES["I"] + sign * 1j * SINGLE_MATRICES[letter]) / math.sqrt(2)


def _tableau_of(u: np.ndarray) -> SingleQubitClifford:
    images = []
    for letter in "XZ":
        m = u @ SINGLE_MATRICES[letter] @ u.conj().T
        for q in "XYZ":
            ov = np.trace(SINGLE_MATRICES[q] @ m).real / 2
            if abs(abs(ov) - 1) < 1e-9:
                images.append((1 if ov > 0 else -1, q))
                break
        else:
            raise PauliError("matrix is not Clifford")
    return SingleQubitClifford(images[0], images[1])


_NAMED_MATRICES = {
    "I": SINGLE_MATRICES["I"],
    "X": SINGLE_MATRICES["X"],
    "Y": SINGLE_MATRICES["Y"],
    "Z": SINGLE_MATRICES["Z"],
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "sqrt(iZ)": _rotation("Z", 1),
    "sqrt(-iZ)": _rotation("Z", -1),
    "sqrt(iY)": _rotation("Y", 1),
    "sqrt(-iY)": _rotation("Y", -1),
    "sqrt(iX)": _rotation("X", 1),
    "sqrt(-iX)": _rotation("X", -1),
}

_MATRICES: dict[SingleQubitClifford, np.ndarray] = {}
_NAMES: dict[SingleQubitClifford, str] = {}
for _name, _u in _NAMED_MATRICES.items():
    _c = _tableau_of(_u)
    _MATRICES[_c] = _u
    _NAMES[_c] = _name

# close the group by breadth-first products of the named generators
_frontier = list(_MATRICES.items())
while _frontier:
    _next = []
    for _c, _u in _frontier:
        for _g in ("H", "sqrt(iZ)"):
            _v = _NAMED_MATRICES[_g] @ _u
            _d = _tableau_of(_v)
            if _d not in _MATRICES:
                _MATRICES[_d] = _v
                _next.append((_d, _v))
    _frontier = _next

CLIFFORD_GROUP: tuple[SingleQubitClifford, ...] = tuple(_MATRICES)
assert len(CLIFFORD_GROUP) == 24


def clifford(name: str) -> SingleQubitClifford:
    """Look up a named Clifford, e.g. ``"H"``, ``"sqrt(-iZ)"``."""
    for c, nm in _NAMES.items():
        if nm == name:
            return c
    raise PauliError(f"unknown Clifford {name!r}")


IDENTITY = clifford("I")
HADAMARD = clifford("H")
PAULI_Z = clifford("Z")
SQRT_IZ = clifford("sqrt(iZ)")
SQRT_MIZ = clifford("sqrt(-iZ)")
SQRT_IY = clifford("sqrt(iY)")
SQRT_MIY = clifford("sqrt(-iY)")
SQRT_IX = clifford("sqrt(iX)")
SQRT_MIX = clifford("sqrt(-iX)")

NAMED_SUBSET = (IDENTITY, PAULI_Z, SQRT_IZ, SQRT_MIZ, SQRT_IY, SQRT_MIY, HADAMARD)


# ---------------------------------------------------------------------------
# Hermitian sums


class PauliSum:
    """A real linear combination of unsigned Pauli strings (a Hermitian operator).

    Complex coefficients and string phases are folded on construction; any
    residual imaginary part above ``1e-12`` is rejected.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms: Iterable[tuple[complex, PauliString]], n: int | None = None):
        folded: list[tuple[float, PauliString]] = []
        for coef, p in terms:
            c = complex(coef) * 1j**p.phase
            if abs(c.imag) > 1e-12:
                raise PauliError(f"non-Hermitian term {coef} * {p.label}")
            if not math.isfinite(c.real):
                raise PauliError(f"non-finite coefficient on {p.label}")
            folded.append((c.real, p.unsigned()))
        sizes = {p.n for _, p in folded}
        if n is None:
            if len(sizes) != 1:
                raise PauliError(f"cannot infer qubit count from sizes {sizes}")
            n = sizes.pop()
        elif sizes - {n}:
            raise PauliError(f"term sizes {sizes} do not match n={n}")
        self._n = n
        self._terms = tuple(folded)

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> tuple[tuple[float, PauliString], ...]:
        return self._terms

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]], n: int | None = None) -> PauliSum:
        return cls(((c, PauliString.from_label(s)) for c, s in pairs), n)

    def simplify(self, atol: float = 0.0) -> PauliSum:
        """Merge duplicate strings; drop terms with ``|coef| <= atol``."""
        acc: dict[str, float] = {}
        for c, p in self._terms:
            acc[p.letters] = acc.get(p.letters, 0.0) + c
        return PauliSum(((c, PauliString(s)) for s, c in acc.items() if abs(c) > atol), self._n)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n != self.n:
            raise PauliError("qubit counts differ")
        return PauliSum(self._terms + other._terms, self._n)

    def __mul__(self, scalar: float) -> PauliSum:
        return PauliSum(((scalar * c, p) for c, p in self._terms), self._n)

    __rmul__ = __mul__

    def __neg__(self) -> PauliSum:
        return self * -1.0

    def conjugated_by(self, p: PauliString) -> PauliSum:
        """``p H p^dag`` for a Pauli ``p``: pure sign flips on anticommuting terms."""
        return PauliSum(((c if commutes(p, q) else -c, q) for c, q in self._terms), self._n)

    def to_matrix(self) -> np.ndarray:
        dim = 2**self._n
        out = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for c, p in self._terms:
            x, z = p.x_bits(), p.z_bits()
            signs = 1 - 2 * (_popcount(idx & z) & 1)
            ny = p.letters.count("Y")
            # P|k> = i^ny (-1)^{k.z} |k ^ x>
            out[idx ^ x, idx] += c * (1j**ny) * signs
        return out

    def is_close(self, other: PauliSum, atol: float = 1e-12) -> bool:
        a = dict((p.letters, c) for c, p in self.simplify().terms)
        b = dict((p.letters, c) for c, p in other.simplify().terms)
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= atol for k in keys)

    def to_json(self) -> list[dict]:
        return [{"coef": c, "pauli": p.letters} for c, p in self._terms]

    @classmethod
    def from_json(cls, data: Sequence[Mapping], n: int | None = None) -> PauliSum:
        return cls(((d["coef"], PauliString(d["pauli"])) for d in data), n)

    def __str__(self) -> str:
        return "\n".join(f"{c:+.12g} {p.letters}" for c, p in self._terms)

    def __repr__(self) -> str:
        return f"PauliSum(n={self._n}, terms={len(self._terms)})"


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    out = np.zeros_like(a)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


# ---------------------------------------------------------------------------
# measurement grouping


def group_two_settings(
    stabilizers: Sequence[PauliString], coloring: Mapping[int, int]
) -> tuple[list[str], list[str], list[list[int]]]:
    """Split graph-type stabilizers of a bipartite graph into two local settings.

    Each stabilizer has its non-Z letters (X or Y) on colour class ``c`` and Z
    letters on the other class; it is assigned to setting ``c``.  Returns the
    two per-qubit measurement settings and the stabilizer indices of each.
    Qubits a setting does not constrain are set to measure Z on the opposite
    class and X on the own class.
    """
    if not stabilizers:
        return [], [], [[], []]
    n = stabilizers[0].n
    for q in range(n):
        if q not in coloring:
            raise PauliError(f"qubit {q} missing from coloring")
    groups: list[list[int]] = [[], []]
    settings: list[list[str | None]] = [[None] * n, [None] * n]
    for i, s in enumerate(stabilizers):
        heads = {coloring[q] for q, p in enumerate(s.letters) if p in "XY"}
        if len(heads) != 1:
            raise PauliError(f"stabilizer {s.label} fits neither setting")
        c = heads.pop()
        for q, p in enumerate(s.letters):
            if p == "I":
                continue
            if (p == "Z") == (coloring[q] == c):
                # Z on own class, or X/Y on the other class
                raise PauliError(f"stabilizer {s.label} fits neither setting")
            cur = settings[c][q]
            if cur is not None and cur != p:
                raise PauliError(f"stabilizer {s.label} conflicts at qubit {q}")
            settings[c][q] = p
        groups[c].append(i)
    out = []
    for c in (0, 1):
        out.append([p if p is not None else ("X" if coloring[q] == c else "Z") for q, p in enumerate(settings[c])])
    if not groups[1]:
        out[1] = []
    if not groups[0]:
        out[0], out[1] = out[1], []
        groups = [groups[1], []]
    return out[0], out[1], groups


def qubitwise_groups(strings: Sequence[PauliString]) -> list[list[int]]:
    """Greedy partition of strings into qubit-wise commuting groups."""
    groups: list[list[int]] = []
    for i, s in enumerate(strings):
        for g in groups:
            if all(qubitwise_compatible(s, strings[j]) for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def all_strings(n: int) -> Iterator[PauliString]:
    for letters in itertools.product(LETTERS, repeat=n):
        yield PauliString("".join(letters))
