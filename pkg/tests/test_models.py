from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest

from mbvqe.models import (
    ModelError,
    SchwingerParams,
    XYParams,
    build_model,
    hamiltonian_json,
    schwinger,
    tree_components_analytic,
    tree_expectation_analytic,
    xy_chain,
    xy_periodic4,
)
from mbvqe.pauli import PauliString, PauliSum
from mbvqe.statevector import ground_state_energy

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
SP = (X + 1j * Y) / 2
SM = (X - 1j * Y) / 2


def _op(n, sites):
    """Dense product of single-site matrices at 1-based ``sites``."""
    mats = [I2] * n
    for s, m in sites.items():
        mats[s - 1] = m @ mats[s - 1] if mats[s - 1] is not I2 else m
    return reduce(np.kron, mats)


def schwinger_dense(S, J, w, mu):
    """Brute-force expansion with sigma^+- written out."""
    h = np.zeros((2**S, 2**S), dtype=complex)
    for n in range(1, S - 1):
        for k in range(n + 1, S):
            h += J / 2 * (S - k) * _op(S, {n: Z}) @ _op(S, {k: Z})
    for n in range(1, S):
        hop = _op(S, {n: SP}) @ _op(S, {n + 1: SM})
        h += w * (hop + hop.conj().T)
    for n in range(1, S + 1):
        h += mu / 2 * (-1) ** n * _op(S, {n: Z})
    for n in range(1, S):
        for k in range(1, n + 1):
            h -= J / 2 * (n % 2) * _op(S, {k: Z})
    return h


def xy_dense(n, g, d, sites):
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n):
        h += (1 + g) / 2 * _op(n, {i: X, i + 1: X}) + (1 - g) / 2 * _op(n, {i: Y, i + 1: Y})
    for i in sites:
        h += d * _op(n, {i: Z})
    return h


@pytest.mark.parametrize("S", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("mu", [4.0, -0.7])
def test_schwinger_matches_brute_force(S, mu):
    h = schwinger(SchwingerParams(S, 1.0, 1.0, mu))
    assert np.allclose(h.to_matrix(), schwinger_dense(S, 1.0, 1.0, mu), atol=1e-12)


def test_schwinger_general_couplings():
    h = schwinger(SchwingerParams(5, 0.7, 1.3, 0.2))
    assert np.allclose(h.to_matrix(), schwinger_dense(5, 0.7, 1.3, 0.2), atol=1e-12)


def test_schwinger_term_examples():
    h = schwinger(SchwingerParams(2, J=0.0, w=1.0, mu=0.0))
    assert h.is_close(PauliSum.from_labels([(0.5, "XX"), (0.5, "YY")]))
    mass = schwinger(SchwingerParams(3, J=0.0, w=0.0, mu=2.0))
    coef = dict((p.letters, c) for c, p in mass.terms)
    assert coef["ZII"] == pytest.approx(-1.0)  # -mu/2 on Z_1
    assert coef["IZI"] == pytest.approx(1.0)


def test_schwinger_reference_energies():
    assert ground_state_energy(schwinger(SchwingerParams(4, mu=4.0)))[0] == pytest.approx(-10.3243, abs=1e-4)
    assert ground_state_energy(schwinger(SchwingerParams(4, mu=-0.7)))[0] == pytest.approx(-3.2053, abs=1e-4)


@pytest.mark.parametrize("n", [2, 4, 6])
@pytest.mark.parametrize("g", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("mode", ["first-two", "all"])
def test_xy_matches_brute_force(n, g, mode):
    sites = range(1, 3) if mode == "first-two" else range(1, n + 1)
    h = xy_chain(XYParams(n, g, 0.01, mode))
    assert np.allclose(h.to_matrix(), xy_dense(n, g, 0.01, sites), atol=1e-12)


def test_xy_examples():
    assert xy_chain(XYParams(2, 1.0, 0.0)).is_close(PauliSum.from_labels([(1.0, "XX")]))
    h = xy_chain(XYParams(4, 0.0, 0.01))
    want = PauliSum.from_labels(
        [(0.5, "XXII"), (0.5, "YYII"), (0.5, "IXXI"), (0.5, "IYYI"), (0.5, "IIXX"), (0.5, "IIYY"), (0.01, "ZIII"), (0.01, "IZII")]
    )
    assert h.is_close(want)
    # g=1, d=0 is a classical Ising chain in the X basis: ground energy -(n-1)
    assert ground_state_energy(xy_chain(XYParams(4, 1.0, 0.0)))[0] == pytest.approx(-3.0)


def test_periodic4():
    h, hx, hy = xy_periodic4(1.0)
    assert h.is_close(-1.0 * hx)
    assert ground_state_energy(h)[0] == pytest.approx(-4.0)
    h0, _, _ = xy_periodic4(0.0)
    assert h0.is_close((hx * -1.0 + hy) * 0.5)
    # conjugation by Y2 Y4 flips H_X and keeps H_Y
    y24 = PauliString("IYIY")
    assert hx.conjugated_by(y24).is_close(-1.0 * hx)
    assert hy.conjugated_by(y24).is_close(hy)


def test_tree_analytic_examples_and_symmetry():
    for g in (0.0, 0.5, 1.0):
        assert tree_expectation_analytic(0.0, 0.3, 1.2, g) == pytest.approx(-2 * (1 + g))
    assert tree_expectation_analytic(math.pi / 2, math.pi / 2, math.pi / 2, 0.0) == pytest.approx(-2.0)
    rng = np.random.default_rng(0)
    for a, b, c, g in rng.uniform(-4, 4, size=(20, 4)):
        v = tree_expectation_analytic(a, b, c, g)
        assert tree_expectation_analytic(a, c, b, g) == pytest.approx(v)
        assert tree_expectation_analytic(a + 2 * math.pi, b, c - 2 * math.pi, g) == pytest.approx(v)
        hx, hy = tree_components_analytic(a, b, c)
        assert -(1 + g) / 2 * hx + (1 - g) / 2 * hy == pytest.approx(v)


def test_tree_pattern_reproduces_analytic_expectation():
    from mbvqe.pattern import execute, tree_pattern
    from mbvqe.statevector import expectation

    p = tree_pattern()
    for g in (0.0, 1.0):
        h = xy_periodic4(g)[0]
        for t1 in np.linspace(0, math.pi, 5):
            st = execute(p, [t1, 0.4, 1.9]).corrected_state()
            assert expectation(st, h, list(p.outputs)) == pytest.approx(tree_expectation_analytic(t1, 0.4, 1.9, g), abs=1e-12)


def test_validation_and_builders():
    with pytest.raises(ModelError):
        SchwingerParams(1)
    with pytest.raises(ModelError):
        SchwingerParams(3, J=math.nan)
    with pytest.raises(ModelError):
        XYParams(1)
    with pytest.raises(ModelError):
        XYParams(3, perturb_sites="some")
    with pytest.raises(ModelError):
        build_model("ising", 3)
    assert build_model("schwinger", 4, mu=-0.7).is_close(schwinger(SchwingerParams(4, mu=-0.7)))
    assert '"params"' in hamiltonian_json(xy_chain(XYParams(3)), XYParams(3))
