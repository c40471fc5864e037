from __future__ import annotations

import math

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import minimize

from mbvqe.models import SchwingerParams, XYParams, schwinger, tree_expectation_analytic, xy_chain, xy_periodic4
from mbvqe.pattern import bind, equivalent_circuit, execute, node_wise_decoration, simulate_circuit, tree_pattern
from mbvqe.statevector import expectation, make_rng, u3_gate
from mbvqe.vqe import (
    CDRError,
    NoiseModel,
    Objective,
    ObjectiveError,
    ObjectiveSpec,
    OptimizerConfig,
    cdr_apply,
    cdr_fit,
    fit_mse,
    gradient,
    lbfgs,
    measurement_settings,
    optimize,
    relative_error,
    scan_experiment,
    tree_xy_experiment,
)
from mbvqe.vqe.optimizer import OptimizerError


def _direct_energy(p, h, theta, u3):
    """Reference: pattern execution with adaptive corrections, then explicit U3s."""
    k = p.num_params
    res = execute(p, list(theta[:k]), "adaptive", rng=make_rng(0))
    st = res.corrected_state()
    if u3:
        for i, q in enumerate(st.labels):
            st.apply_1q(u3_gate(*theta[k + 3 * i : k + 3 * i + 3]), q)
    return expectation(st, h)


@pytest.mark.parametrize("u3", [False, True])
@pytest.mark.parametrize("backend", ["circuit", "pattern"])
def test_objective_backends_agree_with_direct_execution(u3, backend):
    p = node_wise_decoration(nx.path_graph(3), 2)
    h = schwinger(SchwingerParams(3, mu=-0.7))
    obj = Objective(ObjectiveSpec(p, h, u3_layer=u3, backend=backend, execution="adaptive"))
    rng = np.random.default_rng(1)
    for _ in range(5):
        th = rng.uniform(0, 2 * math.pi, obj.num_params)
        assert obj(th) == pytest.approx(_direct_energy(p, h, th, u3), abs=1e-10)


def test_objective_batch_matches_single_calls():
    p = node_wise_decoration(nx.path_graph(4), 1)
    obj = Objective(ObjectiveSpec(p, xy_chain(XYParams(4)), u3_layer=True))
    th = np.random.default_rng(2).uniform(0, 6, (7, obj.num_params))
    assert np.allclose(obj.batch(th), [obj(t) for t in th])


def test_objective_validation():
    p = node_wise_decoration(nx.path_graph(3), 1)
    with pytest.raises(ObjectiveError):
        ObjectiveSpec(p, xy_chain(XYParams(4)))
    with pytest.raises(ObjectiveError):
        ObjectiveSpec(p, xy_chain(XYParams(3)), eval_mode="shots", shots=0)
    with pytest.raises(ObjectiveError):
        ObjectiveSpec(tree_pattern(), xy_periodic4(1.0)[0], backend="circuit")
    obj = Objective(ObjectiveSpec(p, xy_chain(XYParams(3))))
    with pytest.raises(ObjectiveError):
        obj([0.0])
    with pytest.raises(ObjectiveError):
        NoiseModel(1.0)


def test_parameter_shift_matches_finite_difference():
    p = node_wise_decoration(nx.path_graph(4), 2)
    obj = Objective(ObjectiveSpec(p, xy_chain(XYParams(4, g=0.3)), u3_layer=True))
    rng = np.random.default_rng(3)
    for _ in range(10):
        th = rng.uniform(0, 2 * math.pi, obj.num_params)
        assert np.max(np.abs(gradient(obj, th, "shift") - gradient(obj, th, "fd"))) < 1e-6


def test_tree_gradient_at_quarter_turn():
    obj = Objective(ObjectiveSpec(tree_pattern(), xy_periodic4(1.0)[0], execution="adaptive"))
    g = gradient(obj, [math.pi / 2, math.pi / 2, math.pi / 2], "shift")
    assert g[0] == pytest.approx(2.0, abs=1e-6)


def test_measurement_settings_cover_hamiltonian():
    h = schwinger(SchwingerParams(4))
    ident, settings = measurement_settings(h)
    covered = [p.letters for s in settings for _, p in s.terms]
    assert sorted(covered) == sorted(p.letters for _, p in h if p.weight)
    assert ident == pytest.approx(sum(c for c, p in h if p.weight == 0))
    for s in settings:
        for _, p in s.terms:
            assert all(a in ("I", b) for a, b in zip(p.letters, s.basis))
    assert len(settings) == 3  # Z-diagonal, XX and YY hopping groups


def test_shots_estimate_is_unbiased():
    p = tree_pattern()
    _, hx, _ = xy_periodic4(1.0)
    th = [0.8, 1.0, 2.0]
    exact = Objective(ObjectiveSpec(p, hx, execution="adaptive"))(th)
    est = Objective(ObjectiveSpec(p, hx, eval_mode="shots", shots=200_000, execution="adaptive"), make_rng(4)).evaluate(th)
    assert abs(est.value - exact) < 4 * est.stderr
    assert est.stderr < 0.01


def test_noise_scales_traceless_part():
    p = tree_pattern()
    _, hx, _ = xy_periodic4(1.0)
    th = [0.8, 1.0, 2.0]
    clean = Objective(ObjectiveSpec(p, hx, execution="adaptive"))(th)
    noisy = Objective(ObjectiveSpec(p, hx, execution="adaptive", noise=NoiseModel(0.3)))(th)
    assert noisy == pytest.approx(0.7 * clean)


# -- optimizer ---------------------------------------------------------------


def _rosen(x):
    f = sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2)
    g = np.zeros_like(x)
    g[:-1] = -400 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2 * (1 - x[:-1])
    g[1:] += 200 * (x[1:] - x[:-1] ** 2)
    return float(f), g


def test_lbfgs_on_rosenbrock():
    res = lbfgs(_rosen, np.array([-1.2, 1.0, 0.5, -0.3]))
    assert res.converged
    assert np.allclose(res.x, 1.0, atol=1e-6)


def test_lbfgs_bounds_are_respected():
    res = lbfgs(lambda x: (float((x[0] - 3) ** 2), np.array([2 * (x[0] - 3)])), np.array([0.0]), bounds=(-1.0, 1.0))
    assert res.x[0] == pytest.approx(1.0)


def test_optimizer_matches_scipy_lbfgsb():
    p = node_wise_decoration(nx.path_graph(3), 1)
    h = schwinger(SchwingerParams(3, mu=-0.7))
    obj = Objective(ObjectiveSpec(p, h, u3_layer=True))
    ours = optimize(obj, OptimizerConfig(gradient="shift", restarts=4), seed=11)
    best = math.inf
    for r in ours.restarts:
        x0 = np.random.default_rng(r.seed).uniform(0, 2 * math.pi, obj.num_params)
        sp = minimize(lambda x: obj(x), x0, jac=lambda x: gradient(obj, x, "shift"), method="L-BFGS-B", options={"gtol": 1e-10, "ftol": 1e-15})
        best = min(best, sp.fun)
    assert ours.best_energy <= best + 1e-6 * abs(best)
    assert ours.best_energy >= ours.exact_energy - 1e-9


def test_optimize_reproducible_and_seeded():
    p = node_wise_decoration(nx.path_graph(2), 1)
    obj = Objective(ObjectiveSpec(p, xy_chain(XYParams(2))))
    a = optimize(obj, OptimizerConfig(restarts=3), seed=5)
    b = optimize(obj, OptimizerConfig(restarts=3), seed=5)
    c = optimize(obj, OptimizerConfig(restarts=3), seed=6)
    assert [r.seed for r in a.restarts] == [r.seed for r in b.restarts] != [r.seed for r in c.restarts]
    assert np.array_equal(a.energies, b.energies)
    s = a.summary()
    assert s["restarts"] == 3 and s["failed"] == 0


def test_tree_one_parameter_optimum():
    h = xy_periodic4(1.0)[0]
    obj = Objective(ObjectiveSpec(tree_pattern(), h, execution="adaptive"))
    res = lbfgs(lambda x: (obj([x[0], 0.0, 0.0]), gradient(obj, [x[0], 0.0, 0.0], "shift")[:1]), np.array([1.0]))
    assert res.fun == pytest.approx(-4.0, abs=1e-6)
    assert abs(math.remainder(res.x[0], 2 * math.pi)) < 1e-3


def test_optimizer_config_validation():
    with pytest.raises(OptimizerError):
        OptimizerConfig(gradient="adam")
    with pytest.raises(OptimizerError):
        OptimizerConfig(restarts=0)
    with pytest.raises(OptimizerError):
        OptimizerConfig(bounds=(1.0, 0.0))


def test_relative_error():
    assert relative_error(-0.9, -1.0) == pytest.approx(0.1)
    assert relative_error(0.25, 0.0) == 0.25


# -- CDR ---------------------------------------------------------------------


def test_cdr_recovers_linear_map():
    pts = [(x, 2.5 * x - 0.3) for x in (-1.0, 0.2, 0.9)]
    m = cdr_fit(pts)
    assert (m.a0, m.a1) == (pytest.approx(2.5), pytest.approx(-0.3))
    assert m.mse < 1e-20
    assert np.allclose(cdr_apply(m, np.array([0.0, 1.0])), [-0.3, 2.2])
    assert fit_mse(m, [(1.0, 2.2)]) < 1e-20
    with pytest.raises(CDRError):
        cdr_fit([(1.0, 1.0)])
    with pytest.raises(CDRError):
        cdr_fit([(1.0, 1.0), (1.0, 2.0)])


def test_tree_experiment_exact_noiseless_matches_analytic():
    rep = tree_xy_experiment(g=0.5, eval_mode="exact", n_points=7)
    for r in rep.rows:
        assert r["hxy_raw"] == pytest.approx(tree_expectation_analytic(r["theta1"], math.pi / 2, math.pi / 2, 0.5), abs=1e-12)
    assert len(rep.to_csv().splitlines()) == 1 + 2 * 7


# -- scans -------------------------------------------------------------------


def test_scan_experiment_rows_and_reproducibility():
    kw = dict(model="xy", qubits=[2, 3], layers=[1], runs=2, u3=[True, False], model_params={"g": 0.0})
    a = scan_experiment(**kw, seed=1)
    b = scan_experiment(**kw, seed=1, threads=2)
    assert len(a.rows) == 2 * 2 * 2
    assert [r["energy"] for r in a.rows] == [r["energy"] for r in b.rows]
    head = a.to_csv().splitlines()[0]
    assert head == "model,n,layers,u3,run,seed,energy,exact_energy,rel_error"
    cell = a.cell("xy(g=0.0)", 3, 1, True)
    assert cell["median_rel_error"] >= 0 and cell["error"] is None


def test_equivalent_circuit_used_by_objective():
    p = node_wise_decoration(nx.cycle_graph(3), 2)
    h = xy_chain(XYParams(3))
    th = np.random.default_rng(8).uniform(0, 6, p.num_params)
    ref = expectation(simulate_circuit(bind(equivalent_circuit(p), th), p.outputs), h)
    assert Objective(ObjectiveSpec(p, h))(th) == pytest.approx(ref, abs=1e-12)
