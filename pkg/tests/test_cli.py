from __future__ import annotations

import csv
import json

import networkx as nx
import pytest

from mbvqe.cli import ConfigError, main, resolve_config
from mbvqe.pattern import edge_wise_decoration


def _run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path / "out")]
    if config is not None:
        tmp_path.mkdir(parents=True, exist_ok=True)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return main(argv)


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    return meta, list(csv.DictReader(lines[1:]))


def test_unknown_keys_rejected(tmp_path, capsys):
    assert _run(tmp_path, "vqe-scan", config={"qubits": [4], "bogus": 1}) == 2
    assert "bogus" in capsys.readouterr().err
    assert _run(tmp_path, "vqe-scan", config={"model": "xy", "model_params": {"mu": 4}}) == 2
    assert _run(tmp_path, "tree-xy", config={"noise": 1.5}) == 2
    assert not (tmp_path / "out").exists()


def test_resolve_config_defaults_and_seed_override():
    cfg = resolve_config("tree-xy", {"g": 0.5}, seed=9)
    assert cfg["g"] == 0.5 and cfg["seed"] == 9 and cfg["shots"] == 100_000
    assert resolve_config("cdr-demo", {})["noise"] == 0.3
    with pytest.raises(ConfigError):
        resolve_config("hexcluster", {"rows": 0})


def test_vqe_scan_outputs(tmp_path):
    cfg = {"model": "xy", "model_params": {"g": 1.0}, "qubits": [2], "layers": [1], "runs": 2}
    assert _run(tmp_path, "vqe-scan", "--seed", "4", "--plot", config=cfg) == 0
    out = tmp_path / "out"
    meta, rows = _read_csv(out / "scan.csv")
    assert meta["seed"] == 4 and meta["config"]["qubits"] == [2]
    assert list(rows[0]) == ["model", "n", "layers", "u3", "run", "seed", "energy", "exact_energy", "rel_error"]
    assert len(rows) == 2
    summary = json.loads((out / "summary.json").read_text())
    assert summary["meta"]["config"]["runs"] == 2
    assert "schwinger_long_range_bound" in summary["decisions"]
    assert (out / "scan.png").stat().st_size > 0
    assert not list(out.glob("*.partial*"))


def test_vqe_scan_is_reproducible(tmp_path):
    cfg = {"qubits": [2], "layers": [1], "runs": 2}
    assert _run(tmp_path / "a", "vqe-scan", config=cfg) == 0
    assert _run(tmp_path / "b", "vqe-scan", config=cfg) == 0
    a = _read_csv(tmp_path / "a" / "out" / "scan.csv")[1]
    b = _read_csv(tmp_path / "b" / "out" / "scan.csv")[1]
    assert a == b


def test_flow_check_builtin_and_file(tmp_path):
    assert _run(tmp_path, "flow-check", config={"builtin": {"kind": "tree"}}) == 0
    rep = json.loads((tmp_path / "out" / "flow.json").read_text())
    assert rep["flow"]["found"] and rep["determinism"]["deterministic"]

    pat = tmp_path / "ew.json"
    pat.write_text(edge_wise_decoration(nx.path_graph(3)).dumps())
    assert main(["flow-check", str(pat), "--out", str(tmp_path / "ew")]) == 0
    rep = json.loads((tmp_path / "ew" / "flow.json").read_text())
    assert not rep["flow"]["found"] and rep["flow"]["exhaustive_search"] == "none"
    assert not rep["determinism"]["deterministic"]


def test_flow_check_bad_inputs(tmp_path):
    assert _run(tmp_path, "flow-check", config={"pattern_file": str(tmp_path / "missing.json")}) == 2
    assert _run(tmp_path, "flow-check", config={"builtin": {"kind": "tree"}, "angles": [0.1]}) == 2


def test_tree_xy_and_cdr_demo(tmp_path):
    cfg = {"shots": 2000, "n_points": 4}
    assert _run(tmp_path, "tree-xy", "--plot", config=cfg) == 0
    meta, rows = _read_csv(tmp_path / "out" / "tree.csv")
    assert len(rows) == 8 and {r["mode"] for r in rows} == {"adaptive", "postselect"}
    assert (tmp_path / "out" / "tree.png").exists()

    assert _run(tmp_path / "c", "cdr-demo", config={"n_points": 5}) == 0
    data = json.loads((tmp_path / "c" / "out" / "cdr.json").read_text())
    fit = data["fits"]["adaptive"]["hx"]
    assert fit["a0"] == pytest.approx(1 / 0.7, abs=1e-8) and fit["a1"] == pytest.approx(0.0, abs=1e-8)


def test_hexcluster(tmp_path):
    cfg = {"lattice": "honeycomb", "rows": 2, "cols": 2, "samples": 20, "depth_scan": [[2, 3], [3, 4]]}
    assert _run(tmp_path, "hexcluster", "--plot", config=cfg) == 0
    out = tmp_path / "out"
    rep = json.loads((out / "report.json").read_text())
    assert rep["verification"]["exhaustive_statevector"]["failures"] == 0
    assert rep["verification"]["sampled_tableau"]["failures"] == 0
    assert rep["metrics"]["measurement_based"]["cnot_count"] == 12
    assert [p["mb_depth"] for p in rep["depth_scan"]] == [3, 3]
    _, rows = _read_csv(out / "stabilizers.csv")
    assert len(rows) == 4 and all(float(r["mean_expectation"]) == 1.0 for r in rows)
    assert (out / "depth.png").exists()


def test_hexcluster_reference_counts_reported(tmp_path):
    assert _run(tmp_path, "hexcluster", config={"samples": 5}) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["reference_hardware_counts"]["routed"] == {"cnot_count": 16, "cnot_depth": 11}
    assert rep["metrics"]["measurement_based"] == {"cnot_count": 22, "cnot_depth": 3, "layers": 4}


def test_failure_leaves_partial_and_nonzero_exit(tmp_path, monkeypatch):
    import mbvqe.cli as cli

    def boom(cfg, out, threads, plot):
        out.json("summary.json", {"stage": "started"})
        raise RuntimeError("simulated failure")

    monkeypatch.setitem(cli.COMMANDS, "tree-xy", boom)
    assert _run(tmp_path, "tree-xy") == 3
    out = tmp_path / "out"
    assert (out / "summary.json.partial").exists()
    assert not (out / "summary.json").exists()


def test_unknown_lattice(tmp_path):
    assert _run(tmp_path, "hexcluster", config={"lattice": "nowhere"}) == 2
