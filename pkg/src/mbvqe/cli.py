"""Command-line entry point: ``mbvqe <subcommand> [--config F] [--seed N] [--out DIR] [--threads N]``.

Each run validates its JSON config, resolves defaults, and writes files into
``--out``.  Files are first written with a ``.partial`` suffix and renamed
once the run succeeds; a failing run leaves the partial files and exits
with a nonzero status.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import platform
import sys
import time
from pathlib import Path
from typing import Callable

import jsonschema
import networkx as nx
import numpy as np

from . import __version__
from .graphs import (
    adjusted_stabilizers,
    apply_plan,
    eagle127,
    falcon27,
    heavy_hex_for_grid,
    hexcluster_pattern,
    honeycomb,
    load_coupling_map,
    prep_circuit_mb,
    prep_circuit_naive,
    verify_exhaustive,
    verify_sampled,
)
from .pattern import (
    MeasurementPattern,
    PatternError,
    determinism_check,
    edge_wise_decoration,
    exhaustive_flow_search,
    find_causal_flow,
    flow_violations,
    node_wise_decoration,
    tree_pattern,
)
from .pauli import group_two_settings
from .statevector import MAX_PATTERN_QUBITS, make_rng
from .vqe import OptimizerConfig, scan_experiment, tree_xy_experiment

EXIT_CONFIG = 2
EXIT_COMPUTE = 3

MODEL_DECISIONS = {
    "schwinger_long_range_bound": "inner sum over k = n+1 .. S-1",
    "xy_perturbation": "d Z on the first two sites unless perturb_sites = all",
    "ansatz_graph": "open path over the n ansatz qubits, node-wise decoration",
    "relative_error": "|E - E_gs| / |E_gs|, absolute error when E_gs = 0",
    "restart_init": "uniform [0, 2 pi) per parameter",
    "evaluation": "exact energies via the equivalent circuit of the node-wise pattern",
}

REFERENCE_HARDWARE_COUNTS = {
    "2x3": {"measurement_based": {"cnot_count": 22, "cnot_depth": 3}, "routed": {"cnot_count": 16, "cnot_depth": 11}},
    "4x7": {"measurement_based": {"cnot_count": 142, "cnot_depth": 5}, "routed": {"cnot_count": 186, "cnot_depth": 69}},
}

# ---------------------------------------------------------------------------
# schemas


_OPTIMIZER = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "gradient": {"enum": ["fd", "shift"]},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 0},
        "gtol": {"type": "number", "minimum": 0},
        "ftol": {"type": "number", "minimum": 0},
        "memory": {"type": "integer", "minimum": 1},
    },
}

_SCHWINGER_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"J": {"type": "number"}, "w": {"type": "number"}, "mu": {"type": "number"}},
}
_XY_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "g": {"type": "number"},
        "d": {"type": "number"},
        "perturb_sites": {"enum": ["first-two", "all"]},
    },
}

SCHEMAS: dict[str, dict] = {
    "vqe-scan": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "model": {"enum": ["schwinger", "xy"]},
            "model_params": {"type": "object"},
            "qubits": {"type": "array", "items": {"type": "integer", "minimum": 2, "maximum": 10}, "minItems": 1},
            "layers": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 12}, "minItems": 1},
            "runs": {"type": "integer", "minimum": 1},
            "u3": {"type": "array", "items": {"type": "boolean"}, "minItems": 1},
            "optimizer": _OPTIMIZER,
            "seed": {"type": "integer", "minimum": 0},
        },
    },
    "tree-xy": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "g": {"type": "number"},
            "shots": {"type": "integer", "minimum": 1},
            "noise": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            "modes": {"type": "array", "items": {"enum": ["adaptive", "postselect"]}, "minItems": 1},
            "n_points": {"type": "integer", "minimum": 2},
            "clifford_points": {"type": "array", "items": {"type": "number"}, "minItems": 2},
            "eval_mode": {"enum": ["exact", "shots"]},
            "theta23": {"type": "number"},
            "seed": {"type": "integer", "minimum": 0},
        },
    },
    "hexcluster": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "lattice": {"type": "string"},
            "rows": {"type": "integer", "minimum": 1},
            "cols": {"type": "integer", "minimum": 1},
            "samples": {"type": "integer", "minimum": 0},
            "exhaustive": {"enum": [True, False, "auto"]},
            "depth_scan": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
            "seed": {"type": "integer", "minimum": 0},
        },
    },
    "flow-check": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "pattern_file": {"type": "string"},
            "builtin": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["node-wise", "edge-wise", "tree"]},
                    "n": {"type": "integer", "minimum": 1},
                    "layers": {"type": "integer", "minimum": 0},
                },
                "required": ["kind"],
            },
            "angles": {"type": "array", "items": {"type": "number"}},
            "angle": {"type": "number"},
            "seed": {"type": "integer", "minimum": 0},
        },
    },
}
SCHEMAS["cdr-demo"] = copy.deepcopy(SCHEMAS["tree-xy"])

DEFAULTS: dict[str, dict] = {
    "vqe-scan": {
        "model": "schwinger",
        "model_params": {},
        "qubits": [4],
        "layers": [1],
        "runs": 10,
        "u3": [True],
        "optimizer": {},
        "seed": 0,
    },
    "tree-xy": {
        "g": 1.0,
        "shots": 100_000,
        "noise": 0.0,
        "modes": ["adaptive", "postselect"],
        "n_points": 20,
        "clifford_points": [0.0, math.pi / 2, math.pi],
        "eval_mode": "shots",
        "theta23": math.pi / 2,
        "seed": 0,
    },
    "hexcluster": {
        "lattice": "falcon27",
        "rows": 2,
        "cols": 3,
        "samples": 1000,
        "exhaustive": "auto",
        "depth_scan": [],
        "seed": 0,
    },
    "flow-check": {"builtin": {"kind": "node-wise", "n": 3, "layers": 3}, "angle": 0.7, "seed": 0},
}
DEFAULTS["cdr-demo"] = {**DEFAULTS["tree-xy"], "noise": 0.3, "eval_mode": "exact"}


class ConfigError(ValueError):
    """Raised when a configuration fails validation."""


def resolve_config(command: str, raw: dict | None, seed: int | None = None) -> dict:
    """Validate ``raw`` against the subcommand schema and merge defaults."""
    raw = dict(raw or {})
    try:
        jsonschema.validate(raw, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{command} config: {exc.message}") from None
    cfg = copy.deepcopy(DEFAULTS[command])
    if command == "flow-check" and "pattern_file" in raw:
        cfg.pop("builtin")
    cfg.update(raw)
    if seed is not None:
        cfg["seed"] = seed
    if command == "vqe-scan":
        schema = _SCHWINGER_PARAMS if cfg["model"] == "schwinger" else _XY_PARAMS
        try:
            jsonschema.validate(cfg["model_params"], schema)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"model_params: {exc.message}") from None
    return cfg


# ---------------------------------------------------------------------------
# output handling


class Output:
    """Collects files under a directory, suffixed ``.partial`` until committed."""

    def __init__(self, root: Path, header: dict):
        self.root = root
        self.header = header
        self.files: list[Path] = []
        root.mkdir(parents=True, exist_ok=True)

    def _write(self, name: str, text: str) -> Path:
        path = self.root / (name + ".partial")
        path.write_text(text)
        self.files.append(path)
        return path

    def json(self, name: str, data: dict) -> None:
        self._write(name, json.dumps({"meta": self.header, **data}, indent=2, default=_jsonable) + "\n")

    def csv(self, name: str, text: str) -> None:
        meta = json.dumps(self.header, sort_keys=True, default=_jsonable)
        self._write(name, f"# {meta}\n" + text)

    def figure(self, name: str, draw: Callable[[Path], object]) -> None:
        path = self.root / (name + ".partial.png")
        draw(path)
        self.files.append(path)

    def commit(self) -> list[Path]:
        out = []
        for p in self.files:
            final = p.with_name(p.name.replace(".partial", ""))
            p.replace(final)
            out.append(final)
        return out


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


def _header(command: str, cfg: dict, threads: int) -> dict:
    return {
        "tool": "mbvqe",
        "version": __version__,
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "threads": threads,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "networkx": nx.__version__,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_vqe_scan(cfg: dict, out: Output, threads: int, plot: bool) -> dict:
    opt = OptimizerConfig(**cfg["optimizer"], restarts=cfg["runs"])
    res = scan_experiment(
        cfg["model"],
        cfg["qubits"],
        cfg["layers"],
        runs=cfg["runs"],
        u3=cfg["u3"],
        model_params=cfg["model_params"],
        optimizer=opt,
        seed=cfg["seed"],
        threads=threads,
    )
    out.csv("scan.csv", res.to_csv())
    failed = [c for c in res.cells if c.get("error")]
    summary = {"decisions": MODEL_DECISIONS, "cells": res.cells, "failed_cells": len(failed), "wall_time": res.wall_time}
    out.json("summary.json", summary)
    if plot:
        from .plotting import plot_scan

        out.figure("scan", lambda p: plot_scan(res.rows, p))
    return {"cells": len(res.cells), "failed_cells": len(failed)}


def cmd_tree_xy(cfg: dict, out: Output, threads: int, plot: bool) -> dict:
    rep = tree_xy_experiment(
        g=cfg["g"],
        shots=cfg["shots"],
        noise=cfg["noise"],
        modes=cfg["modes"],
        n_points=cfg["n_points"],
        clifford_points=cfg["clifford_points"],
        eval_mode=cfg["eval_mode"],
        theta23=cfg["theta23"],
        seed=cfg["seed"],
    )
    out.csv("tree.csv", rep.to_csv())
    out.json("summary.json", {"summary": rep.summary})
    if plot:
        from .plotting import plot_tree

        out.figure("tree", lambda p: plot_tree(rep.rows, p))
    return {m: {"argmin_theta1": s["argmin_theta1"], "max_abs_mitigation_error": s["max_abs_mitigation_error"]} for m, s in rep.summary.items()}


def cmd_cdr_demo(cfg: dict, out: Output, threads: int, plot: bool) -> dict:
    rep = tree_xy_experiment(
        g=cfg["g"],
        shots=cfg["shots"],
        noise=cfg["noise"],
        modes=cfg["modes"],
        n_points=cfg["n_points"],
        clifford_points=cfg["clifford_points"],
        eval_mode=cfg["eval_mode"],
        theta23=cfg["theta23"],
        seed=cfg["seed"],
    )
    expected_a0 = 1 / (1 - cfg["noise"])
    fits = {
        m: {name: {**f.to_json(), "a0_expected": expected_a0, "a1_expected": 0.0} for name, f in rep.fits[m].items()}
        for m in rep.fits
    }
    out.csv("cdr.csv", rep.to_csv())
    out.json("cdr.json", {"fits": fits, "summary": rep.summary})
    if plot:
        from .plotting import plot_tree

        out.figure("cdr", lambda p: plot_tree(rep.rows, p))
    return {"fits": {m: {k: (v["a0"], v["a1"]) for k, v in f.items()} for m, f in fits.items()}}


def _lattice(name: str):
    presets = {"falcon27": falcon27, "eagle127": eagle127, "honeycomb": honeycomb}
    if name in presets:
        return presets[name]()
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"unknown lattice {name!r} (preset or coupling-map JSON path)")
    return load_coupling_map(path)


def cmd_hexcluster(cfg: dict, out: Output, threads: int, plot: bool) -> dict:
    lat = _lattice(cfg["lattice"])
    rows, cols = cfg["rows"], cfg["cols"]
    plan = hexcluster_pattern(lat, rows, cols)
    mb, naive = prep_circuit_mb(plan), prep_circuit_naive(rows, cols, lat)
    exhaustive = cfg["exhaustive"]
    if exhaustive == "auto":
        exhaustive = plan.used_subgraph().number_of_nodes() <= MAX_PATTERN_QUBITS
    checks = {}
    if exhaustive:
        checks["exhaustive_statevector"] = verify_exhaustive(plan).to_json()
    sampled = verify_sampled(plan, cfg["samples"], make_rng(cfg["seed"], 7))
    checks["sampled_tableau"] = sampled.to_json()
    g0 = apply_plan(plan)
    inv = {q: ij for ij, q in plan.cluster.items()}
    order = sorted(g0.adj)
    stabs = adjusted_stabilizers(g0, order)
    coloring = plan.coloring()
    setting_a, setting_b, groups = group_two_settings(
        [s.pauli for s in stabs], {k: coloring[q] for k, q in enumerate(order)}
    )
    reference = REFERENCE_HARDWARE_COUNTS.get(f"{rows}x{cols}") or REFERENCE_HARDWARE_COUNTS.get(f"{cols}x{rows}")
    report = {
        "lattice": lat.name,
        "grid": [rows, cols],
        "plan": plan.to_json(),
        "metrics": {"measurement_based": mb.metrics(), "routed": naive.metrics()},
        "reference_hardware_counts": reference,
        "adjusted_stabilizers_all_zero": [
            {"vertex": s.vertex, "cell": inv[s.vertex], "pauli": s.pauli.letters, "sign": s.sign} for s in stabs
        ],
        "measurement_settings": {"A": setting_a, "B": setting_b, "groups": groups},
        "verification": checks,
    }
    depth_points = []
    for r, c in cfg["depth_scan"]:
        lat_rc = heavy_hex_for_grid(r, c)
        p_rc = hexcluster_pattern(lat_rc, r, c)
        depth_points.append(
            {
                "rows": r,
                "cols": c,
                "cluster_qubits": r * c,
                "mb_depth": prep_circuit_mb(p_rc).cnot_depth,
                "naive_depth": prep_circuit_naive(r, c, lat_rc).cnot_depth,
            }
        )
    report["depth_scan"] = depth_points
    out.json("report.json", report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex", "row", "col", "pauli_all_zero", "sign_all_zero", "mean_expectation"])
    for s in stabs:
        i, j = inv[s.vertex]
        w.writerow([s.vertex, i, j, s.pauli.letters, s.sign, sampled.stabilizer_means.get(s.vertex, math.nan)])
    out.csv("stabilizers.csv", buf.getvalue())
    if plot and depth_points:
        from .plotting import plot_prep_metrics

        out.figure("depth", lambda p: plot_prep_metrics(depth_points, p))
    if not sampled.ok or (exhaustive and checks["exhaustive_statevector"]["failures"]):
        raise RuntimeError("cluster verification failed; see report.json.partial")
    return {"metrics": report["metrics"], "sampled_failures": sampled.failures}


def _load_pattern(cfg: dict) -> MeasurementPattern:
    if "pattern_file" in cfg:
        try:
            data = json.loads(Path(cfg["pattern_file"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read pattern: {exc}") from None
        return MeasurementPattern.from_json(data)
    b = cfg["builtin"]
    if b["kind"] == "tree":
        return tree_pattern()
    g0 = nx.path_graph(b.get("n", 3))
    if b["kind"] == "edge-wise":
        return edge_wise_decoration(g0)
    return node_wise_decoration(g0, b.get("layers", 1))


def cmd_flow_check(cfg: dict, out: Output, threads: int, plot: bool) -> dict:
    try:
        p = _load_pattern(cfg)
    except PatternError as exc:
        raise ConfigError(str(exc)) from None
    og = p.open_graph
    flow = find_causal_flow(og)
    report: dict = {"vertices": p.graph.number_of_nodes(), "measured": len(p.order)}
    if flow is not None:
        report["flow"] = {
            "found": True,
            "f": {str(k): v for k, v in flow.f.items()},
            "layers": flow.layers(),
            "axiom_violations": flow_violations(og, flow),
        }
    else:
        report["flow"] = {"found": False}
        if p.graph.number_of_nodes() <= 12:
            report["flow"]["exhaustive_search"] = "none" if exhaustive_flow_search(og) is None else "found"
    if "angles" in cfg:
        angles = list(cfg["angles"])
    else:
        angles = [cfg["angle"]] * p.num_params
    if len(angles) != p.num_params:
        raise ConfigError(f"pattern needs {p.num_params} angles, got {len(angles)}")
    if len(p.order) <= 12 and p.graph.number_of_nodes() <= MAX_PATTERN_QUBITS + len(p.order):
        report["determinism"] = determinism_check(p, angles).to_json()
    out.json("flow.json", report)
    return report


COMMANDS = {
    "vqe-scan": cmd_vqe_scan,
    "flow-check": cmd_flow_check,
    "tree-xy": cmd_tree_xy,
    "hexcluster": cmd_hexcluster,
    "cdr-demo": cmd_cdr_demo,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbvqe", description="Measurement-based VQE experiments.")
    ap.add_argument("--version", action="version", version=f"mbvqe {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", type=Path, default=None, help="output directory (default ./out/<command>)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for independent jobs")
        sp.add_argument("--plot", action="store_true", help="also render PNG figures")
        if name == "flow-check":
            sp.add_argument("pattern", nargs="?", type=Path, help="pattern JSON (overrides config)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        raw = {}
        if args.config is not None:
            try:
                raw = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        if command == "flow-check" and args.pattern is not None:
            raw = {k: v for k, v in raw.items() if k != "builtin"}
            raw["pattern_file"] = str(args.pattern)
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be non-negative")
        if args.threads < 1:
            raise ConfigError("threads must be >= 1")
        cfg = resolve_config(command, raw, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Output(args.out or Path("out") / command, _header(command, cfg, args.threads))
    t0 = time.perf_counter()
    try:
        result = COMMANDS[command](cfg, out, args.threads, args.plot)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # report and keep the partial files
        print(f"error: {command} failed: {exc!r}; partial outputs left in {out.root}", file=sys.stderr)
        return EXIT_COMPUTE
    files = out.commit()
    print(json.dumps({"command": command, "seconds": round(time.perf_counter() - t0, 3), "files": [str(f) for f in files], "result": result}, default=_jsonable))
    return 0


if __name__ == "__main__":
    sys.exit(main())
