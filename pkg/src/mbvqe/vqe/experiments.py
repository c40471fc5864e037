"""Scaling scans and the tree-ansatz XY experiment."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from ..models import build_model, tree_components_analytic, xy_periodic4
from ..pattern import node_wise_decoration, tree_pattern
from ..statevector import ground_state_energy, make_rng
from .cdr import CDRModel, cdr_apply, cdr_fit, fit_mse
from .objective import NoiseModel, Objective, ObjectiveSpec
from .optimizer import OptimizerConfig, optimize, relative_error

SCAN_COLUMNS = ("model", "n", "layers", "u3", "run", "seed", "energy", "exact_energy", "rel_error")
TREE_COLUMNS = (
    "mode",
    "theta1",
    "hx_raw",
    "hx_stderr",
    "hy_raw",
    "hy_stderr",
    "hx_mitigated",
    "hy_mitigated",
    "hxy_raw",
    "hxy_mitigated",
    "hxy_analytic",
    "acceptance",
)


def run_jobs(fn: Callable, jobs: Sequence, threads: int = 1) -> list:
    """Map ``fn`` over ``jobs`` in a process pool; results keep job order."""
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def model_key(model: str, params: dict) -> int:
    """Stable integer key for a model configuration (seed stream separation)."""
    return zlib.crc32(json.dumps([model, params], sort_keys=True).encode())


# ---------------------------------------------------------------------------
# scaling scans


@dataclass(frozen=True)
class ScanCell:
    model: str
    params: tuple[tuple[str, object], ...]
    n: int
    layers: int
    u3: bool
    runs: int
    optimizer: OptimizerConfig
    seed: int

    @property
    def label(self) -> str:
        return _model_label(self.model, dict(self.params))


def _model_label(model: str, params: dict) -> str:
    if not params:
        return model
    return model + "(" + ",".join(f"{k}={v}" for k, v in sorted(params.items())) + ")"


@dataclass
class ScanResult:
    rows: list[dict]
    cells: list[dict]
    wall_time: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in SCAN_COLUMNS})
        return buf.getvalue()

    def cell(self, model: str, n: int, layers: int, u3: bool) -> dict:
        for c in self.cells:
            if (c["model"], c["n"], c["layers"], c["u3"]) == (model, n, layers, u3):
                return c
        raise KeyError((model, n, layers, u3))


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def ansatz_graph(n: int) -> nx.Graph:
    return nx.path_graph(n)


def run_cell(cell: ScanCell) -> tuple[list[dict], dict]:
    params = dict(cell.params)
    label = cell.label
    base = {"model": label, "n": cell.n, "layers": cell.layers, "u3": cell.u3}
    t0 = time.perf_counter()
    try:
        h = build_model(cell.model, cell.n, **params)
        exact = ground_state_energy(h)[0]
        p = node_wise_decoration(ansatz_graph(cell.n), cell.layers)
        obj = Objective(ObjectiveSpec(p, h, u3_layer=cell.u3))
        cfg = OptimizerConfig(**{**cell.optimizer.__dict__, "restarts": cell.runs})
        keys = (model_key(cell.model, params), cell.n, cell.layers, int(cell.u3))
        res = optimize(obj, cfg, seed=cell.seed, exact_energy=exact, keys=keys)
    except Exception as exc:  # per-cell failures are logged, not fatal
        return [], {**base, "error": repr(exc), "wall_time": time.perf_counter() - t0}
    rows = []
    for r in res.restarts:
        rel = relative_error(r.energy, exact) if r.error is None else math.nan
        rows.append({**base, "run": r.index, "seed": r.seed, "energy": r.energy, "exact_energy": exact, "rel_error": rel})
    summary = {**base, **res.summary(), "num_params": obj.num_params, "error": None}
    return rows, summary


def scan_experiment(
    model: str,
    qubits: Iterable[int],
    layers: Iterable[int],
    runs: int = 10,
    u3: Iterable[bool] = (True,),
    model_params: dict | None = None,
    optimizer: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
    threads: int = 1,
) -> ScanResult:
    """Relative-error statistics per ``(n, l, u3)`` cell over ``runs`` random starts."""
    params = tuple(sorted((model_params or {}).items()))
    cells = [
        ScanCell(model, params, n, l, bool(u), runs, optimizer, seed) for n in qubits for l in layers for u in u3
    ]
    t0 = time.perf_counter()
    out = run_jobs(run_cell, cells, threads)
    rows = [r for rs, _ in out for r in rs]
    return ScanResult(rows, [s for _, s in out], time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# tree XY experiment


TREE_MODES = ("adaptive", "postselect")


@dataclass
class TreeReport:
    g: float
    rows: list[dict]
    fits: dict
    summary: dict
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=TREE_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in TREE_COLUMNS})
        return buf.getvalue()

    def mode_rows(self, mode: str) -> list[dict]:
        return [r for r in self.rows if r["mode"] == mode]


def _tree_objective(h, mode: str, eval_mode: str, shots: int, noise: NoiseModel, rng) -> Objective:
    p = tree_pattern()
    spec = ObjectiveSpec(
        p,
        h,
        eval_mode=eval_mode,
        shots=shots,
        execution=mode,
        postselect_on=(p.meta["parent"],) if mode == "postselect" else None,
        noise=noise,
    )
    return Objective(spec, rng)


def tree_xy_experiment(
    g: float = 1.0,
    shots: int = 100_000,
    noise: float = 0.0,
    modes: Sequence[str] = TREE_MODES,
    n_points: int = 20,
    clifford_points: Sequence[float] = (0.0, math.pi / 2, math.pi),
    eval_mode: str = "shots",
    theta23: float = math.pi / 2,
    seed: int = 0,
) -> TreeReport:
    """Scan ``theta1`` over ``[0, pi]`` measuring ``H_X`` and ``H_Y`` separately.

    ``shots`` is the budget for each expectation value at each point.  The
    postselect mode keeps runs whose parent qubit gives 0; mid qubits are
    corrected adaptively.  CDR is fitted per mode and observable on the
    Clifford points against noiseless simulation.
    """
    for m in modes:
        if m not in TREE_MODES:
            raise ValueError(f"unknown tree mode {m!r}")
    _, hx, hy = xy_periodic4(g)
    nm = NoiseModel(noise)
    grid = np.linspace(0.0, math.pi, n_points)
    ideal = {name: _tree_objective(h, "adaptive", "exact", 0, NoiseModel(), None) for name, h in (("hx", hx), ("hy", hy))}

    def exact_of(name, t1):
        return ideal[name]([t1, theta23, theta23])

    rows, fits, summary = [], {}, {}
    for mi, mode in enumerate(modes):
        objs = {
            name: _tree_objective(h, mode, eval_mode, shots, nm, make_rng(seed, mi, oi))
            for oi, (name, h) in enumerate((("hx", hx), ("hy", hy)))
        }
        fits[mode] = {}
        for name, obj in objs.items():
            pts = [(obj([t, theta23, theta23]), exact_of(name, t)) for t in clifford_points]
            fits[mode][name] = cdr_fit(pts)
        held = {name: [] for name in objs}
        mode_rows = []
        for t1 in grid:
            ev = {name: obj.evaluate([t1, theta23, theta23]) for name, obj in objs.items()}
            mit = {name: float(cdr_apply(fits[mode][name], ev[name].value)) for name in objs}
            if not any(math.isclose(t1, c, abs_tol=1e-12) for c in clifford_points):
                for name in objs:
                    held[name].append((ev[name].value, exact_of(name, t1)))
            ax, ay = tree_components_analytic(t1, theta23, theta23)
            row = {
                "mode": mode,
                "theta1": float(t1),
                "hx_raw": ev["hx"].value,
                "hx_stderr": ev["hx"].stderr,
                "hy_raw": ev["hy"].value,
                "hy_stderr": ev["hy"].stderr,
                "hx_mitigated": mit["hx"],
                "hy_mitigated": mit["hy"],
                "hxy_raw": _combine(g, ev["hx"].value, ev["hy"].value),
                "hxy_mitigated": _combine(g, mit["hx"], mit["hy"]),
                "hxy_analytic": _combine(g, ax, ay),
                "acceptance": min(ev["hx"].acceptance, ev["hy"].acceptance),
            }
            mode_rows.append(row)
        rows.extend(mode_rows)
        best = min(mode_rows, key=lambda r: r["hxy_mitigated"])
        summary[mode] = {
            "fit": {name: fits[mode][name].to_json() for name in objs},
            "heldout_mse": {name: fit_mse(fits[mode][name], held[name]) for name in objs},
            "argmin_theta1": best["theta1"],
            "min_hxy_mitigated": best["hxy_mitigated"],
            "max_abs_mitigation_error": max(abs(r["hxy_mitigated"] - r["hxy_analytic"]) for r in mode_rows),
            "mean_acceptance": float(np.mean([r["acceptance"] for r in mode_rows])),
        }
    config = {
        "g": g,
        "shots": shots,
        "noise": noise,
        "modes": list(modes),
        "n_points": n_points,
        "clifford_points": list(clifford_points),
        "eval_mode": eval_mode,
        "theta23": theta23,
        "seed": seed,
    }
    return TreeReport(g, rows, fits, summary, config)


def _combine(g: float, hx: float, hy: float) -> float:
    return -(1 + g) / 2 * hx + (1 - g) / 2 * hy


__all__ = [
    "SCAN_COLUMNS",
    "TREE_COLUMNS",
    "TREE_MODES",
    "CDRModel",
    "ScanCell",
    "ScanResult",
    "TreeReport",
    "ansatz_graph",
    "model_key",
    "run_cell",
    "run_jobs",
    "scan_experiment",
    "tree_xy_experiment",
]
