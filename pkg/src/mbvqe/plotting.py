"""Figures rendered from result tables (files only, non-interactive backend)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_scan(rows: Sequence[dict], path: str | Path) -> Path:
    """Mean relative error against qubit count, one line per (layers, u3); band = +-1 std."""
    cells: dict = defaultdict(list)
    for r in rows:
        cells[(r["model"], r["layers"], bool(r["u3"]), r["n"])].append(r["rel_error"])
    models = sorted({k[0] for k in cells})
    fig, axes = plt.subplots(1, len(models), figsize=(5 * len(models), 4), squeeze=False)
    for ax, model in zip(axes[0], models):
        series = sorted({(k[1], k[2]) for k in cells if k[0] == model})
        cmap = plt.get_cmap("viridis", max(len(series), 2))
        for i, (layers, u3) in enumerate(series):
            ns = sorted(k[3] for k in cells if k[:3] == (model, layers, u3))
            vals = [np.asarray(cells[(model, layers, u3, n)], dtype=float) for n in ns]
            mean = np.array([np.nanmean(v) for v in vals])
            std = np.array([np.nanstd(v) for v in vals])
            style = "-" if u3 else "--"
            ax.plot(ns, mean, style, color=cmap(i), marker="o", label=f"l={layers}{'' if u3 else ' no U3'}")
            ax.fill_between(ns, np.clip(mean - std, 1e-16, None), mean + std, color=cmap(i), alpha=0.2)
        ax.set_yscale("log")
        ax.set_xlabel("qubits")
        ax.set_ylabel("relative error")
        ax.set_title(model)
        ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_tree(rows: Sequence[dict], path: str | Path) -> Path:
    """Raw, mitigated and analytic energies over the parent angle per execution mode."""
    modes = sorted({r["mode"] for r in rows})
    fig, axes = plt.subplots(1, len(modes), figsize=(5 * len(modes), 4), squeeze=False)
    for ax, mode in zip(axes[0], modes):
        rs = sorted((r for r in rows if r["mode"] == mode), key=lambda r: r["theta1"])
        t = [r["theta1"] for r in rs]
        ax.plot(t, [r["hxy_analytic"] for r in rs], "k-", label="analytic")
        ax.plot(t, [r["hxy_raw"] for r in rs], "o", mfc="none", label="raw")
        ax.plot(t, [r["hxy_mitigated"] for r in rs], "x", label="mitigated")
        ax.set_xlabel("theta1")
        ax.set_ylabel("<H_XY>")
        ax.set_title(mode)
        ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_prep_metrics(points: Sequence[dict], path: str | Path) -> Path:
    """CNOT depth of measurement-based vs routed preparation against cluster size."""
    pts = sorted(points, key=lambda p: p["cluster_qubits"])
    x = [p["cluster_qubits"] for p in pts]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(x, [p["mb_depth"] for p in pts], "o-", label="measurement-based")
    ax.plot(x, [p["naive_depth"] for p in pts], "s-", label="routed")
    ax.set_xlabel("cluster qubits")
    ax.set_ylabel("CNOT depth")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
