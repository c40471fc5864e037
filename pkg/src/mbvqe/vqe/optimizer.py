"""Limited-memory quasi-Newton minimisation and multi-restart VQE runs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..statevector import derive_seed, ground_state_energy
from .objective import Objective, value_and_gradient

GRADIENTS = ("fd", "shift")


class OptimizerError(ValueError):
    """Raised for invalid optimizer settings."""


@dataclass(frozen=True)
class OptimizerConfig:
    gradient: str = "fd"
    eps: float = 1e-6
    restarts: int = 10
    max_iter: int = 2000
    gtol: float = 1e-9
    ftol: float = 1e-15
    memory: int = 20
    bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.gradient not in GRADIENTS:
            raise OptimizerError(f"gradient must be one of {GRADIENTS}")
        if not self.eps > 0:
            raise OptimizerError("finite-difference step must be positive")
        if self.restarts < 1:
            raise OptimizerError("need at least one restart")
        if self.max_iter < 0 or self.memory < 1:
            raise OptimizerError("max_iter must be >= 0 and memory >= 1")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise OptimizerError("bounds must satisfy lower < upper")


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    trace: list[float]
    n_iter: int
    converged: bool
    message: str


def lbfgs(
    fg: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    max_iter: int = 2000,
    gtol: float = 1e-9,
    ftol: float = 1e-15,
    memory: int = 20,
    bounds: tuple[float, float] | None = None,
) -> MinimizeResult:
    """Minimise with L-BFGS two-loop directions and an Armijo backtracking search.

    With ``bounds`` the iterate is projected onto the box after every step
    (projected search), which keeps accepted values non-increasing.
    """
    lo, hi = bounds if bounds is not None else (-np.inf, np.inf)
    x = np.clip(np.asarray(x0, dtype=float).copy(), lo, hi)
    f, g = fg(x)
    trace = [f]
    if x.size == 0:
        return MinimizeResult(x, f, trace, 0, True, "no parameters")
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    message = "max iterations reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) <= gtol:
            converged, message = True, "gradient below tolerance"
            it -= 1
            break
        d = _two_loop(g, s_hist, y_hist)
        slope = float(g @ d)
        if slope >= 0:
            # not a descent direction; fall back to steepest descent
            s_hist.clear()
            y_hist.clear()
            d = -g
            slope = float(g @ d)
        step = 1.0 if s_hist else min(1.0, 1.0 / max(np.linalg.norm(g), 1e-300))
        accepted = False
        for _ in range(60):
            x_new = np.clip(x + step * d, lo, hi)
            f_new, g_new = fg(x_new)
            if f_new <= f + 1e-4 * float(g @ (x_new - x)) and f_new <= f:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            message = "line search failed"
            converged = np.max(np.abs(g)) <= math.sqrt(gtol)
            it -= 1
            break
        s, y = x_new - x, g_new - g
        if float(s @ y) > 1e-12 * float(s @ s):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        df = f - f_new
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        if df <= ftol * max(abs(f), abs(f + df), 1.0):
            converged, message = True, "objective change below tolerance"
            break
    return MinimizeResult(x, f, trace, it, converged, message)


def _two_loop(g: np.ndarray, s_hist: list[np.ndarray], y_hist: list[np.ndarray]) -> np.ndarray:
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        alphas.append((a, rho, s, y))
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(s @ y) / float(y @ y)
    for a, rho, s, y in reversed(alphas):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


# ---------------------------------------------------------------------------
# VQE runs


def relative_error(energy: float, exact: float) -> float:
    """``|E - E_gs| / |E_gs|``, or the absolute error when ``E_gs`` is zero."""
    if abs(exact) < 1e-12:
        return abs(energy - exact)
    return abs(energy - exact) / abs(exact)


@dataclass
class RestartResult:
    index: int
    seed: int
    energy: float
    params: np.ndarray
    trace: list[float]
    n_iter: int
    converged: bool
    message: str
    error: str | None = None


@dataclass
class RunResult:
    best_energy: float
    best_params: np.ndarray
    exact_energy: float
    rel_error: float
    restarts: list[RestartResult]
    seed: int
    wall_time: float
    extra: dict = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.restarts if r.error is None])

    @property
    def rel_errors(self) -> np.ndarray:
        return np.array([relative_error(e, self.exact_energy) for e in self.energies])

    @property
    def mean_energy(self) -> float:
        return float(np.mean(self.energies)) if self.energies.size else math.nan

    def summary(self) -> dict:
        errs = self.rel_errors
        return {
            "best_energy": self.best_energy,
            "exact_energy": self.exact_energy,
            "best_rel_error": self.rel_error,
            "mean_rel_error": float(np.mean(errs)) if errs.size else math.nan,
            "median_rel_error": float(np.median(errs)) if errs.size else math.nan,
            "var_rel_error": float(np.var(errs)) if errs.size else math.nan,
            "restarts": len(self.restarts),
            "failed": sum(r.error is not None for r in self.restarts),
            "seed": self.seed,
            "wall_time": self.wall_time,
        }


def optimize(
    obj: Objective,
    config: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
    exact_energy: float | None = None,
    keys: tuple[int, ...] = (),
) -> RunResult:
    """Best of ``config.restarts`` L-BFGS runs from uniform ``[0, 2 pi)`` starts.

    Restart ``r`` is seeded with ``derive_seed(seed, *keys, r)``; a failing
    restart is recorded with its error and does not abort the batch.
    """
    t0 = time.perf_counter()
    if exact_energy is None:
        exact_energy = ground_state_energy(obj.spec.hamiltonian)[0]

    def fg(x):
        return value_and_gradient(obj, x, config.gradient, config.eps)

    results = []
    for r in range(config.restarts):
        rs = derive_seed(seed, *keys, r)
        x0 = np.random.default_rng(rs).uniform(0, 2 * math.pi, obj.num_params)
        try:
            res = lbfgs(fg, x0, config.max_iter, config.gtol, config.ftol, config.memory, config.bounds)
            results.append(RestartResult(r, rs, res.fun, res.x, res.trace, res.n_iter, res.converged, res.message))
        except (ValueError, ArithmeticError) as exc:
            results.append(RestartResult(r, rs, math.nan, x0, [], 0, False, "failed", repr(exc)))
    ok = [r for r in results if r.error is None]
    if ok:
        best = min(ok, key=lambda r: r.energy)
        be, bp = best.energy, best.params
    else:
        be, bp = math.nan, np.zeros(obj.num_params)
    return RunResult(be, bp, float(exact_energy), relative_error(be, exact_energy), results, seed, time.perf_counter() - t0)
