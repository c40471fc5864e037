"""Clifford data regression: a linear map from noisy to exact expectation values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class CDRError(ValueError):
    """Raised for too few or degenerate regression points."""


@dataclass(frozen=True)
class CDRModel:
    a0: float
    a1: float
    mse: float
    n_points: int

    def to_json(self) -> dict:
        return {"a0": self.a0, "a1": self.a1, "mse": self.mse, "n_points": self.n_points}


def cdr_fit(points: Sequence[tuple[float, float]]) -> CDRModel:
    """Least-squares fit of ``exact = a0 * noisy + a1`` over ``(noisy, exact)`` pairs."""
    if len(points) < 2:
        raise CDRError("need at least two regression points")
    x, y = (np.asarray(v, dtype=float) for v in zip(*points))
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-24 * max(1.0, float(x @ x)):
        raise CDRError("noisy values have zero variance")
    a0 = float(xc @ (y - y.mean())) / sxx
    a1 = float(y.mean() - a0 * x.mean())
    resid = a0 * x + a1 - y
    return CDRModel(a0, a1, float(np.mean(resid**2)), len(points))


def cdr_apply(model: CDRModel, noisy):
    """``a0 * noisy + a1``; works elementwise on arrays."""
    if isinstance(noisy, (int, float)):
        return model.a0 * noisy + model.a1
    return model.a0 * np.asarray(noisy, dtype=float) + model.a1


def fit_mse(model: CDRModel, points: Sequence[tuple[float, float]]) -> float:
    """Mean-squared deviation of held-out ``(noisy, exact)`` pairs from the fitted line."""
    if not points:
        return float("nan")
    x, y = (np.asarray(v, dtype=float) for v in zip(*points))
    return float(np.mean((cdr_apply(model, x) - y) ** 2))
