"""Sampled real potentials on uniform spatial grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["PotentialProfile", "uniform_grid"]


def uniform_grid(x_min: float, x_max: float, dx: float) -> np.ndarray:
    """Uniform grid from ``x_min`` to ``x_max`` (inclusive) with spacing close to ``dx``."""
    if not x_max > x_min:
        raise ValueError("x_max must exceed x_min")
    if not dx > 0:
        raise ValueError("dx must be positive")
    npts = int(round((x_max - x_min) / dx)) + 1
    return np.linspace(x_min, x_max, max(npts, 2))


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Real potential q sampled on a uniform grid, with a time label.

    Parameters
    ----------
    x_grid : array_like, shape (m,)
        Uniform, increasing sample locations.
    q : array_like, shape (m,)
        Real, finite samples.
    t : float, default 0.0
        Time label.
    func : callable, optional
        Exact evaluator ``func(x) -> q(x)`` for analytically known potentials.
        ODE solvers use it in place of spline interpolation of the samples.
    meta : dict, optional
        Free-form annotations, e.g. low-confidence flags.
    """

    x_grid: np.ndarray
    q: np.ndarray
    t: float = 0.0
    func: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.x_grid, dtype=float)
        q = np.asarray(self.q)
        if np.iscomplexobj(q):
            if np.any(q.imag != 0):
                raise ValueError("potential samples must be real")
            q = q.real
        q = np.array(q, dtype=float)
        if x.ndim != 1 or x.shape != q.shape or x.size < 2:
            raise ValueError("x_grid and q must be 1-D arrays of equal length >= 2")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(q))):
            raise ValueError("x_grid and q must be finite")
        steps = np.diff(x)
        if np.any(steps <= 0):
            raise ValueError("x_grid must be strictly increasing")
        if np.ptp(steps) > 1e-8 * max(abs(steps.mean()), 1.0) + 1e-9 * np.max(np.abs(x)):
            raise ValueError("x_grid must be uniform")
        x.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", float(self.t))

    @property
    def x_min(self) -> float:
        return float(self.x_grid[0])

    @property
    def x_max(self) -> float:
        return float(self.x_grid[-1])

    @property
    def dx(self) -> float:
        return float((self.x_grid[-1] - self.x_grid[0]) / (self.x_grid.size - 1))

    def evaluator(self) -> Callable[[float], float]:
        """Callable for q at arbitrary x, zero outside the sampled interval."""
        if self.func is not None:
            return self.func
        spline = CubicSpline(self.x_grid, self.q)
        lo, hi = self.x_min, self.x_max

        def q_of_x(x):
            x = np.asarray(x, dtype=float)
            return np.where((x >= lo) & (x <= hi), spline(x), 0.0)

        return q_of_x
