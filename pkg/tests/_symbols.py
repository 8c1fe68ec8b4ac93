"""Random admissible symbols shared by the test modules."""

import numpy as np

from kdv_ist.grid import GridFunction, riesz_project
from kdv_ist.hankel import SymbolDescriptor


def smooth_reflection(grid, rng, amplitude=0.3, n_bumps=3):
    """Conjugate-symmetric smooth R with sup |R| <= amplitude."""
    k = grid.k
    g = np.zeros(grid.n, dtype=complex)
    for _ in range(n_bumps):
        c = rng.uniform(-0.5, 0.5) * grid.k_max
        w = rng.uniform(0.05, 0.2) * grid.k_max
        a = rng.standard_normal() + 1j * rng.standard_normal()
        g += a * np.exp(-((k - c) / w) ** 2)
    r = g + np.conj(g[::-1])
    r *= amplitude / np.max(np.abs(r))
    return GridFunction(grid, r)


def random_symbol(grid, rng, n_poles=None, amplitude=0.3):
    if n_poles is None:
        n_poles = int(rng.integers(0, 3))
    poles = tuple((rng.uniform(0.1, 3.0), rng.uniform(0.3, 2.0)) for _ in range(n_poles))
    return SymbolDescriptor(smooth_reflection(grid, rng, amplitude), poles)


def random_hardy(grid, rng, n_poles=1):
    v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    v *= np.exp(-(grid.k / (0.3 * grid.k_max)) ** 2)
    f = riesz_project(GridFunction(grid, v), "plus")
    poles = [(-1j * rng.uniform(0.2, 2.0), rng.standard_normal() + 1j * rng.standard_normal())
             for _ in range(n_poles)]
    return f + GridFunction.rational(grid, poles)
