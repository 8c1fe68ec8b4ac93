"""Momentum grids, Hardy-space projections and related primitives.

The real momentum line is discretized on the midpoint grid

    k_j = -k_max + (j + 1/2) * dk,   dk = 2 k_max / n,   j = 0..n-1,

which is exactly symmetric under k -> -k.  Its dual ("position") grid is
half-shifted as well, x_m = (m + 1/2) * pi / k_max, so no dual mode sits at
x = 0.  A grid function belongs to the discrete Hardy space H^2(C+) when its
expansion f(k) = sum_m g_m exp(i k x_m) only uses modes with x_m > 0.  With
this layout the Riesz projections are exact complementary orthogonal
projectors and the reflection (Jf)(k) = f(-k) is a pure index reversal, so
the identities P+ + P- = I and J P-+ = P+- J hold to rounding error.

A :class:`GridFunction` may also carry an exact rational part, a finite sum
of simple-pole terms a / (k - p) with Im p != 0.  Such terms belong exactly
to H^2(C+) (Im p < 0) or H^2(C-) (Im p > 0) and are never sampled inside the
projections.  This keeps pole contributions (bound states) free of the slow
1/k truncation error that a sampled Cauchy kernel would incur.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Tuple, Union

import numpy as np

from .exceptions import GridMismatch

__all__ = [
    "MomentumGrid",
    "GridFunction",
    "riesz_project",
    "reflect",
    "cauchy_eval",
    "l2_inner",
    "l2_norm",
    "hardy_defect",
    "cosine_taper",
]

Sign = Union[str, int]
PoleTerms = Tuple[Tuple[complex, complex], ...]


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform, symmetric midpoint grid on [-k_max, k_max].

    Parameters
    ----------
    k_max : float
        Half-width of the momentum window.
    n : int
        Number of samples; must be even and at least 16.
    """

    k_max: float
    n: int

    def __post_init__(self):
        k_max = float(self.k_max)
        if not np.isfinite(k_max) or k_max <= 0:
            raise ValueError(f"k_max must be positive and finite, got {self.k_max!r}")
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 16, got {self.n!r}")
        object.__setattr__(self, "k_max", k_max)
        object.__setattr__(self, "n", int(self.n))

    @property
    def dk(self) -> float:
        """Grid spacing."""
        return 2.0 * self.k_max / self.n

    @cached_property
    def k(self) -> np.ndarray:
        """Sample locations (read-only)."""
        k = -self.k_max + (np.arange(self.n) + 0.5) * self.dk
        k.flags.writeable = False
        return k

    @property
    def dual_spacing(self) -> float:
        """Spacing of the dual (position) grid, pi / k_max."""
        return np.pi / self.k_max

    @cached_property
    def _twist(self) -> np.ndarray:
        # exp(-i pi j / n) turns the half-shifted dual grid into a plain DFT.
        tw = np.exp(-1j * np.pi * np.arange(self.n) / self.n)
        tw.flags.writeable = False
        return tw

    @cached_property
    def _plus_mask(self) -> np.ndarray:
        # DFT index m < n/2 corresponds to the dual node x_m = (m + 1/2) pi / k_max > 0.
        mask = np.zeros(self.n, dtype=bool)
        mask[: self.n // 2] = True
        mask.flags.writeable = False
        return mask

    def dual_coefficients(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of ``values`` on the dual modes, in DFT index order."""
        return np.fft.fft(self._twist * values)

    def from_dual_coefficients(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`dual_coefficients`."""
        return np.fft.ifft(coeffs) / self._twist

    def hardy_basis(self, m: int) -> np.ndarray:
        """First ``m`` orthonormal basis vectors of the discrete H^2(C+).

        Returns an ``(n, m)`` array whose column ``a`` samples
        ``exp(i k x_a) / sqrt(n dk)`` with ``x_a = (a + 1/2) pi / k_max``.
        """
        if not 0 < m <= self.n // 2:
            raise ValueError(f"m must lie in 1..{self.n // 2}, got {m}")
        x = (np.arange(m) + 0.5) * self.dual_spacing
        return np.exp(1j * np.outer(self.k, x)) / np.sqrt(self.n * self.dk)


def _as_pole_terms(poles: Iterable) -> PoleTerms:
    merged: dict = {}
    for p, a in poles:
        p = complex(p)
        a = complex(a)
        if not (np.isfinite(p) and np.isfinite(a)):
            raise ValueError("pole terms must be finite")
        if p.imag == 0.0:
            raise ValueError(f"pole {p} lies on the real axis")
        merged[p] = merged.get(p, 0.0) + a
    return tuple((p, a) for p, a in merged.items() if a != 0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex function on a momentum grid, with an optional exact rational part.

    The represented function is ``values[j] + sum(a / (k_j - p) for p, a in poles)``.

    Parameters
    ----------
    grid : MomentumGrid
        Carrier grid.
    values : array_like of complex, shape (n,)
        Sampled part.
    poles : sequence of (p, a), optional
        Rational terms ``a / (k - p)`` with ``Im p != 0``.
    """

    grid: MomentumGrid
    values: np.ndarray
    poles: PoleTerms = field(default=())

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"values must have shape ({self.grid.n},), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridFunction values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "poles", _as_pole_terms(self.poles))

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, grid: MomentumGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n, dtype=complex))

    @classmethod
    def from_callable(cls, grid: MomentumGrid, func: Callable) -> "GridFunction":
        """Sample ``func`` on the grid nodes."""
        return cls(grid, np.broadcast_to(func(grid.k), (grid.n,)))

    @classmethod
    def rational(cls, grid: MomentumGrid, poles: Iterable) -> "GridFunction":
        """Pure rational function ``sum a / (k - p)``, held exactly."""
        return cls(grid, np.zeros(grid.n, dtype=complex), tuple(poles))

    # -- evaluation ---------------------------------------------------
    def samples(self) -> np.ndarray:
        """Values of the full function (sampled plus rational part) on the grid."""
        out = np.array(self.values)
        k = self.grid.k
        for p, a in self.poles:
            out += a / (k - p)
        return out

    @property
    def k(self) -> np.ndarray:
        return self.grid.k

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "GridFunction"):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch("grid functions live on different grids")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return GridFunction(self.grid, self.values + other.values, self.poles + other.poles)

    def __neg__(self):
        return GridFunction(self.grid, -self.values, tuple((p, -a) for p, a in self.poles))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, GridFunction) or not np.isscalar(scalar):
            return NotImplemented
        s = complex(scalar)
        return GridFunction(self.grid, s * self.values, tuple((p, s * a) for p, a in self.poles))

    __rmul__ = __mul__

    def conj_symmetric(self) -> bool:
        """Whether the sampled part satisfies f(-k) = conj(f(k)) to 1e-12."""
        v = self.values
        scale = max(np.max(np.abs(v)), 1e-300)
        return bool(np.max(np.abs(v[::-1] - np.conj(v))) <= 1e-12 * scale)


def _sign(sign: Sign) -> int:
    if sign in ("plus", "+", 1, +1):
        return 1
    if sign in ("minus", "-", -1):
        return -1
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def _project_values(grid: MomentumGrid, values: np.ndarray, s: int) -> np.ndarray:
    coeffs = grid.dual_coefficients(values)
    if s > 0:
        coeffs[~grid._plus_mask] = 0.0
    else:
        coeffs[grid._plus_mask] = 0.0
    return grid.from_dual_coefficients(coeffs)


def riesz_project(f: GridFunction, sign: Sign) -> GridFunction:
    """Riesz projection onto H^2(C+) (``sign='plus'``) or H^2(C-).

    The sampled part is projected by masking dual coefficients after an FFT.
    Rational terms are kept or dropped according to the half-plane of their
    pole, which is exact.

    Parameters
    ----------
    f : GridFunction
    sign : {'plus', 'minus'}

    Returns
    -------
    GridFunction
    """
    s = _sign(sign)
    values = _project_values(f.grid, f.values, s)
    keep = [(p, a) for p, a in f.poles if (p.imag < 0) == (s > 0)]
    return GridFunction(f.grid, values, tuple(keep))


def reflect(f: GridFunction) -> GridFunction:
    """The reflection (Jf)(k) = f(-k).

    On the symmetric midpoint grid this is an index reversal; a rational term
    a / (k - p) becomes -a / (k + p).
    """
    return GridFunction(f.grid, f.values[::-1], tuple((-p, -a) for p, a in f.poles))


def cauchy_eval(f: GridFunction, z):
    """Cauchy integral (1/2 pi i) int f(s) / (s - z) ds for Im z > 0.

    For f in H^2(C+) this is the analytic continuation f(z).  The sampled
    part uses the grid quadrature; rational terms are integrated exactly.

    Parameters
    ----------
    f : GridFunction
    z : complex or array_like of complex
        Evaluation point(s), all with positive imaginary part.

    Returns
    -------
    complex or ndarray
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag <= 0):
        raise ValueError("cauchy_eval requires Im z > 0")
    grid = f.grid
    zz = z_arr.reshape(-1)
    kernel = 1.0 / (grid.k[None, :] - zz[:, None])
    out = kernel @ f.values * (grid.dk / (2j * np.pi))
    for p, a in f.poles:
        if p.imag < 0:
            out += a / (zz - p)
    out = out.reshape(z_arr.shape)
    return complex(out) if out.ndim == 0 else out


def _rational_inner(p: complex, r: complex) -> complex:
    # int 1/(k - p) * conj(1/(k - r)) dk, evaluated by residues.
    if p.imag < 0 and r.imag < 0:
        return 2j * np.pi / (np.conj(r) - p)
    if p.imag > 0 and r.imag > 0:
        return 2j * np.pi / (p - np.conj(r))
    return 0.0j


def l2_inner(f: GridFunction, g: GridFunction) -> complex:
    """L^2 inner product <f, g> = int f conj(g) dk.

    Sampled parts use the midpoint (trapezoidal on the periodic grid) rule;
    products of two rational terms are integrated exactly; mixed products are
    integrated by the grid rule.
    """
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different grids")
    grid = f.grid
    k = grid.k
    acc = np.vdot(g.values, f.values)
    for r, b in g.poles:
        acc += np.vdot(b / (k - r), f.values)
    for p, a in f.poles:
        acc += np.vdot(g.values, a / (k - p))
    acc *= grid.dk
    for p, a in f.poles:
        for r, b in g.poles:
            acc += a * np.conj(b) * _rational_inner(p, r)
    return complex(acc)


def l2_norm(f: GridFunction) -> float:
    """L^2 norm associated with :func:`l2_inner`."""
    return float(np.sqrt(max(l2_inner(f, f).real, 0.0)))


def hardy_defect(f: GridFunction) -> float:
    """Relative size ||P- f|| / ||f|| of the non-Hardy part of ``f``.

    Zero for the zero function.
    """
    total = l2_norm(f)
    if total == 0.0:
        return 0.0
    return l2_norm(riesz_project(f, "minus")) / total


def cosine_taper(grid: MomentumGrid, fraction: float = 0.05) -> np.ndarray:
    """Window equal to one inside and rolling off as cos^2 over the outer ``fraction``."""
    if not 0.0 <= fraction < 0.5:
        raise ValueError("taper fraction must lie in [0, 0.5)")
    w = np.ones(grid.n)
    if fraction == 0.0:
        return w
    edge = (1.0 - fraction) * grid.k_max
    ak = np.abs(grid.k)
    zone = ak > edge
    w[zone] = np.cos(0.5 * np.pi * (ak[zone] - edge) / (fraction * grid.k_max)) ** 2
    return w
