"""Hankel operators with structured symbols and the central linear solve.

The symbol of the inverse problem is

    phi(k) = R_{x,t}(k) - sum_n i c_n / (k - i kappa_n),

a sampled reflection part plus finitely many simple-pole terms.  The Hankel
operator H(phi) f = J P-(phi f) acts on the discrete Hardy space of
:mod:`kdv_ist.grid`.  The reflection part is applied by multiplying,
projecting and reflecting on the grid.  Each pole term maps f to the exact
rational function i c f(i kappa) / (k + i kappa), so pole contributions are
never sampled.

The unknown Y of (I + H) Y = -H 1 therefore lives in the direct sum of the
discrete Hardy space and the span of the rational functions 1/(k + i kappa_n).
Both :func:`solve_hankel_system` (matrix-free conjugate gradients) and
:func:`solve_hankel_dense` (dense LU in explicit coordinates) work in this
space, which makes them exactly comparable.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .exceptions import (
    GridMismatch,
    IndefiniteOperator,
    NonConvergence,
    NonSelfAdjointSymbol,
)
from .grid import (
    GridFunction,
    MomentumGrid,
    cauchy_eval,
    hardy_defect,
    l2_inner,
    riesz_project,
)

__all__ = [
    "SymbolDescriptor",
    "HankelSolveReport",
    "hankel_apply",
    "hankel_apply_one",
    "hankel_matrix",
    "solve_hankel_system",
    "solve_hankel_dense",
    "quadratic_form",
    "essential_spectrum_bound",
]

logger = logging.getLogger(__name__)

TOL_HARDY = 1e-6
RITZ_THRESHOLD = -1e-8
MAX_DENSE = 8192


@dataclass(frozen=True, eq=False)
class SymbolDescriptor:
    """Structured Hankel symbol: sampled reflection part plus pole terms.

    Parameters
    ----------
    reflection_part : GridFunction
        Samples of R_{x,t}(k); must not carry a rational part.
    poles : sequence of (c, kappa)
        Each pair encodes the term ``-i c / (k - i kappa)`` with ``c, kappa > 0``.
    x, t : float
        Space and time labels (informational).
    """

    reflection_part: GridFunction
    poles: Tuple[Tuple[float, float], ...] = field(default=())
    x: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.reflection_part.poles:
            raise ValueError("reflection_part must be a purely sampled function")
        poles = tuple((float(c), float(kappa)) for c, kappa in self.poles)
        for c, kappa in poles:
            if not (np.isfinite(c) and np.isfinite(kappa)) or c <= 0 or kappa <= 0:
                raise ValueError(f"pole weights and locations must be positive, got {(c, kappa)}")
        object.__setattr__(self, "poles", poles)

    @classmethod
    def zero(cls, grid: MomentumGrid) -> "SymbolDescriptor":
        return cls(GridFunction.zeros(grid))

    @classmethod
    def from_poles(cls, grid: MomentumGrid, poles: Iterable, x: float = 0.0, t: float = 0.0):
        return cls(GridFunction.zeros(grid), tuple(poles), x, t)

    @property
    def grid(self) -> MomentumGrid:
        return self.reflection_part.grid

    def samples(self) -> np.ndarray:
        """Full symbol sampled on the grid (for diagnostics only)."""
        k = self.grid.k
        out = np.array(self.reflection_part.values)
        for c, kappa in self.poles:
            out -= 1j * c / (k - 1j * kappa)
        return out

    def symmetry_defect(self) -> float:
        """Sup of |phi(-k) - conj(phi(k))| over the grid (pole terms are exactly symmetric)."""
        r = self.reflection_part.values
        if r.size == 0:
            return 0.0
        return float(np.max(np.abs(r[::-1] - np.conj(r)), initial=0.0))

    def is_self_adjoint(self, tol: float = 1e-8) -> bool:
        return self.symmetry_defect() <= tol


@dataclass
class HankelSolveReport:
    """Outcome of a Hankel solve.

    Attributes
    ----------
    Y : GridFunction
        The solution, in H^2(C+).
    iterations : int
    residual : float
        Relative residual ||b - (I + H) Y|| / ||b||.
    min_form_estimate : float
        Smallest Ritz value of I + H seen by the iteration (1.0 when no
        iteration was needed).
    """

    Y: GridFunction
    iterations: int
    residual: float
    min_form_estimate: float


def _check_grid(phi: SymbolDescriptor, f: GridFunction):
    if f.grid != phi.grid:
        raise GridMismatch("symbol and function live on different grids")


def _hardy_input(f: GridFunction) -> GridFunction:
    bad = [p for p, _ in f.poles if p.imag > 0]
    if bad or hardy_defect(GridFunction(f.grid, f.values)) > TOL_HARDY:
        warnings.warn(
            "hankel_apply received a function outside H^2(C+); projecting first",
            RuntimeWarning,
            stacklevel=3,
        )
        return riesz_project(f, "plus")
    return f


def _apply(phi: SymbolDescriptor, f: GridFunction) -> GridFunction:
    grid = phi.grid
    refl = phi.reflection_part.values
    if np.any(refl):
        u = riesz_project(GridFunction(grid, f.samples()), "plus").values
        w = riesz_project(GridFunction(grid, refl * u), "minus").values
        values = w[::-1]
    else:
        values = np.zeros(grid.n, dtype=complex)
    terms = []
    for c, kappa in phi.poles:
        terms.append((-1j * kappa, 1j * c * cauchy_eval(f, 1j * kappa)))
    return GridFunction(grid, values, tuple(terms))


def hankel_apply(phi: SymbolDescriptor, f: GridFunction) -> GridFunction:
    """Apply H(phi) f = J P-(phi f).

    Parameters
    ----------
    phi : SymbolDescriptor
    f : GridFunction
        Element of H^2(C+).  Inputs with a noticeable H^2(C-) component are
        projected first, with a warning.

    Returns
    -------
    GridFunction
        The image, in H^2(C+).  Pole terms contribute exact rational parts.
    """
    _check_grid(phi, f)
    return _apply(phi, _hardy_input(f))


def hankel_apply_one(phi: SymbolDescriptor) -> GridFunction:
    """The function H(phi) 1, equal to P+ conj(R_{x,t}) plus sum i c / (k + i kappa).

    The reflection contribution is computed as J P- R, which coincides with
    P+ conj(R) for symbols obeying R(-k) = conj(R(k)) and keeps this
    right-hand side consistent with :func:`hankel_apply`.
    """
    grid = phi.grid
    refl = phi.reflection_part.values
    values = riesz_project(GridFunction(grid, refl), "minus").values[::-1]
    terms = tuple((-1j * kappa, 1j * c) for c, kappa in phi.poles)
    return GridFunction(grid, values, terms)


def _hankel_sequence(grid: MomentumGrid, refl: np.ndarray, m: int) -> np.ndarray:
    # h(s) = (1/n) sum_j R_j exp(i k_j (s + 1) delta), s = 0..2m-2
    s = np.arange(1, 2 * m)
    phase = np.exp(1j * grid.k[0] * s * grid.dual_spacing)
    return phase * np.fft.ifft(refl)[s % grid.n]


def hankel_matrix(phi: SymbolDescriptor, m: int) -> np.ndarray:
    """Galerkin matrix of H(phi) on the first ``m`` discrete Hardy basis vectors.

    The basis is orthonormal, ``b_a(k) = exp(i k x_a) / sqrt(n dk)`` with
    dual nodes ``x_a = (a + 1/2) pi / k_max``.  The reflection part yields a
    genuine Hankel matrix ``M[a, b] = h(a + b)``; each pole adds the rank-one
    term ``2 pi c b_b(i kappa) conj(b_a(i kappa))``.

    Parameters
    ----------
    phi : SymbolDescriptor
    m : int
        Number of basis vectors, ``1 <= m <= n/2``.

    Returns
    -------
    ndarray, shape (m, m)
    """
    grid = phi.grid
    if m > MAX_DENSE:
        raise MemoryError(f"hankel_matrix refuses m > {MAX_DENSE} (got {m})")
    if not 0 < m <= grid.n // 2:
        raise ValueError(f"m must lie in 1..{grid.n // 2}, got {m}")
    h = _hankel_sequence(grid, phi.reflection_part.values, m)
    M = scipy.linalg.hankel(h[:m], h[m - 1 :]).astype(complex)
    if phi.poles:
        basis = grid.hardy_basis(m)
        for c, kappa in phi.poles:
            vals = (grid.dk / (2j * np.pi)) * (basis.T @ (1.0 / (grid.k - 1j * kappa)))
            M += 2 * np.pi * c * np.outer(np.conj(vals), vals)
    return M


def _ritz_min(alphas: Sequence[float], betas: Sequence[float]) -> float:
    """Smallest eigenvalue of the Lanczos matrix implied by CG coefficients."""
    j = len(alphas)
    if j == 0:
        return 1.0
    diag = np.empty(j)
    off = np.empty(max(j - 1, 0))
    for i in range(j):
        diag[i] = 1.0 / alphas[i] + (betas[i - 1] / alphas[i - 1] if i > 0 else 0.0)
        if i < j - 1:
            off[i] = np.sqrt(betas[i]) / alphas[i]
    if j == 1:
        return float(diag[0])
    return float(scipy.linalg.eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0])


def solve_hankel_system(
    phi: SymbolDescriptor, tol: float = 1e-10, maxiter: int | None = None
) -> HankelSolveReport:
    """Solve (I + H(phi)) Y = -H(phi) 1 by conjugate gradients.

    The iteration runs in the hybrid space of sampled Hardy functions plus
    exact pole terms, with the inner product of :func:`kdv_ist.grid.l2_inner`.
    I + H(phi) is self-adjoint there and positive definite under the jump
    condition, so plain CG applies.  Ritz values are tracked through the
    Lanczos connection to detect indefiniteness.

    Parameters
    ----------
    phi : SymbolDescriptor
    tol : float, default 1e-10
        Target relative residual.
    maxiter : int, optional
        Iteration cap; defaults to ``10 * sqrt(n)``.

    Returns
    -------
    HankelSolveReport

    Raises
    ------
    NonConvergence
        If the cap is reached before the residual target.
    IndefiniteOperator
        If a Ritz value of I + H falls below -1e-8.
    """
    grid = phi.grid
    if maxiter is None:
        maxiter = int(np.ceil(10 * np.sqrt(grid.n)))

    def A(v):
        return v + _apply(phi, v)

    b = -hankel_apply_one(phi)
    bnorm = np.sqrt(l2_inner(b, b).real)
    zero = GridFunction.zeros(grid)
    if bnorm == 0.0:
        return HankelSolveReport(zero, 0, 0.0, 1.0)

    x = zero
    r = b
    p = r
    rr = bnorm**2
    alphas: List[float] = []
    betas: List[float] = []
    converged = False
    for it in range(1, maxiter + 1):
        Ap = A(p)
        pAp = l2_inner(Ap, p).real
        pp = l2_inner(p, p).real
        if pAp <= RITZ_THRESHOLD * pp:
            raise IndefiniteOperator(
                f"Rayleigh quotient {pAp / pp:.3e} of I+H is negative (jump condition violated?)"
            )
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = l2_inner(r, r).real
        beta = rr_new / rr
        alphas.append(alpha)
        betas.append(beta)
        if np.sqrt(rr_new) <= tol * bnorm:
            converged = True
            break
        p = r + beta * p
        rr = rr_new

    ritz = _ritz_min(alphas, betas)
    if ritz < RITZ_THRESHOLD:
        raise IndefiniteOperator(f"Ritz value {ritz:.3e} of I+H is negative")
    res_vec = b - A(x)
    residual = float(np.sqrt(max(l2_inner(res_vec, res_vec).real, 0.0)) / bnorm)
    if not converged and residual > tol:
        raise NonConvergence(
            f"CG reached {maxiter} iterations with relative residual {residual:.3e}"
        )
    logger.debug("hankel CG: x=%g iterations=%d residual=%.2e", phi.x, it, residual)
    return HankelSolveReport(x, it, residual, ritz)


def solve_hankel_dense(phi: SymbolDescriptor) -> HankelSolveReport:
    """Direct solve of (I + H(phi)) Y = -H(phi) 1 in explicit coordinates.

    Coordinates are the n/2 discrete Hardy modes plus one coefficient per
    pole function 1/(k + i kappa).  The reflection block is the Hankel matrix
    from :func:`hankel_matrix`, assembled independently of the FFT
    projections used by the matrix-free path.  Intended as an oracle for
    grids with n up to a few thousand.
    """
    grid = phi.grid
    half = grid.n // 2
    npole = len(phi.poles)
    basis = grid.hardy_basis(half)

    def coords(f: GridFunction) -> np.ndarray:
        out = np.zeros(half + npole, dtype=complex)
        out[:half] = grid.dk * (basis.conj().T @ f.values)
        lookup = {p: a for p, a in f.poles}
        for i, (_, kappa) in enumerate(phi.poles):
            out[half + i] = lookup.get(-1j * kappa, 0.0)
        return out

    A = np.eye(half + npole, dtype=complex)
    A[:half, :half] += hankel_matrix(SymbolDescriptor(phi.reflection_part), half)
    for i, (c, kappa) in enumerate(phi.poles):
        # pole action on the modes: i c b(i kappa) times 1/(k + i kappa)
        vals = (grid.dk / (2j * np.pi)) * (basis.T @ (1.0 / (grid.k - 1j * kappa)))
        A[half + i, :half] += 1j * c * vals
    for j, (_, kappa_j) in enumerate(phi.poles):
        u = GridFunction.rational(grid, [(-1j * kappa_j, 1.0)])
        A[:, half + j] += coords(_apply(phi, u))
    rhs = -coords(hankel_apply_one(phi))
    sol = np.linalg.solve(A, rhs)
    Y = GridFunction(
        grid,
        basis @ sol[:half],
        tuple((-1j * kappa, sol[half + i]) for i, (_, kappa) in enumerate(phi.poles)),
    )
    res = np.linalg.norm(A @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
    return HankelSolveReport(Y, 0, float(res), float("nan"))


def quadratic_form(phi: SymbolDescriptor, f: GridFunction, tol: float = 1e-8) -> float:
    """The quadratic form <H(phi) f, f>, real for self-adjoint symbols.

    Raises
    ------
    NonSelfAdjointSymbol
        If the reflection part violates R(-k) = conj(R(k)) beyond ``tol``.
    """
    if not phi.is_self_adjoint(tol):
        raise NonSelfAdjointSymbol(
            f"symbol symmetry defect {phi.symmetry_defect():.3e} exceeds {tol:g}"
        )
    return l2_inner(hankel_apply(phi, f), f).real


def essential_spectrum_bound(jumps: Iterable) -> list:
    """Interval hull of the essential spectrum for a piecewise-continuous symbol.

    Parameters
    ----------
    jumps : iterable of (omega, alpha)
        Jump locations and half-sizes.

    Returns
    -------
    list of (float, float)
        ``[(-a, a)]`` with ``a = max alpha``, or ``[]`` without jumps.
    """
    alphas = []
    for _, alpha in jumps:
        if alpha < 0:
            raise ValueError("jump half-sizes must be nonnegative")
        alphas.append(float(alpha))
    if not alphas:
        return []
    a = max(alphas)
    return [(-a, a)]
