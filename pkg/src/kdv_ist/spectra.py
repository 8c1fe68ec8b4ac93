"""Validation identities and Riemann-Hilbert factorization criteria."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .exceptions import DivergentIntegrand
from .hankel import SymbolDescriptor, hankel_matrix
from .invert import assemble_symbol
from .profile import PotentialProfile
from .scatter import Jump, ScatteringData

__all__ = [
    "ValidationReport",
    "trace_formula_residual",
    "unitarity_check",
    "positivity_certificate",
    "jump_condition_check",
    "jump_matrix",
    "jump_matrix_value",
    "factorization_exists",
    "validate",
]

JUMP_MARGIN = 1e-6
POSITIVITY_MARGIN = 1e-6


@dataclass
class ValidationReport:
    """Aggregated validation results for one potential and its scattering data."""

    unitarity_residual: float
    trace_lhs: float
    trace_rhs: float
    trace_rel_error: float
    jump_condition_ok: bool
    min_eig_IplusH: float
    factorization_exists: bool
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _alpha(j) -> float:
    if isinstance(j, Jump):
        return j.alpha
    if np.isscalar(j):
        return float(j)
    return float(j[-1])


def _omega(j) -> float:
    if isinstance(j, Jump):
        return j.omega
    return float(j[0])


def _jump_mask(k: np.ndarray, jumps, width: int) -> np.ndarray:
    """Boolean mask of nodes within ``width`` nodes of +-omega for every jump."""
    mask = np.zeros(k.size, dtype=bool)
    for j in jumps:
        w = _omega(j)
        for center in (w, -w):
            idx = np.searchsorted(k, center)
            mask[max(0, idx - width):min(k.size, idx + width)] = True
    return mask


def _tail_integral(q: PotentialProfile) -> float:
    """Estimate of int q^2 beyond the box assuming q ~ a(x)/x with bounded a.

    The mean of (x q)^2 over the outer 10% of each side gives the coefficient
    of the 1/|x| tail integral; short-range potentials give (numerically) zero.
    """
    x, qv = q.x_grid, q.q
    span = q.x_max - q.x_min
    total = 0.0
    if q.x_max > 0:
        right = x >= q.x_max - 0.1 * span
        total += np.mean((x[right] * qv[right]) ** 2) / q.x_max
    if q.x_min < 0:
        left = x <= q.x_min + 0.1 * span
        total += np.mean((x[left] * qv[left]) ** 2) / abs(q.x_min)
    return float(total)


def _log_fill(k, integrand, targets, anchors, center):
    u = np.log(np.abs(k[list(anchors)] - center))
    v = integrand[list(anchors)]
    if u[1] == u[0]:
        integrand[targets] = v.mean()
        return
    slope = (v[1] - v[0]) / (u[1] - u[0])
    dist = np.maximum(np.abs(k[targets] - center), 1e-300)
    integrand[targets] = v[0] + slope * (np.log(dist) - u[0])


def trace_formula_residual(q: PotentialProfile, S: ScatteringData, exclude: int = 3,
                           tail: bool = True):
    """Both sides of the second Zakharov-Faddeev trace formula.

    lhs = (2 pi / 3) sum kappa_n^3 + int_0^inf k^2 log(1 / (1 - |R|^2)) dk,
    rhs = (pi / 8) int q^2 dx.

    The momentum integral is evaluated as half the midpoint sum over the
    full symmetric grid.  Near a jump the integrand has a logarithmic
    singularity, so nodes within ``exclude`` nodes of each declared jump
    +-omega_j are replaced by the fit a + b log|k - omega| through the two
    nearest kept nodes on the same side.

    Parameters
    ----------
    q : PotentialProfile
    S : ScatteringData
    exclude : int, default 3
    tail : bool, default True
        Add the estimated contribution of q^2 beyond the sampled box.

    Returns
    -------
    lhs, rhs, rel_error : float

    Raises
    ------
    DivergentIntegrand
        If |R| = 1 on three or more nodes away from declared jumps.
    """
    grid = S.grid
    k = grid.k
    R2 = np.abs(S.reflection.values) ** 2
    gap = 1.0 - R2
    masked = _jump_mask(k, S.jumps, exclude)
    bad = (gap <= 1e-15) & ~masked
    if np.count_nonzero(bad) >= 3:
        raise DivergentIntegrand(
            f"|R| = 1 on {np.count_nonzero(bad)} nodes away from declared jumps"
        )
    with np.errstate(divide="ignore"):
        integrand = k**2 * -np.log(np.where(gap > 1e-15, gap, 1.0))
    # isolated saturated nodes: replace by the mean of their neighbours
    for i in np.where(bad)[0]:
        nb = [j for j in (i - 1, i + 1) if 0 <= j < k.size and not bad[j]]
        integrand[i] = np.mean(integrand[nb]) if nb else 0.0
    for j in S.jumps:
        w = _omega(j)
        for center in (w, -w):
            idx = np.searchsorted(k, center)
            left = np.arange(max(0, idx - exclude), idx)
            right = np.arange(idx, min(k.size, idx + exclude))
            if left.size and left[0] >= 2:
                _log_fill(k, integrand, left, (left[0] - 2, left[0] - 1), center)
            if right.size and right[-1] + 2 < k.size:
                _log_fill(k, integrand, right, (right[-1] + 1, right[-1] + 2), center)
    # the even integrand over the real line counts each half once
    lhs = 2.0 * np.pi / 3.0 * sum(b.kappa**3 for b in S.bound_states) + 0.5 * grid.dk * integrand.sum()
    q2 = simpson(q.q**2, x=q.x_grid)
    if tail:
        q2 += _tail_integral(q)
    rhs = np.pi / 8.0 * q2
    rel = abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)
    if lhs == rhs:
        rel = 0.0
    return float(lhs), float(rhs), float(rel)


def unitarity_check(S: ScatteringData, exclude: int = 3) -> float:
    """max | |T|^2 + |R|^2 - 1 | over continuity nodes.

    Excludes the k-floor band (``S.meta['k_floor']``) and ``exclude`` nodes
    around each declared jump.
    """
    if S.transmission is None:
        raise ValueError("transmission coefficient is required")
    k = S.grid.k
    keep = np.abs(k) >= S.meta.get("k_floor", 0.0)
    keep &= ~_jump_mask(k, S.jumps, exclude)
    dev = np.abs(np.abs(S.transmission.values) ** 2 + np.abs(S.reflection.values) ** 2 - 1.0)
    return float(np.max(dev[keep], initial=0.0))


def positivity_certificate(phi: SymbolDescriptor, m: Optional[int] = None) -> float:
    """Smallest eigenvalue of I + hankel_matrix(phi, m).

    The certificate passes when the value is at least 1e-6.
    ``m`` defaults to min(n/2, 1024).
    """
    if m is None:
        m = min(phi.grid.n // 2, 1024)
    M = hankel_matrix(phi, m)
    M = 0.5 * (M + M.conj().T)
    return float(np.linalg.eigvalsh(np.eye(m) + M)[0])


def jump_condition_check(jumps: Iterable) -> bool:
    """True iff every jump half-size alpha is below 1 - 1e-6.

    Accepts :class:`~kdv_ist.scatter.Jump` objects, tuples ending in alpha,
    or bare alpha values.
    """
    return all(_alpha(j) < 1.0 - JUMP_MARGIN for j in jumps)


def jump_matrix_value(r_xt: complex) -> np.ndarray:
    """Jump matrix [[1 - |r|^2, -conj(r)], [r, 1]] for a value r of R_{x,t}."""
    r = complex(r_xt)
    return np.array([[1.0 - abs(r) ** 2, -np.conj(r)], [r, 1.0]], dtype=complex)


def jump_matrix(S: ScatteringData, x: float, t: float, k: float):
    """Jump matrix of the Riemann-Hilbert problem at a real momentum k.

    R is interpolated linearly between grid nodes and modulated to
    R_{x,t}(k) = R(k) exp(8 i k^3 t + 2 i k x).

    Returns
    -------
    V : ndarray, shape (2, 2)
    det : complex
        det V, equal to 1 in exact arithmetic.
    """
    grid = S.grid
    vals = S.reflection.values
    r = np.interp(k, grid.k, vals.real) + 1j * np.interp(k, grid.k, vals.imag)
    r_xt = r * np.exp(1j * (8.0 * k**3 * t + 2.0 * k * x))
    V = jump_matrix_value(r_xt)
    return V, complex(V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0])


def factorization_exists(S: ScatteringData) -> bool:
    """Existence criterion for the canonical factorization of the jump matrix.

    True iff |R| <= 1, |R| < 1 somewhere on the grid, and every jump
    half-size is below one.
    """
    mod = np.abs(S.reflection.values)
    if np.any(mod > 1.0 + 1e-8) or not np.any(mod < 1.0 - 1e-12):
        return False
    return jump_condition_check(S.jumps)


def validate(q: Optional[PotentialProfile], S: ScatteringData,
             xs: Sequence[float] = (-1.0, 0.0, 1.0), ts: Sequence[float] = (0.0, 0.1),
             m: Optional[int] = None) -> ValidationReport:
    """Run all validation identities and collect them in a report.

    The positivity certificate is the minimum over the (x, t) pairs in
    ``xs`` x ``ts``.  The trace formula is skipped (NaN) when ``q`` is None.
    """
    notes = []
    unit = unitarity_check(S) if S.transmission is not None else float("nan")
    if q is not None:
        lhs, rhs, rel = trace_formula_residual(q, S)
    else:
        lhs = rhs = rel = float("nan")
        notes.append("trace formula skipped: no potential samples")
    jc = jump_condition_check(S.jumps)
    eig = min(positivity_certificate(assemble_symbol(S, x, t), m) for x in xs for t in ts)
    fac = factorization_exists(S)
    if fac != (eig > POSITIVITY_MARGIN):
        notes.append(
            f"factorization criterion ({fac}) and eigenvalue diagnostic (min eig {eig:.3e}) disagree"
        )
    if S.jumps:
        notes.append("jumps: " + ", ".join(f"omega={j.omega:.6g} alpha={j.alpha:.6g}" for j in S.jumps))
    return ValidationReport(unit, lhs, rhs, rel, jc, eig, fac, notes)
