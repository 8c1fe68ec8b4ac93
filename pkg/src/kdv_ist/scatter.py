"""Direct scattering: Jost solutions, T and R, bound states, norming constants, jumps.

Normalized Jost solutions y+-(x, k) = exp(-+ i k x) psi+-(x, k) solve

    y'' + 2 i k y' = q y     (y+, integrated leftward from x_max with y = 1, y' = 0)
    y'' - 2 i k y' = q y     (y-, integrated rightward from x_min with y = 1, y' = 0)

with an adaptive embedded Runge-Kutta scheme (scipy's DOP853), vectorized
over momenta.  Long boxes with oscillatory tails can instead use a
fixed-step fourth-order Magnus integrator that propagates exp(+-ikx)
exactly, so its cost does not grow with |k|.  Scattering coefficients follow
from Wronskians at a matching point x_c:

    W(psi-, psi+) = y- y+' - y-' y+ + 2 i k y- y+,   T = 2 i k / W,
    R = exp(-2 i k x_c) (conj(y+) y-' - conj(y+') y-) / W.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .exceptions import (
    NearZeroMomentum,
    NotABoundState,
    StiffFailure,
    TailTooShort,
    UnresolvedJump,
)
from .grid import GridFunction, MomentumGrid
from .profile import PotentialProfile

__all__ = [
    "JostField",
    "BoundState",
    "Jump",
    "ScatteringData",
    "jost_solve",
    "scattering_coefficients",
    "transmission_reflection",
    "find_bound_states",
    "norming_constant",
    "bound_state_data",
    "transmission_residue",
    "detect_jumps",
    "scatter",
]

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
KAPPA_FLOOR = 1e-3
K_FLOOR_FRACTION = 0.05


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class JostField:
    """Normalized Jost solutions on a spatial grid for one momentum.

    Attributes
    ----------
    x_grid : ndarray
    k : complex
    y_plus, y_minus : ndarray or None
        y+-(x, k) on ``x_grid`` (None if that side was not requested).
    dy_plus, dy_minus : ndarray or None
        x-derivatives of y+-.
    wronskian : complex or None
        W(psi-, psi+), available when both sides were solved.
    """

    x_grid: np.ndarray
    k: complex
    y_plus: Optional[np.ndarray] = None
    y_minus: Optional[np.ndarray] = None
    dy_plus: Optional[np.ndarray] = None
    dy_minus: Optional[np.ndarray] = None
    wronskian: Optional[complex] = None

    def wronskian_profile(self) -> np.ndarray:
        """W(psi-, psi+) evaluated at every grid point (constant in exact arithmetic)."""
        if self.y_plus is None or self.y_minus is None:
            raise ValueError("both Jost solutions are needed for the Wronskian")
        k = self.k
        return (
            self.y_minus * self.dy_plus
            - self.dy_minus * self.y_plus
            + 2j * k * self.y_minus * self.y_plus
        )

    def psi_plus(self) -> np.ndarray:
        return np.exp(1j * self.k * self.x_grid) * self.y_plus

    def psi_minus(self) -> np.ndarray:
        return np.exp(-1j * self.k * self.x_grid) * self.y_minus


@dataclass(frozen=True)
class BoundState:
    """Bound state -kappa^2 with norming constant c."""

    kappa: float
    c: float

    def __iter__(self):
        return iter((self.kappa, self.c))


@dataclass(frozen=True)
class Jump:
    """Detected jump of R at +-omega.

    Attributes
    ----------
    omega : float
        Jump location (positive; the mirror point -omega is implied).
    gamma : float
        arcsin(alpha) / pi.
    sign_a : int
        Estimated sign of the WvN amplitude A.
    alpha : float
        Half-size of the jump, |R(omega+0) - R(omega-0)| / 2.
    left, right : complex
        One-sided limits R(omega - 0), R(omega + 0).
    """

    omega: float
    gamma: float
    sign_a: int
    alpha: float
    left: complex = complex("nan")
    right: complex = complex("nan")

    def __iter__(self):
        return iter((self.omega, self.gamma, self.sign_a, self.alpha))


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Scattering data: reflection coefficient, bound states, jumps, transmission.

    Parameters
    ----------
    reflection : GridFunction
        R(k) on the momentum grid.
    bound_states : sequence of BoundState or (kappa, c)
    jumps : sequence of Jump
    transmission : GridFunction, optional
    meta : dict
        Diagnostics (``k_floor``, unitarity residual, ...).
    """

    reflection: GridFunction
    bound_states: Tuple[BoundState, ...] = ()
    jumps: Tuple[Jump, ...] = ()
    transmission: Optional[GridFunction] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.reflection.poles:
            raise ValueError("reflection must be purely sampled")
        if np.max(np.abs(self.reflection.values), initial=0.0) > 1.0 + 1e-8:
            raise ValueError("|R| exceeds 1")
        bs = tuple(b if isinstance(b, BoundState) else BoundState(float(b[0]), float(b[1]))
                   for b in self.bound_states)
        for b in bs:
            if not (b.kappa > 0 and b.c > 0 and np.isfinite(b.kappa) and np.isfinite(b.c)):
                raise ValueError(f"invalid bound state {b}")
        object.__setattr__(self, "bound_states", bs)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if self.transmission is not None and self.transmission.grid != self.reflection.grid:
            raise ValueError("reflection and transmission grids differ")

    @property
    def grid(self) -> MomentumGrid:
        return self.reflection.grid

    @classmethod
    def trivial(cls, grid: MomentumGrid) -> "ScatteringData":
        return cls(GridFunction.zeros(grid), transmission=GridFunction(grid, np.ones(grid.n)))

    def replace(self, **changes) -> "ScatteringData":
        kw = dict(
            reflection=self.reflection,
            bound_states=self.bound_states,
            jumps=self.jumps,
            transmission=self.transmission,
            meta=dict(self.meta),
        )
        kw.update(changes)
        return ScatteringData(**kw)


# ---------------------------------------------------------------------------
# ODE core


def _integrate(qfun, ks, x_from, x_to, side, x_eval=None, rtol=RTOL, atol=ATOL,
               boundary=None):
    """Integrate the normalized Jost equation for all ``ks`` at once.

    Returns (y, dy) with shape (len(x_eval), len(ks)); when ``x_eval`` is None
    only the end point ``x_to`` is returned.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    nk = ks.size
    s = 1.0 if side == "plus" else -1.0
    coef = s * 2j * ks

    def rhs(x, u):
        y = u[:nk]
        z = u[nk:]
        return np.concatenate([z, qfun(x) * y - coef * z])

    if boundary is None:
        u0 = np.concatenate([np.ones(nk, dtype=complex), np.zeros(nk, dtype=complex)])
    else:
        y0, dy0 = boundary
        u0 = np.concatenate([np.broadcast_to(y0, (nk,)), np.broadcast_to(dy0, (nk,))]).astype(complex)
    t_eval = None
    if x_eval is not None:
        t_eval = np.asarray(x_eval, dtype=float)
        if x_to < x_from:
            t_eval = t_eval[::-1]
    sol = solve_ivp(rhs, (x_from, x_to), u0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=t_eval)
    if sol.status != 0:
        raise StiffFailure(f"ODE integration failed: {sol.message}")
    ys = sol.y
    if x_eval is None:
        return ys[:nk, -1], ys[nk:, -1]
    y = ys[:nk].T
    dy = ys[nk:].T
    if x_to < x_from:
        y = y[::-1]
        dy = dy[::-1]
    return y, dy


def _pairwise_product(m00, m01, m10, m11):
    # ordered product M[-1] @ ... @ M[0] along axis 0 by pairwise reduction
    while m00.shape[0] > 1:
        if m00.shape[0] % 2:
            one = np.ones((1,) + m00.shape[1:], dtype=m00.dtype)
            zero = np.zeros_like(one)
            m00, m01, m10, m11 = (np.concatenate([a, b]) for a, b in
                                  ((m00, one), (m01, zero), (m10, zero), (m11, one)))
        a00, a01, a10, a11 = m00[0::2], m01[0::2], m10[0::2], m11[0::2]
        b00, b01, b10, b11 = m00[1::2], m01[1::2], m10[1::2], m11[1::2]
        m00, m01, m10, m11 = (b00 * a00 + b01 * a10, b00 * a01 + b01 * a11,
                              b10 * a00 + b11 * a10, b10 * a01 + b11 * a11)
    return m00[0], m01[0], m10[0], m11[0]


def _magnus(qfun, ks, x_from, x_to, side, step=0.05, block=2**13):
    """Fourth-order Magnus propagation of the Jost equation over a fixed step.

    Each step applies exp(Omega) for psi' = A psi with A = [[0, 1], [q - k^2, 0]],
    Omega the two-point Gauss-Legendre Magnus approximant.  The exponential
    of the traceless 2x2 matrix is taken in closed form, so the oscillation
    exp(+-i k x) is propagated exactly and the step is limited only by the
    smoothness of q.  Step matrices are built for blocks of about ``block``
    (step, momentum) pairs at once and multiplied by pairwise reduction.
    Returns (y, dy) at ``x_to``.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    s = 1.0 if side == "plus" else -1.0
    nsteps = max(1, int(np.ceil(abs(x_to - x_from) / step)))
    h = (x_to - x_from) / nsteps
    g = np.sqrt(3.0) / 6.0
    xs = x_from + h * np.arange(nsteps)
    q1 = np.asarray(qfun(xs + (0.5 - g) * h), dtype=float) * np.ones(nsteps)
    q2 = np.asarray(qfun(xs + (0.5 + g) * h), dtype=float) * np.ones(nsteps)
    k2 = ks * ks
    c = np.sqrt(3.0) * h * h / 12.0
    phase = np.exp(-1j * s * ks * h)
    u0 = np.ones_like(ks)
    u1 = 1j * s * ks
    per = max(1, block // ks.size)
    for start in range(0, nsteps, per):
        a1 = q1[start:start + per, None] - k2
        a2 = q2[start:start + per, None] - k2
        d = c * (a1 - a2)
        lower = 0.5 * h * (a1 + a2)
        r = np.sqrt(d * d + h * lower)
        # cosh and sinh(r)/r share one exponential; both are even in r
        r = np.where(r.real < 0, -r, r)
        e = np.exp(r)
        ei = 1.0 / e
        small = np.abs(r) < 1e-4
        sh = np.where(small, 1.0 + r * r / 6.0, 0.5 * (e - ei) / np.where(small, 1.0, r)) * phase
        ch = 0.5 * (e + ei) * phase
        m00, m01, m10, m11 = _pairwise_product(ch + sh * d, sh * h, sh * lower, ch - sh * d)
        u0, u1 = m00 * u0 + m01 * u1, m10 * u0 + m11 * u1
    return u0, u1 - 1j * s * ks * u0


def _match_point(q: PotentialProfile) -> float:
    return float(np.clip(0.0, q.x_min, q.x_max))


def _propagate(qfun, ks, x_from, x_to, side, method, rtol, atol, step):
    if method == "rk":
        return _integrate(qfun, ks, x_from, x_to, side, rtol=rtol, atol=atol)
    if method == "magnus":
        return _magnus(qfun, ks, x_from, x_to, side, step)
    raise ValueError(f"unknown ODE method {method!r}")


def _tail_residual(qfun, ks, q: PotentialProfile, side, rtol=RTOL, atol=ATOL,
                   method="rk", step=0.05):
    # |y - 1| after crossing the outer 5% of the box from the starting end
    span = q.x_max - q.x_min
    if side == "plus":
        y, _ = _propagate(qfun, ks, q.x_max, q.x_max - 0.05 * span, "plus", method, rtol, atol, step)
    else:
        y, _ = _propagate(qfun, ks, q.x_min, q.x_min + 0.05 * span, "minus", method, rtol, atol, step)
    return np.abs(y - 1.0)


def jost_solve(
    q: PotentialProfile,
    k: complex,
    side: str = "both",
    tail_tol: Optional[float] = 1e-3,
    boundary: Optional[dict] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> JostField:
    """Normalized Jost solutions on the grid of ``q`` for a single momentum.

    Parameters
    ----------
    q : PotentialProfile
    k : complex
        Momentum, Im k >= 0 and k != 0.
    side : {'plus', 'minus', 'both'}
    tail_tol : float or None, default 1e-3
        Limit on the boundary residual |y - 1| after crossing the outer 5%
        of the box.  ``None`` disables the check.
    boundary : dict, optional
        Override of the starting data, ``{'plus': (y, dy), 'minus': (y, dy)}``,
        for potentials whose Jost solutions are known at the box edge.

    Returns
    -------
    JostField

    Raises
    ------
    StiffFailure, TailTooShort
    """
    k = complex(k)
    if k == 0:
        raise NearZeroMomentum("k = 0 is not admissible")
    if k.imag < 0:
        raise ValueError("Jost solutions are computed for Im k >= 0")
    if side not in ("plus", "minus", "both"):
        raise ValueError("side must be 'plus', 'minus' or 'both'")
    boundary = boundary or {}
    qfun = q.evaluator()
    x = q.x_grid
    out = {}
    for s in ("plus", "minus"):
        if side not in (s, "both"):
            continue
        if tail_tol is not None and s not in boundary:
            res = float(_tail_residual(qfun, [k], q, s, rtol, atol)[0])
            if res > tail_tol:
                raise TailTooShort(
                    f"boundary residual {res:.2e} on the {s} side exceeds {tail_tol:g}; "
                    "enlarge the x-domain"
                )
        start, stop = (q.x_max, q.x_min) if s == "plus" else (q.x_min, q.x_max)
        y, dy = _integrate(qfun, [k], start, stop, s, x_eval=x, rtol=rtol, atol=atol,
                           boundary=boundary.get(s))
        out[s] = (y[:, 0], dy[:, 0])
    yp, dyp = out.get("plus", (None, None))
    ym, dym = out.get("minus", (None, None))
    w = None
    if yp is not None and ym is not None:
        i = int(np.argmin(np.abs(x - _match_point(q))))
        w = complex(ym[i] * dyp[i] - dym[i] * yp[i] + 2j * k * ym[i] * yp[i])
    return JostField(x, k, yp, ym, dyp, dym, w)


def _coefficients_chunk(qfun, ks, q, xc, tail_tol, rtol, atol, method, step):
    yp, dyp = _propagate(qfun, ks, q.x_max, xc, "plus", method, rtol, atol, step)
    ym, dym = _propagate(qfun, ks, q.x_min, xc, "minus", method, rtol, atol, step)
    W = ym * dyp - dym * yp + 2j * ks * ym * yp
    T = 2j * ks / W
    R = np.exp(-2j * ks * xc) * (np.conj(yp) * dym - np.conj(dyp) * ym) / W
    tail = np.zeros(ks.size)
    if tail_tol is not None:
        tail = np.maximum(_tail_residual(qfun, ks, q, "plus", rtol, atol, method, step),
                          _tail_residual(qfun, ks, q, "minus", rtol, atol, method, step))
    return T, R, tail


def scattering_coefficients(
    q: PotentialProfile,
    k,
    k_floor: float = 0.0,
    tail_tol: Optional[float] = 1e-3,
    chunk: Optional[int] = None,
    n_jobs: int = 1,
    rtol: float = RTOL,
    atol: float = ATOL,
    method: str = "rk",
    step: float = 0.05,
):
    """T(k) and R(k) for real momenta ``k``.

    Momenta are grouped by magnitude into chunks that share one vectorized
    ODE solve; chunks may run on ``n_jobs`` threads.  ``chunk`` defaults to
    128 for ``'rk'`` and to an even split over ``n_jobs`` for ``'magnus'``,
    whose fixed step makes large batches cheap.

    ``method='rk'`` uses adaptive DOP853 with tolerances ``rtol``/``atol``.
    ``method='magnus'`` uses a fixed-step fourth-order Magnus scheme with
    step ``step``; its cost does not grow with |k|, which pays off on the
    long boxes needed for oscillatory tails.

    Returns
    -------
    T, R, tail : ndarray
        Transmission, reflection and boundary residual per momentum.

    Raises
    ------
    NearZeroMomentum
        If some |k| < k_floor (or k = 0).
    TailTooShort
        If some boundary residual exceeds ``tail_tol``.
    """
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) < max(k_floor, 0.0)) or np.any(k == 0):
        raise NearZeroMomentum(f"momenta inside the excluded band |k| < {k_floor:g}")
    qfun = q.evaluator()
    xc = _match_point(q)
    order = np.argsort(np.abs(k))
    if chunk is None:
        chunk = 128 if method == "rk" else max(1, -(-k.size // max(n_jobs, 1)))
    groups = [order[i:i + chunk] for i in range(0, k.size, chunk)]
    T = np.empty(k.size, dtype=complex)
    R = np.empty(k.size, dtype=complex)
    tail = np.empty(k.size)

    def work(idx):
        return idx, _coefficients_chunk(qfun, k[idx].astype(complex), q, xc, tail_tol, rtol,
                                        atol, method, step)

    if n_jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, groups))
    else:
        results = [work(g) for g in groups]
    for idx, (t_, r_, tl) in results:
        T[idx], R[idx], tail[idx] = t_, r_, tl
    if tail_tol is not None and np.any(tail > tail_tol):
        worst = float(k[np.argmax(tail)])
        raise TailTooShort(
            f"boundary residual {tail.max():.2e} at k = {worst:.4g} exceeds {tail_tol:g}; "
            "enlarge the x-domain or relax tail_tol"
        )
    return T, R, tail


def _fill_floor(k_all, values, computed, nfit=4):
    """Fill the band around k = 0 from the nearest computed positive nodes.

    Real part is fitted as a + b k^2 and imaginary part as c k, consistent
    with f(-k) = conj(f(k)).
    """
    pos = np.where(computed & (k_all > 0))[0]
    band = np.where(~computed)[0]
    if band.size == 0:
        return values
    if pos.size < 2:
        raise NearZeroMomentum("not enough nodes outside the k-floor to extrapolate")
    use = pos[np.argsort(k_all[pos])[:nfit]]
    kk = k_all[use]
    v = values[use]
    a, b = np.linalg.lstsq(np.column_stack([np.ones_like(kk), kk**2]), v.real, rcond=None)[0]
    c = np.linalg.lstsq(kk[:, None], v.imag, rcond=None)[0][0]
    kb = k_all[band]
    values = values.copy()
    values[band] = a + b * kb**2 + 1j * c * kb
    return values


def transmission_reflection(
    q: PotentialProfile,
    grid: MomentumGrid,
    k_floor: Optional[float] = None,
    tail_tol: Optional[float] = 1e-3,
    mirror: bool = True,
    chunk: Optional[int] = None,
    n_jobs: int = 1,
    rtol: float = RTOL,
    atol: float = ATOL,
    method: str = "rk",
    step: float = 0.05,
) -> ScatteringData:
    """Sample T and R on the momentum grid.

    Parameters
    ----------
    q : PotentialProfile
    grid : MomentumGrid
    k_floor : float, optional
        Half-width of the excluded band around k = 0, filled by one-sided
        extrapolation.  Defaults to ``0.05 * k_max``.
    tail_tol : float or None
        Boundary-residual limit (see :func:`jost_solve`).
    mirror : bool, default True
        Solve only for k > 0 and use R(-k) = conj(R(k)), T(-k) = conj(T(k)),
        exact for real q.  With ``False`` both halves are integrated.
    method, step
        ODE scheme, see :func:`scattering_coefficients`.

    Returns
    -------
    ScatteringData
        With reflection and transmission filled, no bound states or jumps.
        ``meta`` holds ``k_floor``, ``unitarity_residual`` and ``tail_residual``.
    """
    if k_floor is None:
        k_floor = K_FLOOR_FRACTION * grid.k_max
    k = grid.k
    computed = np.abs(k) >= k_floor
    solve_idx = np.where(computed & (k > 0))[0] if mirror else np.where(computed)[0]
    T_s, R_s, tail = scattering_coefficients(
        q, k[solve_idx], tail_tol=tail_tol, chunk=chunk, n_jobs=n_jobs, rtol=rtol, atol=atol,
        method=method, step=step,
    )
    T = np.zeros(grid.n, dtype=complex)
    R = np.zeros(grid.n, dtype=complex)
    T[solve_idx] = T_s
    R[solve_idx] = R_s
    if mirror:
        # midpoint grid: node j mirrors node n-1-j
        neg = grid.n - 1 - solve_idx
        T[neg] = np.conj(T_s)
        R[neg] = np.conj(R_s)
    T = _fill_floor(k, T, computed)
    R = _fill_floor(k, R, computed)
    mod = np.abs(R)
    R = np.where(mod > 1.0, R / np.maximum(mod, 1e-300), R)
    unit = np.abs(np.abs(T[computed]) ** 2 + np.abs(R[computed]) ** 2 - 1.0)
    meta = {
        "k_floor": float(k_floor),
        "unitarity_residual": float(unit.max(initial=0.0)),
        "tail_residual": float(tail.max(initial=0.0)),
        "x_range": [q.x_min, q.x_max],
    }
    return ScatteringData(GridFunction(grid, R), transmission=GridFunction(grid, T), meta=meta)


# ---------------------------------------------------------------------------
# bound states


def _wronskian_imag_axis(qfun, q, kappas, rtol=RTOL, atol=ATOL, method="rk", step=0.05):
    ks = 1j * np.atleast_1d(np.asarray(kappas, dtype=float))
    xc = _match_point(q)
    yp, dyp = _propagate(qfun, ks, q.x_max, xc, "plus", method, rtol, atol, step)
    ym, dym = _propagate(qfun, ks, q.x_min, xc, "minus", method, rtol, atol, step)
    W = ym * dyp - dym * yp + 2j * ks * ym * yp
    scale = np.abs(ym * dyp) + np.abs(dym * yp) + np.abs(2 * ks * ym * yp)
    return W.real, scale


def find_bound_states(
    q: PotentialProfile,
    kappa_max: float,
    kappa_floor: float = KAPPA_FLOOR,
    n_scan: int = 400,
    xtol: float = 1e-12,
    method: str = "rk",
    step: float = 0.05,
) -> List[float]:
    """Zeros iκ of W(psi-, psi+) on the positive imaginary axis.

    The real Wronskian is scanned on a mixed geometric/linear grid of
    ``n_scan`` points in (kappa_floor, kappa_max]; each sign change is refined
    by Brent's method.  ``method`` and ``step`` select the ODE scheme as in
    :func:`scattering_coefficients`; Magnus refinement uses ``step / 4``.

    Returns
    -------
    list of float
        Bound-state kappas in increasing order (possibly empty).
    """
    if kappa_max <= kappa_floor:
        return []
    qfun = q.evaluator()
    half = n_scan // 2
    scan = np.unique(np.concatenate([
        np.geomspace(kappa_floor, kappa_max, half),
        np.linspace(kappa_floor, kappa_max, n_scan - half),
    ]))
    W, _ = _wronskian_imag_axis(qfun, q, scan, method=method, step=step)
    roots = []
    for i in np.where(np.sign(W[:-1]) * np.sign(W[1:]) < 0)[0]:
        # single-momentum solves are cheap, so refine on a finer Magnus step
        f = lambda s: float(_wronskian_imag_axis(qfun, q, [s], method=method, step=step / 4)[0][0])
        roots.append(brentq(f, scan[i], scan[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    roots += [float(s) for s in scan[W == 0.0]]
    return sorted(roots)


def bound_state_data(q: PotentialProfile, kappa: float, tol: float = 1e-6,
                     rtol: float = RTOL, atol: float = ATOL) -> Tuple[float, float]:
    """Norming constant c and proportionality factor mu (psi+ = mu psi-) at iκ.

    The integral of psi+^2 is accumulated alongside the ODE on each side of
    the matching point, plus analytic tails exp(-2 kappa |x|)/(2 kappa)
    beyond the box.

    Raises
    ------
    NotABoundState
        If the relative Wronskian at iκ exceeds ``tol``.
    """
    if not kappa > 0:
        raise NotABoundState("kappa must be positive")
    qfun = q.evaluator()
    xc = _match_point(q)

    def side_solve(start, sign):
        # sign = +1: psi = exp(-kappa x) y+, integrate leftward; accumulate int psi^2
        def rhs(x, u):
            y, dy, _ = u
            return [dy, qfun(x) * y + sign * 2.0 * kappa * dy,
                    -sign * np.exp(-2.0 * sign * kappa * x) * y * y]

        sol = solve_ivp(rhs, (start, xc), [1.0, 0.0, 0.0], method="DOP853", rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffFailure(sol.message)
        return sol.y[:, -1]

    yp, dyp, ip = side_solve(q.x_max, 1.0)
    ym, dym, im = side_solve(q.x_min, -1.0)
    # Cauchy data (psi, psi') of both solutions at the matching point
    ep, em = np.exp(-kappa * xc), np.exp(kappa * xc)
    plus = np.array([ep * yp, ep * (dyp - kappa * yp)])
    minus = np.array([em * ym, em * (dym + kappa * ym)])
    W = minus[0] * plus[1] - minus[1] * plus[0]
    scale = np.linalg.norm(plus) * np.linalg.norm(minus)
    if abs(W) > tol * scale:
        raise NotABoundState(f"relative Wronskian {abs(W) / scale:.2e} at i*{kappa:g}")
    norm_plus = ip + np.exp(-2.0 * kappa * q.x_max) / (2.0 * kappa)
    norm_minus = im + np.exp(2.0 * kappa * q.x_min) / (2.0 * kappa)
    mu = float(plus @ minus / (minus @ minus))
    total = norm_plus + mu**2 * norm_minus
    return float(1.0 / total), float(mu)


def norming_constant(q: PotentialProfile, kappa: float, tol: float = 1e-6) -> float:
    """Norming constant c = ||psi+(., iκ)||_2^{-2}."""
    return bound_state_data(q, kappa, tol)[0]


def transmission_residue(q: PotentialProfile, kappa: float, radius: Optional[float] = None,
                         m: int = 32) -> complex:
    """Residue of T at iκ by trapezoidal quadrature on a small circle."""
    if radius is None:
        radius = min(0.5 * kappa, 0.25)
    theta = 2 * np.pi * np.arange(m) / m
    ks = 1j * kappa + radius * np.exp(1j * theta)
    qfun = q.evaluator()
    xc = _match_point(q)
    yp, dyp = _integrate(qfun, ks, q.x_max, xc, "plus")
    ym, dym = _integrate(qfun, ks, q.x_min, xc, "minus")
    W = ym * dyp - dym * yp + 2j * ks * ym * yp
    T = 2j * ks / W
    return complex(radius * np.mean(T * np.exp(1j * theta)))


# ---------------------------------------------------------------------------
# resonance jumps


def _one_sided_limit(d: np.ndarray, v: np.ndarray) -> complex:
    V = np.column_stack([np.ones_like(d), d])
    return complex(np.linalg.lstsq(V, v, rcond=None)[0][0])


def detect_jumps(
    R: GridFunction,
    threshold: float = 10.0,
    window: int = 5,
    fit: int = 8,
    skip: int = 0,
    min_jump: float = 1e-2,
    stab_tol: Optional[float] = 0.05,
    k_floor: float = 0.0,
) -> List[Jump]:
    """Locate jump discontinuities of R on k > 0 and estimate their size.

    A jump is flagged between consecutive nodes when the increment exceeds
    ``threshold`` times the median increment over ``window`` samples on each
    side and also exceeds ``min_jump``.  One-sided limits R(omega -+ 0) come
    from linear least-squares fits in the distance to omega over ``fit``
    samples per side (after skipping ``skip`` nearest samples), and are
    checked against fits over about half as many samples.

    Returns
    -------
    list of Jump

    Raises
    ------
    UnresolvedJump
        If the two fit lengths disagree by more than ``stab_tol``.
    """
    grid = R.grid
    k = grid.k
    vals = R.values
    pos = np.where(k > max(k_floor, 0.0))[0]
    if pos.size < 2 * (fit + skip) + 2:
        return []
    inc = np.abs(np.diff(vals[pos]))
    jumps = []
    flagged = []
    for i in range(inc.size):
        lo, hi = max(0, i - window), min(inc.size, i + window + 1)
        neigh = np.concatenate([inc[lo:max(lo, i - 1)], inc[min(hi, i + 2):hi]])
        if neigh.size == 0:
            continue
        if inc[i] > min_jump and inc[i] > threshold * np.median(neigh):
            flagged.append(i)
    # keep the largest increment per cluster of adjacent flags
    clusters: List[List[int]] = []
    for i in flagged:
        if clusters and i - clusters[-1][-1] <= 2:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    short = max(window, fit // 2 + 1)
    for cl in clusters:
        i = max(cl, key=lambda j: inc[j])
        jl, jr = pos[i], pos[i + 1]
        omega = 0.5 * (k[jl] + k[jr])
        left_idx = np.arange(jl - skip, jl - skip - fit, -1)
        right_idx = np.arange(jr + skip, jr + skip + fit)
        if left_idx[-1] < pos[0] or right_idx[-1] >= grid.n:
            raise UnresolvedJump(f"not enough samples around omega = {omega:.4g}")
        lim = {}
        for name, idx in (("left", left_idx), ("right", right_idx)):
            d = np.abs(k[idx] - omega)
            full = _one_sided_limit(d, vals[idx])
            part = _one_sided_limit(d[:short], vals[idx[:short]])
            if stab_tol is not None and abs(full - part) > stab_tol:
                raise UnresolvedJump(
                    f"{name} limit at omega = {omega:.4g} not stable ({abs(full - part):.3f})"
                )
            lim[name] = full
        alpha = 0.5 * abs(lim["right"] - lim["left"])
        gamma = float(np.arcsin(min(alpha, 1.0)) / np.pi)
        rot = np.exp(1j * np.pi * gamma)
        sign_a = -int(np.sign((rot * lim["right"] + np.conj(rot) * lim["left"]).real) or 1)
        jumps.append(Jump(float(omega), gamma, sign_a, float(alpha), lim["left"], lim["right"]))
    return jumps


# ---------------------------------------------------------------------------
# convenience


def scatter(
    q: PotentialProfile,
    grid: MomentumGrid,
    kappa_max: float = 10.0,
    k_floor: Optional[float] = None,
    tail_tol: Optional[float] = 1e-3,
    jumps: bool = True,
    jump_options: Optional[dict] = None,
    n_jobs: int = 1,
    method: str = "rk",
    step: float = 0.05,
) -> ScatteringData:
    """Full direct scattering: T, R, bound states with norming constants, jumps.

    Parameters
    ----------
    q : PotentialProfile
    grid : MomentumGrid
    kappa_max : float, default 10.0
        Upper end of the bound-state scan on the imaginary axis.
    k_floor, tail_tol, n_jobs, method, step
        Passed to :func:`transmission_reflection`; ``method`` and ``step``
        also drive the bound-state scan.
    jumps : bool, default True
        Run :func:`detect_jumps` on the computed reflection coefficient.
    jump_options : dict, optional
        Keyword arguments for :func:`detect_jumps`.

    Returns
    -------
    ScatteringData
    """
    data = transmission_reflection(q, grid, k_floor=k_floor, tail_tol=tail_tol, n_jobs=n_jobs,
                                   method=method, step=step)
    kappas = find_bound_states(q, kappa_max, method=method, step=step)
    bound = [BoundState(kp, norming_constant(q, kp)) for kp in kappas]
    found = []
    if jumps:
        found = detect_jumps(data.reflection, k_floor=data.meta["k_floor"], **(jump_options or {}))
    return data.replace(bound_states=tuple(bound), jumps=tuple(found))
