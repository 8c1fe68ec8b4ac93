"""scikit-learn style facade over the direct and inverse problems."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .grid import MomentumGrid
from .invert import _B_at
from .profile import PotentialProfile
from .scatter import ScatteringData, scatter

__all__ = ["KdVInverseScattering"]


class KdVInverseScattering(BaseEstimator):
    """Fit scattering data to a sampled potential, predict q(x, t) from it.

    ``fit`` runs the direct problem on samples ``X = [[x, q(x)], ...]``;
    ``predict`` evaluates the KdV solution evolved from that potential at
    pairs ``X = [[x, t], ...]`` by solving one Hankel system per stencil
    point.

    Parameters
    ----------
    k_max : float, default 40.0
        Momentum cutoff.
    n : int, default 2048
        Number of momentum nodes (a power of two).
    kappa_max : float, default 10.0
        Upper end of the bound-state scan.
    k_floor : float, optional
        Excluded band around k = 0; defaults to 5% of ``k_max``.
    tail_tol : float or None, default 1e-3
        Boundary residual bound of the direct problem.
    ode_method : {'rk', 'magnus'}, default 'rk'
    ode_step : float, default 0.05
        Magnus step, ignored by ``'rk'``.
    jump_options : dict, optional
        Keyword arguments for jump detection.
    cg_tol : float, default 1e-10
    solver : {'cg', 'dense'}, default 'cg'
    limit : {'moment', 'richardson'}, default 'moment'
    fd_step : float, default 0.02
        Spacing of the five-point stencil used to differentiate B in ``predict``.
    n_jobs : int, default 1

    Attributes
    ----------
    scattering_data_ : ScatteringData
    bound_states_ : tuple of BoundState
    jumps_ : tuple of Jump
    n_features_in_ : int
    """

    def __init__(self, k_max=40.0, n=2048, kappa_max=10.0, k_floor=None, tail_tol=1e-3,
                 ode_method="rk", ode_step=0.05, jump_options=None, cg_tol=1e-10, solver="cg",
                 limit="moment", fd_step=0.02, n_jobs=1):
        self.k_max = k_max
        self.n = n
        self.kappa_max = kappa_max
        self.k_floor = k_floor
        self.tail_tol = tail_tol
        self.ode_method = ode_method
        self.ode_step = ode_step
        self.jump_options = jump_options
        self.cg_tol = cg_tol
        self.solver = solver
        self.limit = limit
        self.fd_step = fd_step
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        """Direct scattering of the potential sampled in ``X``.

        Parameters
        ----------
        X : array_like, shape (m, 2)
            Columns x and q(x); x must be uniform and increasing.
        y : ignored
        """
        X = check_array(X, ensure_min_samples=5)
        if X.shape[1] != 2:
            raise ValueError(f"expected two columns [x, q], got {X.shape[1]}")
        q = PotentialProfile(X[:, 0], X[:, 1])
        S = scatter(q, MomentumGrid(float(self.k_max), int(self.n)), kappa_max=self.kappa_max,
                    k_floor=self.k_floor, tail_tol=self.tail_tol, jump_options=self.jump_options,
                    n_jobs=self.n_jobs, method=self.ode_method, step=self.ode_step)
        self._store(S)
        return self

    def set_scattering_data(self, S: ScatteringData):
        """Use precomputed scattering data instead of calling :meth:`fit`."""
        self._store(S)
        return self

    def _store(self, S):
        self.scattering_data_ = S
        self.bound_states_ = S.bound_states
        self.jumps_ = S.jumps
        self.n_features_in_ = 2

    def predict(self, X):
        """q(x, t) at the rows ``[x, t]`` of ``X``.

        q = dB/dx is taken with the centered five-point stencil of spacing
        ``fd_step``, so each row costs four Hankel solves.
        """
        check_is_fitted(self, "scattering_data_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected two columns [x, t], got {X.shape[1]}")
        h = float(self.fd_step)
        S = self.scattering_data_
        out = np.empty(X.shape[0])
        for i, (x, t) in enumerate(X):
            b = [_B_at(S, x + j * h, t, self.cg_tol, self.solver, self.limit)[0] for j in (-2, -1, 1, 2)]
            out[i] = (b[0] - 8.0 * b[1] + 8.0 * b[2] - b[3]) / (12.0 * h)
        return out

    def score(self, X, y):
        """Negative maximum absolute error of :meth:`predict` against ``y``."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, dtype=float))))
