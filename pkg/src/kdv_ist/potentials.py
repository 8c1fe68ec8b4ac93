"""Catalog of analytically controlled test potentials.

Kinds
-----
zero
    q = 0.
soliton
    q = -2 kappa^2 sech^2(kappa (x - x0)); parameters ``kappa``, ``x0``.
wvn
    Wigner-von Neumann potential q = (A/x) sin(2 omega x); parameters ``A``,
    ``omega``.  Coupling constant gamma = |A / (4 omega)|.
rybkin
    Even extension of -2 d^2/dx^2 log(1 + rho x - (rho/2) sin 2x), x >= 0;
    parameter ``rho > 0``.  Closed-form Jost solutions are available through
    :func:`rybkin_jost`.
periodic_over_x
    q = sum_j (A_j / x) sin(2 omega_j x); parameters ``amplitudes``,
    ``omegas`` (equal-length lists).
custom_samples
    Tabulated samples; parameters ``x`` and ``q`` (lists).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional

import numpy as np
from scipy.optimize import brentq

from .exceptions import NoKnownFacts, PoleAtResonance
from .profile import PotentialProfile

__all__ = [
    "KINDS",
    "PotentialSpec",
    "Resonance",
    "ScatteringFacts",
    "sample",
    "potential_function",
    "rybkin_jost",
    "known_scattering",
    "wvn_preset",
    "periodic_preset",
]

KINDS = ("zero", "soliton", "wvn", "rybkin", "periodic_over_x", "custom_samples")

_DEFAULTS = {
    "zero": {},
    "soliton": {"kappa": 1.0, "x0": 0.0},
    "wvn": {"A": 0.8, "omega": 1.0},
    "rybkin": {"rho": 1.0},
    "periodic_over_x": {"amplitudes": [0.4], "omegas": [1.0]},
    "custom_samples": {},
}


@dataclass(frozen=True)
class PotentialSpec:
    """Catalog entry: a potential kind and its parameters.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    parameters : mapping
        Kind-specific parameters; missing ones take catalog defaults.
    closed_forms : mapping, optional
        Extra user annotations carried along with the spec.
    """

    kind: str
    parameters: Mapping = field(default_factory=dict)
    closed_forms: Optional[Mapping] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        allowed = set(_DEFAULTS[self.kind]) | ({"x", "q"} if self.kind == "custom_samples" else set())
        unknown = set(self.parameters) - allowed
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        params = dict(_DEFAULTS[self.kind])
        params.update(self.parameters)
        object.__setattr__(self, "parameters", params)
        self._validate()

    def _validate(self):
        p = self.parameters
        if self.kind == "soliton" and not p["kappa"] > 0:
            raise ValueError("soliton kappa must be positive")
        if self.kind == "wvn" and not p["omega"] > 0:
            raise ValueError("wvn omega must be positive")
        if self.kind == "rybkin" and not p["rho"] > 0:
            raise ValueError("rybkin requires rho > 0 so that the log argument stays positive")
        if self.kind == "periodic_over_x":
            if len(p["amplitudes"]) != len(p["omegas"]) or not p["omegas"]:
                raise ValueError("amplitudes and omegas must be nonempty lists of equal length")
            if any(w <= 0 for w in p["omegas"]):
                raise ValueError("omegas must be positive")
        if self.kind == "custom_samples":
            if "x" not in p or "q" not in p:
                raise ValueError("custom_samples needs 'x' and 'q'")

    @property
    def gammas(self) -> List[float]:
        """Coupling constants |A_j / (4 omega_j)| of the oscillatory tails."""
        p = self.parameters
        if self.kind == "wvn":
            return [abs(p["A"] / (4.0 * p["omega"]))]
        if self.kind == "periodic_over_x":
            return [abs(a / (4.0 * w)) for a, w in zip(p["amplitudes"], p["omegas"])]
        if self.kind == "rybkin":
            # large-x tail is -4 sin(2x)/x + O(x^-2)
            return [1.0]
        return []

    @property
    def theorem_compliant(self) -> bool:
        """Whether the tail couplings stay in the weak regime with margin."""
        g = self.gammas
        if self.kind == "wvn":
            return 0.0 < g[0] < 0.5
        if self.kind == "periodic_over_x":
            return sum(g) <= 0.4
        return self.kind != "rybkin"


def wvn_preset(gamma: float = 0.2, omega: float = 1.0, sign: int = 1) -> PotentialSpec:
    """WvN spec with coupling ``gamma`` in (0, 1/2) and amplitude sign ``sign``."""
    if not 0.0 < gamma < 0.5:
        raise ValueError("preset gamma must lie in (0, 1/2)")
    return PotentialSpec("wvn", {"A": float(np.sign(sign)) * 4.0 * omega * gamma, "omega": omega})


def periodic_preset(amplitudes, omegas) -> PotentialSpec:
    """periodic_over_x spec, rejecting total coupling above 0.4."""
    spec = PotentialSpec("periodic_over_x", {"amplitudes": list(amplitudes), "omegas": list(omegas)})
    if not spec.theorem_compliant:
        raise ValueError(f"total coupling {sum(spec.gammas):.3f} exceeds the preset limit 0.4")
    return spec


def _sin_over_x(a: float, w: float):
    # (a/x) sin(2 w x), with the removable value 2 a w at x = 0
    return lambda x: a * 2.0 * w * np.sinc(2.0 * w * np.asarray(x, dtype=float) / np.pi)


def _rybkin_q(rho: float):
    def q(x):
        x = np.abs(np.asarray(x, dtype=float))
        f = 1.0 + rho * x - 0.5 * rho * np.sin(2.0 * x)
        f1 = 2.0 * rho * np.sin(x) ** 2
        f2 = 2.0 * rho * np.sin(2.0 * x)
        return -2.0 * (f2 / f - (f1 / f) ** 2)

    return q


def potential_function(spec: PotentialSpec) -> Callable:
    """Exact evaluator ``q(x)`` for a catalog spec."""
    p = spec.parameters
    if spec.kind == "zero":
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if spec.kind == "soliton":
        kappa, x0 = float(p["kappa"]), float(p["x0"])
        return lambda x: -2.0 * kappa**2 / np.cosh(kappa * (np.asarray(x, dtype=float) - x0)) ** 2
    if spec.kind == "wvn":
        return _sin_over_x(float(p["A"]), float(p["omega"]))
    if spec.kind == "periodic_over_x":
        parts = [_sin_over_x(float(a), float(w)) for a, w in zip(p["amplitudes"], p["omegas"])]
        return lambda x: sum(f(x) for f in parts)
    if spec.kind == "rybkin":
        return _rybkin_q(float(p["rho"]))
    xs = np.asarray(p["x"], dtype=float)
    return PotentialProfile(xs, np.asarray(p["q"], dtype=float)).evaluator()


def sample(spec: PotentialSpec, x_grid, t: float = 0.0) -> PotentialProfile:
    """Sample a catalog potential on ``x_grid``.

    The returned profile carries the exact evaluator, so ODE-based direct
    scattering does not depend on the sampling density.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    func = potential_function(spec)
    return PotentialProfile(x_grid, func(x_grid), t=t, func=func, meta={"kind": spec.kind})


def rybkin_jost(rho: float, x, k: complex):
    """Closed-form Jost solutions of the rybkin potential.

    Parameters
    ----------
    rho : float
        Positive parameter.
    x : float or array_like
    k : complex
        Momentum with Im k >= 0, excluding the poles k = +-1.

    Returns
    -------
    psi_plus, psi_minus : ndarray
        ``psi_plus`` on x >= 0 and ``psi_minus`` on x <= 0; entries outside
        the respective half-line are NaN.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    k = complex(k)
    if abs(k - 1) < 1e-12 or abs(k + 1) < 1e-12:
        raise PoleAtResonance("rybkin Jost solutions have poles at k = +-1")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    damp = rho * np.sin(x) / (1.0 + rho * ax - 0.5 * rho * np.sin(2.0 * ax))
    plus = (1.0 + (np.exp(1j * x) / (k + 1) - np.exp(-1j * x) / (k - 1)) * damp) * np.exp(1j * k * x)
    minus = (1.0 - (np.exp(-1j * x) / (k + 1) - np.exp(1j * x) / (k - 1)) * damp) * np.exp(-1j * k * x)
    plus = np.where(x >= 0, plus, np.nan + 0j)
    minus = np.where(x <= 0, minus, np.nan + 0j)
    return plus, minus


@dataclass(frozen=True)
class Resonance:
    """Facts about a WvN resonance at momentum omega."""

    omega: float
    gamma: float
    sign_a: int

    @property
    def jump_size(self) -> float:
        """|R(omega + 0) - R(omega - 0)| = 2 |sin(pi gamma)|."""
        return 2.0 * abs(np.sin(np.pi * self.gamma))

    @property
    def transmission_order(self) -> float:
        """Order 2 gamma at which |T| vanishes at omega."""
        return 2.0 * self.gamma

    @property
    def sign_limit(self) -> int:
        """Limit of exp(i pi gamma sgn(k - omega)) R(k) as k -> omega, equal to -sgn A."""
        return -self.sign_a


@dataclass(frozen=True)
class ScatteringFacts:
    """Assertable closed-form facts about a catalog potential.

    Attributes are ``None`` where nothing is known.
    """

    kind: str
    reflection: Optional[Callable] = None
    transmission: Optional[Callable] = None
    bound_states: Optional[List[tuple]] = None
    n_bound_states: Optional[int] = None
    resonances: List[Resonance] = field(default_factory=list)
    reflection_modulus_at_resonance: Optional[float] = None
    notes: List[str] = field(default_factory=list)


def known_scattering(spec: PotentialSpec) -> ScatteringFacts:
    """Closed-form scattering facts for catalog kinds that have them.

    Raises
    ------
    NoKnownFacts
        For ``custom_samples``.
    """
    p = spec.parameters
    if spec.kind == "zero":
        return ScatteringFacts(
            "zero",
            reflection=lambda k: np.zeros_like(np.asarray(k, dtype=complex)),
            transmission=lambda k: np.ones_like(np.asarray(k, dtype=complex)),
            bound_states=[],
            n_bound_states=0,
        )
    if spec.kind == "soliton":
        kappa, x0 = float(p["kappa"]), float(p["x0"])
        return ScatteringFacts(
            "soliton",
            reflection=lambda k: np.zeros_like(np.asarray(k, dtype=complex)),
            transmission=lambda k: (np.asarray(k) + 1j * kappa) / (np.asarray(k) - 1j * kappa),
            bound_states=[(kappa, 2.0 * kappa * np.exp(2.0 * kappa * x0))],
            n_bound_states=1,
        )
    if spec.kind in ("wvn", "periodic_over_x"):
        if spec.kind == "wvn":
            pairs = [(p["A"], p["omega"])]
        else:
            pairs = list(zip(p["amplitudes"], p["omegas"]))
        res = [
            Resonance(float(w), abs(a / (4.0 * w)), int(np.sign(a)))
            for a, w in pairs
            if a != 0
        ]
        return ScatteringFacts(spec.kind, resonances=res, reflection_modulus_at_resonance=1.0)
    if spec.kind == "rybkin":
        rho = float(p["rho"])

        def refl(k):
            k = np.asarray(k, dtype=complex)
            return 2.0 * rho / (1j * k * (k * k - 1.0) - 2.0 * rho)

        def trans(k):
            k = np.asarray(k, dtype=complex)
            d = 1j * k * (k * k - 1.0)
            return d / (d - 2.0 * rho)

        kappa = brentq(lambda s: s**3 + s - 2.0 * rho, 0.0, max(2.0 * rho, 1.0) + 1.0, xtol=1e-15)
        return ScatteringFacts(
            "rybkin",
            reflection=refl,
            transmission=trans,
            n_bound_states=1,
            bound_states=[(kappa, None)],
            resonances=[Resonance(1.0, 1.0, -1)],
            reflection_modulus_at_resonance=1.0,
            notes=[
                "T and R follow from the closed-form Jost solutions at x = 0; "
                "kappa solves kappa^3 + kappa = 2 rho",
                "tail is -4 sin(2x)/x, coupling gamma = 1, outside the weak regime; "
                "R is continuous at omega = 1 with R(1) = -1, so no jump is expected",
            ],
        )
    raise NoKnownFacts(f"no closed-form facts for kind {spec.kind!r}")
