"""Inverse scattering transform for KdV with Wigner-von Neumann resonances.

The direct problem (:mod:`kdv_ist.scatter`) maps a potential q to its
scattering data; the inverse problem (:mod:`kdv_ist.invert`) recovers q(x, t)
from evolved data by solving one Hankel-operator equation per point x.
"""

__version__ = "0.1.0"

from .exceptions import ConfigError, ISTError, NumericalFailure
from .grid import GridFunction, MomentumGrid, riesz_project
from .hankel import SymbolDescriptor, hankel_apply, hankel_matrix, solve_hankel_system
from .profile import PotentialProfile, uniform_grid
from .potentials import PotentialSpec, known_scattering, rybkin_jost, sample, wvn_preset
from .scatter import BoundState, Jump, ScatteringData, detect_jumps, jost_solve, scatter
from .invert import evolve_data, kdv_residual, recover_potential, solve_kdv
from .spectra import ValidationReport, factorization_exists, trace_formula_residual, validate
from .estimator import KdVInverseScattering

__all__ = [
    "ConfigError", "ISTError", "NumericalFailure",
    "GridFunction", "MomentumGrid", "riesz_project",
    "SymbolDescriptor", "hankel_apply", "hankel_matrix", "solve_hankel_system",
    "PotentialProfile", "uniform_grid",
    "PotentialSpec", "known_scattering", "rybkin_jost", "sample", "wvn_preset",
    "BoundState", "Jump", "ScatteringData", "detect_jumps", "jost_solve", "scatter",
    "evolve_data", "kdv_residual", "recover_potential", "solve_kdv",
    "ValidationReport", "factorization_exists", "trace_formula_residual", "validate",
    "KdVInverseScattering",
]
