import numpy as np
import pytest

from kdv_ist.exceptions import DivergentIntegrand
from kdv_ist.grid import GridFunction, MomentumGrid
from kdv_ist.hankel import SymbolDescriptor
from kdv_ist.potentials import PotentialSpec, sample
from kdv_ist.profile import PotentialProfile, uniform_grid
from kdv_ist.scatter import Jump, ScatteringData, scatter
from kdv_ist.spectra import (
    ValidationReport,
    factorization_exists,
    jump_condition_check,
    jump_matrix,
    jump_matrix_value,
    positivity_certificate,
    trace_formula_residual,
    unitarity_check,
    validate,
)

from _symbols import smooth_reflection


@pytest.fixture(scope="module")
def soliton_scattering(soliton_profile):
    return scatter(soliton_profile, MomentumGrid(20.0, 512))


@pytest.fixture(scope="module")
def poschl_teller():
    f = lambda s: -3.0 / np.cosh(np.asarray(s)) ** 2
    x = uniform_grid(-25.0, 25.0, 0.02)
    q = PotentialProfile(x, f(x), func=f)
    return q, scatter(q, MomentumGrid(20.0, 2048), k_floor=0.02)


class TestTraceFormula:
    def test_soliton(self, soliton_profile, soliton_scattering):
        lhs, rhs, rel = trace_formula_residual(soliton_profile, soliton_scattering)
        assert rhs == pytest.approx(2.0 * np.pi / 3.0, rel=1e-6)
        assert rel <= 1e-6

    def test_reflecting_with_two_bound_states(self, poschl_teller):
        q, S = poschl_teller
        assert len(S.bound_states) == 2
        lhs, rhs, rel = trace_formula_residual(q, S)
        assert rhs == pytest.approx(1.5 * np.pi, rel=1e-6)
        assert rel < 1e-3

    def test_saturated_reflection_raises(self, grid256):
        r = np.where(np.abs(grid256.k) < 3.0, 1.0, 0.0).astype(complex)
        S = ScatteringData(GridFunction(grid256, r))
        q = PotentialProfile(uniform_grid(-5, 5, 0.1), np.zeros(101))
        with pytest.raises(DivergentIntegrand):
            trace_formula_residual(q, S)

    def test_declared_jump_is_excluded(self, grid256):
        k = grid256.k
        r = np.where(np.abs(np.abs(k) - 1.0) < 1e-9, 1.0, 0.5 * np.exp(-k**2)).astype(complex)
        r[np.argmin(np.abs(k - 1.0))] = 1.0
        r[np.argmin(np.abs(k + 1.0))] = 1.0
        S = ScatteringData(GridFunction(grid256, r), jumps=(Jump(1.0, 0.2, 1, 0.5),))
        q = PotentialProfile(uniform_grid(-5, 5, 0.1), np.zeros(101))
        lhs, _, _ = trace_formula_residual(q, S)
        assert np.isfinite(lhs)


class TestUnitarity:
    def test_soliton(self, soliton_scattering):
        assert unitarity_check(soliton_scattering) < 1e-8

    def test_reflecting(self, poschl_teller):
        assert unitarity_check(poschl_teller[1]) < 1e-8

    def test_detects_violation(self, grid256):
        S = ScatteringData(GridFunction(grid256, np.full(grid256.n, 0.5 + 0j)),
                           transmission=GridFunction(grid256, np.ones(grid256.n, dtype=complex)))
        assert unitarity_check(S) == pytest.approx(0.25)

    def test_requires_transmission(self, grid256):
        with pytest.raises(ValueError):
            unitarity_check(ScatteringData(GridFunction.zeros(grid256)))


class TestJumpCriteria:
    @pytest.mark.parametrize("alpha, ok", [(0.0, True), (0.5878, True), (1.0 - 1e-5, True),
                                           (1.0 - 1e-7, False), (1.0, False)])
    def test_threshold(self, alpha, ok):
        assert jump_condition_check([Jump(1.0, 0.2, 1, alpha)]) is ok

    def test_accepts_tuples_and_scalars(self):
        assert jump_condition_check([(1.0, 0.3)])
        assert not jump_condition_check([0.2, 1.0])
        assert jump_condition_check([])

    def test_factorization(self, grid256, rng):
        R = smooth_reflection(grid256, rng, amplitude=0.9)
        assert factorization_exists(ScatteringData(R))
        assert factorization_exists(ScatteringData(R, jumps=(Jump(1.0, 0.2, 1, 0.58),)))
        assert not factorization_exists(ScatteringData(R, jumps=(Jump(1.0, 0.5, 1, 1.0),)))

    def test_factorization_needs_strict_contraction_somewhere(self, grid256):
        with pytest.raises(ValueError):
            ScatteringData(GridFunction(grid256, np.full(256, 1.01 + 0j)))
        assert not factorization_exists(ScatteringData(GridFunction(grid256, np.ones(256, dtype=complex))))


class TestJumpMatrix:
    def test_determinant_is_one(self, grid256, rng):
        S = ScatteringData(smooth_reflection(grid256, rng, amplitude=0.95))
        for x, t, k in [(0.0, 0.0, 0.3), (-2.0, 0.5, 1.7), (3.0, 0.1, -4.2)]:
            V, det = jump_matrix(S, x, t, k)
            assert abs(det - 1.0) < 1e-12
            assert abs(np.linalg.det(V) - 1.0) < 1e-12

    def test_value_layout(self):
        V = jump_matrix_value(0.3 - 0.4j)
        np.testing.assert_allclose(V, [[0.75, -(0.3 + 0.4j)], [0.3 - 0.4j, 1.0]])


class TestPositivity:
    def test_contractive_symbol(self, grid256, rng):
        phi = SymbolDescriptor(smooth_reflection(grid256, rng, amplitude=0.3))
        assert positivity_certificate(phi) >= 0.7 - 1e-8

    def test_pole_terms_are_nonnegative(self, grid256):
        phi = SymbolDescriptor.from_poles(grid256, [(2.0, 1.0), (0.5, 0.3)])
        assert positivity_certificate(phi, 64) >= 1.0 - 1e-8

    def test_indefinite_symbol(self):
        grid = MomentumGrid(20.0, 512)
        k = grid.k
        phi = SymbolDescriptor(GridFunction(grid, 1.5 * np.exp(-(k / 6.0) ** 2) * np.exp(-4j * k)))
        assert positivity_certificate(phi, 128) < 0.0


class TestValidate:
    def test_soliton_report(self, soliton_profile, soliton_scattering):
        rep = validate(soliton_profile, soliton_scattering)
        assert isinstance(rep, ValidationReport)
        assert rep.jump_condition_ok and rep.factorization_exists
        assert rep.min_eig_IplusH >= 1.0 - 1e-6
        assert rep.trace_rel_error <= 1e-6
        d = rep.to_dict()
        assert set(d) >= {"unitarity_residual", "trace_rel_error", "min_eig_IplusH", "notes"}

    def test_without_samples(self):
        S = ScatteringData(GridFunction.zeros(MomentumGrid(10.0, 128)), bound_states=[(1.0, 2.0)])
        rep = validate(None, S)
        assert np.isnan(rep.trace_rel_error)
        assert np.isnan(rep.unitarity_residual)
        assert any("trace" in n for n in rep.notes)

    def test_zero_potential(self):
        q = sample(PotentialSpec("zero"), uniform_grid(-10, 10, 0.1))
        S = scatter(q, MomentumGrid(10.0, 128))
        rep = validate(q, S)
        assert rep.trace_rel_error == 0.0
        assert rep.unitarity_residual < 1e-12
