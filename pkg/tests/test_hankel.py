import numpy as np
import pytest
from hypothesis import given, strategies as st

from kdv_ist.exceptions import IndefiniteOperator, NonSelfAdjointSymbol
from kdv_ist.grid import GridFunction, MomentumGrid, cauchy_eval, hardy_defect, l2_inner, l2_norm
from kdv_ist.hankel import (
    SymbolDescriptor,
    essential_spectrum_bound,
    hankel_apply,
    hankel_apply_one,
    hankel_matrix,
    quadratic_form,
    solve_hankel_dense,
    solve_hankel_system,
)

from _symbols import random_hardy, random_symbol, smooth_reflection

GRID = MomentumGrid(10.0, 256)


def rank_one(grid=GRID, c=2.0, kappa=1.0):
    return SymbolDescriptor.from_poles(grid, [(c, kappa)])


class TestApply:
    def test_rank_one_closed_form(self):
        f = GridFunction.rational(GRID, [(-1j, 1.0)])
        Hf = hankel_apply(rank_one(), f)
        # f(i) = -i/2, so H f = i c f(i) / (k + i) = 1 / (k + i)
        assert len(Hf.poles) == 1
        p, a = Hf.poles[0]
        assert p == pytest.approx(-1j) and a == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(Hf.values)) < 1e-14

    def test_zero_symbol(self, rng):
        f = random_hardy(GRID, rng)
        assert l2_norm(hankel_apply(SymbolDescriptor.zero(GRID), f)) == 0.0

    def test_non_hardy_input_warns(self):
        f = GridFunction.rational(GRID, [(1j, 1.0)])
        with pytest.warns(RuntimeWarning):
            hankel_apply(rank_one(), f)

    def test_apply_one_rank_one(self):
        h1 = hankel_apply_one(rank_one())
        assert h1.poles == ((-1j, 2j),)

    def test_apply_one_is_hardy(self, rng):
        phi = SymbolDescriptor(smooth_reflection(GRID, rng))
        assert hardy_defect(hankel_apply_one(phi)) < 1e-12

    @given(st.integers(0, 2**32 - 1))
    def test_matches_dense_matrix(self, seed):
        rng = np.random.default_rng(seed)
        phi = SymbolDescriptor(smooth_reflection(GRID, rng))
        half = GRID.n // 2
        E = GRID.hardy_basis(half)
        coef = rng.standard_normal(half) + 1j * rng.standard_normal(half)
        f = GridFunction(GRID, E @ coef)
        Hf = hankel_apply(phi, f)
        out = GRID.dk * (E.conj().T @ Hf.samples())
        np.testing.assert_allclose(out, hankel_matrix(phi, half) @ coef, atol=1e-8 * np.linalg.norm(coef))


class TestSelfAdjointness:
    @given(st.integers(0, 2**32 - 1))
    def test_inner_products(self, seed):
        rng = np.random.default_rng(seed)
        phi = random_symbol(GRID, rng)
        f, g = random_hardy(GRID, rng), random_hardy(GRID, rng)
        lhs = l2_inner(hankel_apply(phi, f), g)
        rhs = l2_inner(f, hankel_apply(phi, g))
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))

    @given(st.integers(0, 2**32 - 1))
    def test_matrix_hermitian(self, seed):
        rng = np.random.default_rng(seed)
        M = hankel_matrix(random_symbol(GRID, rng), 64)
        assert np.max(np.abs(M - M.conj().T)) <= 1e-10 * max(1.0, np.max(np.abs(M)))

    def test_norm_bound(self, rng):
        phi = SymbolDescriptor(smooth_reflection(GRID, rng, amplitude=0.7))
        M = hankel_matrix(phi, GRID.n // 2)
        assert np.linalg.norm(M, 2) <= 0.7 + 1e-6


class TestMatrix:
    def test_zero(self):
        assert np.all(hankel_matrix(SymbolDescriptor.zero(GRID), 16) == 0)

    def test_rank_one(self):
        s = np.linalg.svd(hankel_matrix(rank_one(), 128), compute_uv=False)
        assert s[1] <= 1e-8 * s[0]

    def test_size_guards(self):
        with pytest.raises(ValueError):
            hankel_matrix(rank_one(), GRID.n)
        big = MomentumGrid(10.0, 2**15)
        with pytest.raises(MemoryError):
            hankel_matrix(SymbolDescriptor.zero(big), 8200)


class TestQuadraticForm:
    @given(st.integers(0, 2**32 - 1))
    def test_pole_form(self, seed):
        rng = np.random.default_rng(seed)
        c, kappa = rng.uniform(0.1, 3.0), rng.uniform(0.3, 2.0)
        f = random_hardy(GRID, rng)
        form = quadratic_form(rank_one(c=c, kappa=kappa), f)
        expected = 2.0 * np.pi * c * abs(cauchy_eval(f, 1j * kappa)) ** 2
        assert form == pytest.approx(expected, rel=1e-8, abs=1e-12)

    def test_additivity(self, rng):
        f = random_hardy(GRID, rng)
        both = SymbolDescriptor.from_poles(GRID, [(1.0, 0.5), (2.0, 1.5)])
        parts = (quadratic_form(rank_one(c=1.0, kappa=0.5), f)
                 + quadratic_form(rank_one(c=2.0, kappa=1.5), f))
        assert quadratic_form(both, f) == pytest.approx(parts, rel=1e-10)

    def test_zero_function(self):
        assert quadratic_form(rank_one(), GridFunction.zeros(GRID)) == 0.0

    def test_rejects_asymmetric_symbol(self):
        R = GridFunction(GRID, 0.1j * np.ones(GRID.n))
        with pytest.raises(NonSelfAdjointSymbol):
            quadratic_form(SymbolDescriptor(R), GridFunction.zeros(GRID))


class TestSolve:
    def test_zero_symbol(self):
        rep = solve_hankel_system(SymbolDescriptor.zero(GRID))
        assert l2_norm(rep.Y) == 0.0

    def test_rank_one(self):
        rep = solve_hankel_system(rank_one())
        Y = rep.Y
        assert rep.residual <= 1e-10
        ref = GridFunction.rational(GRID, [(-1j, -1j)])
        assert l2_norm(Y - ref) < 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_dense_agreement(self, seed):
        rng = np.random.default_rng(seed)
        phi = random_symbol(GRID, rng, n_poles=seed % 3)
        cg = solve_hankel_system(phi, tol=1e-12).Y
        dense = solve_hankel_dense(phi).Y
        assert l2_norm(cg - dense) <= 1e-7 * max(1.0, l2_norm(dense))

    def test_indefinite_detected(self):
        # the shift symbol exp(-4ik) makes H nearly an involution, with
        # eigenvalues close to +-1.5, so I + H has a negative direction
        k = GRID.k
        R = GridFunction(GRID, 1.5 * np.exp(-((k / 6.0) ** 2)) * np.exp(-4j * k))
        assert np.linalg.eigvalsh(hankel_matrix(SymbolDescriptor(R), 128))[0] < -1.0
        with pytest.raises(IndefiniteOperator):
            solve_hankel_system(SymbolDescriptor(R), tol=1e-12)

    def test_ritz_estimate_positive(self, rng):
        rep = solve_hankel_system(random_symbol(GRID, rng, n_poles=1))
        assert rep.min_form_estimate > 0


class TestEssentialSpectrum:
    def test_examples(self):
        assert essential_spectrum_bound([(1.0, 0.5)]) == [(-0.5, 0.5)]
        assert essential_spectrum_bound([]) == []
        assert essential_spectrum_bound([(1.0, 0.3), (2.0, 0.7)]) == [(-0.7, 0.7)]
