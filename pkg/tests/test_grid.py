import numpy as np
import pytest
from hypothesis import given, strategies as st

from kdv_ist.exceptions import GridMismatch
from kdv_ist.grid import (
    GridFunction,
    MomentumGrid,
    cauchy_eval,
    cosine_taper,
    hardy_defect,
    l2_inner,
    l2_norm,
    reflect,
    riesz_project,
)


def random_gf(grid, rng):
    return GridFunction(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))


def interior(grid, frac=0.25):
    return np.abs(grid.k) < frac * grid.k_max


class TestMomentumGrid:
    def test_layout(self):
        g = MomentumGrid(10.0, 64)
        assert g.dk == pytest.approx(20.0 / 64)
        np.testing.assert_allclose(g.k, -g.k[::-1], atol=1e-14)
        assert g.k[0] == pytest.approx(-10.0 + g.dk / 2)

    @pytest.mark.parametrize("n", [15, 8, 33])
    def test_rejects_bad_n(self, n):
        with pytest.raises(ValueError):
            MomentumGrid(10.0, n)

    def test_rejects_bad_kmax(self):
        with pytest.raises(ValueError):
            MomentumGrid(-1.0, 64)

    def test_hardy_basis_orthonormal(self):
        g = MomentumGrid(5.0, 64)
        E = g.hardy_basis(32)
        np.testing.assert_allclose(E.conj().T @ E * g.dk, np.eye(32), atol=1e-12)

    def test_dual_roundtrip(self, rng):
        g = MomentumGrid(3.0, 128)
        v = rng.standard_normal(128) + 0j
        np.testing.assert_allclose(g.from_dual_coefficients(g.dual_coefficients(v)), v, atol=1e-13)


class TestRieszProjection:
    def test_upper_analytic_kept_sampled(self):
        # sampled 1/(k+i) decays like 1/k, so periodization leaves an O(1/k_max) error
        errs = []
        for k_max in (20.0, 80.0):
            g = MomentumGrid(k_max, int(12.8 * k_max))
            f = GridFunction.from_callable(g, lambda k: 1.0 / (k + 1j))
            m = np.abs(g.k) < 5.0
            errs.append(np.max(np.abs(riesz_project(f, "minus").samples()[m])))
        assert errs[1] < errs[0] / 3.0
        assert errs[1] < 3e-3

    def test_exact_rational_terms(self, grid256):
        f = GridFunction.rational(grid256, [(-1j, 1.0)])
        assert riesz_project(f, "plus").poles == ((-1j, 1.0),)
        assert l2_norm(riesz_project(f, "minus")) == 0.0
        g = GridFunction.rational(grid256, [(1j, 1.0)])
        assert l2_norm(riesz_project(g, "plus")) == 0.0

    def test_partial_fractions(self):
        g = MomentumGrid(200.0, 2**15)
        f = GridFunction.from_callable(g, lambda k: 1.0 / (k * k + 1.0))
        expected = -(1.0 / 2j) / (g.k + 1j)
        m = np.abs(g.k) < 5.0
        # sampled symbols carry an O(1/k_max) periodization error
        np.testing.assert_allclose(riesz_project(f, "plus").samples()[m], expected[m], atol=5e-3)

    @given(st.integers(0, 2**32 - 1))
    def test_completeness_and_idempotence(self, seed):
        rng = np.random.default_rng(seed)
        g = MomentumGrid(7.0, 128)
        f = random_gf(g, rng)
        p, m = riesz_project(f, "plus"), riesz_project(f, "minus")
        np.testing.assert_allclose((p + m).samples(), f.samples(), atol=1e-13)
        np.testing.assert_allclose(riesz_project(p, "plus").samples(), p.samples(), atol=1e-13)
        assert l2_norm(riesz_project(p, "minus")) <= 1e-12 * l2_norm(f)

    @given(st.integers(0, 2**32 - 1))
    def test_reflection_swaps_projections(self, seed):
        rng = np.random.default_rng(seed)
        g = MomentumGrid(7.0, 128)
        f = random_gf(g, rng)
        lhs = reflect(riesz_project(f, "minus")).samples()
        rhs = riesz_project(reflect(f), "plus").samples()
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_bad_sign(self, grid256):
        with pytest.raises(ValueError):
            riesz_project(GridFunction.zeros(grid256), "up")


class TestReflect:
    def test_odd_and_even(self, grid256):
        f = GridFunction.from_callable(grid256, lambda k: k)
        np.testing.assert_allclose(reflect(f).samples(), -grid256.k)
        e = GridFunction.from_callable(grid256, lambda k: np.exp(-k * k))
        np.testing.assert_allclose(reflect(e).samples(), e.samples())

    def test_isometry(self, grid256, rng):
        f = random_gf(grid256, rng)
        assert l2_norm(reflect(f)) == pytest.approx(l2_norm(f), rel=1e-14)


class TestCauchyEval:
    def test_simple_pole(self, grid256):
        f = GridFunction.rational(grid256, [(-1j, 1.0)])
        assert cauchy_eval(f, 1j) == pytest.approx(-0.5j, abs=1e-14)

    def test_zero(self, grid256):
        assert cauchy_eval(GridFunction.zeros(grid256), 2j) == 0

    def test_double_pole_sampled(self):
        g = MomentumGrid(100.0, 8192)
        f = GridFunction.from_callable(g, lambda k: 1.0 / (k + 1j) ** 2)
        assert cauchy_eval(f, 2j) == pytest.approx(-1.0 / 9.0, rel=1e-6)

    @pytest.mark.parametrize("z", [0.0, -1j, 1.0 - 0.5j])
    def test_rejects_lower_half_plane(self, grid256, z):
        with pytest.raises(ValueError):
            cauchy_eval(GridFunction.zeros(grid256), z)

    def test_array_argument(self, grid256):
        f = GridFunction.rational(grid256, [(-1j, 1.0)])
        zs = np.array([1j, 2j, 1 + 1j])
        np.testing.assert_allclose(cauchy_eval(f, zs), 1.0 / (zs + 1j), atol=1e-14)


class TestInnerProduct:
    def test_unit_bump(self):
        g = MomentumGrid(10.0, 1024)
        b = np.exp(-g.k**2)
        b /= np.sqrt(np.sum(np.abs(b) ** 2) * g.dk)
        f = GridFunction(g, b)
        assert l2_inner(f, f) == pytest.approx(1.0, abs=1e-8)

    def test_disjoint_supports(self, grid256):
        f = GridFunction(grid256, (grid256.k < -1).astype(float))
        h = GridFunction(grid256, (grid256.k > 1).astype(float))
        assert l2_inner(f, h) == 0

    def test_conjugate_symmetry(self, grid256, rng):
        f, h = random_gf(grid256, rng), random_gf(grid256, rng)
        assert l2_inner(f, h) == pytest.approx(np.conj(l2_inner(h, f)), rel=1e-13)
        assert l2_inner(f, f).imag == pytest.approx(0.0, abs=1e-12)

    def test_exact_rational_norm(self, grid256):
        # || 1/(k+i) ||^2 = pi
        f = GridFunction.rational(grid256, [(-1j, 1.0)])
        assert l2_inner(f, f) == pytest.approx(np.pi, rel=1e-14)

    def test_grid_mismatch(self, grid256):
        with pytest.raises(GridMismatch):
            l2_inner(GridFunction.zeros(grid256), GridFunction.zeros(MomentumGrid(20.0, 128)))


def test_hardy_defect(grid256):
    assert hardy_defect(GridFunction.rational(grid256, [(-1j, 1.0)])) == 0.0
    assert hardy_defect(GridFunction.rational(grid256, [(1j, 1.0)])) == pytest.approx(1.0)


def test_cosine_taper(grid256):
    w = cosine_taper(grid256, 0.05)
    assert w.max() == 1.0 and w.min() >= 0.0
    assert np.all(w[np.abs(grid256.k) < 0.9 * grid256.k_max] == 1.0)
    assert w[0] < 0.05
    np.testing.assert_allclose(w, w[::-1])


def test_gridfunction_validation(grid256):
    with pytest.raises(ValueError):
        GridFunction(grid256, np.zeros(5))
    with pytest.raises(ValueError):
        GridFunction(grid256, np.full(grid256.n, np.nan))
    with pytest.raises(ValueError):
        GridFunction.rational(grid256, [(1.0, 1.0)])
