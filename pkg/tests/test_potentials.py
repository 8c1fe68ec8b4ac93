import numpy as np
import pytest

from kdv_ist.exceptions import NoKnownFacts, PoleAtResonance
from kdv_ist.potentials import (
    KINDS,
    PotentialSpec,
    known_scattering,
    periodic_preset,
    potential_function,
    rybkin_jost,
    sample,
    wvn_preset,
)
from kdv_ist.profile import PotentialProfile, uniform_grid


def tail_exponent(f, g, lo=50.0, hi=200.0):
    """Slope of log max|f - g| over half-period windows against log x."""
    starts = np.arange(lo, hi, np.pi)
    env = []
    for s in starts:
        x = np.linspace(s, s + np.pi, 400)
        env.append(np.max(np.abs(f(x) - g(x))))
    return np.polyfit(np.log(starts + np.pi / 2), np.log(env), 1)[0]


class TestSample:
    def test_wvn_removable_value(self):
        q = sample(PotentialSpec("wvn", {"A": 1.0, "omega": 1.0}), np.array([-1.0, 0.0, 1.0]))
        assert q.q[1] == pytest.approx(2.0)
        assert q.q[2] == pytest.approx(np.sin(2.0))

    def test_soliton_peak(self):
        q = sample(PotentialSpec("soliton"), np.array([-0.5, 0.0, 0.5]))
        assert q.q[1] == -2.0

    def test_soliton_shift(self):
        spec = PotentialSpec("soliton", {"kappa": 2.0, "x0": 1.0})
        assert potential_function(spec)(1.0) == pytest.approx(-8.0)

    def test_periodic_sums_terms(self):
        spec = PotentialSpec("periodic_over_x", {"amplitudes": [0.4, 0.2], "omegas": [1.0, 2.0]})
        x = np.array([0.0, 0.7])
        expected = [2 * 0.4 + 2 * 0.2 * 2.0, 0.4 * np.sin(1.4) / 0.7 + 0.2 * np.sin(2.8) / 0.7]
        np.testing.assert_allclose(potential_function(spec)(x), expected)

    @pytest.mark.parametrize("kind", [k for k in KINDS if k != "custom_samples"])
    def test_real_and_finite(self, kind):
        q = sample(PotentialSpec(kind), uniform_grid(-30, 30, 0.1))
        assert q.q.dtype == float and np.all(np.isfinite(q.q))

    def test_rybkin_even(self):
        f = potential_function(PotentialSpec("rybkin", {"rho": 1.3}))
        x = np.linspace(0, 40, 801)
        np.testing.assert_array_equal(f(x), f(-x))

    def test_rybkin_matches_numerical_second_derivative(self):
        rho = 1.0
        x = np.linspace(0.5, 6.0, 12)
        h = 1e-4

        def logf(s):
            return np.log(1 + rho * s - 0.5 * rho * np.sin(2 * s))

        fd = -2 * (logf(x + h) - 2 * logf(x) + logf(x - h)) / h**2
        np.testing.assert_allclose(potential_function(PotentialSpec("rybkin"))(x), fd, atol=1e-5)

    def test_rybkin_tail_is_wvn_with_unit_coupling(self):
        f = potential_function(PotentialSpec("rybkin"))
        unit = potential_function(PotentialSpec("wvn", {"A": -4.0, "omega": 1.0}))
        double = potential_function(PotentialSpec("wvn", {"A": -8.0, "omega": 1.0}))
        assert tail_exponent(f, unit) == pytest.approx(-2.0, abs=0.2)
        # coupling 2 leaves an O(1/x) remainder
        assert tail_exponent(f, double) == pytest.approx(-1.0, abs=0.2)

    def test_custom_samples(self):
        x = np.linspace(-1, 1, 21)
        spec = PotentialSpec("custom_samples", {"x": list(x), "q": list(x**2)})
        q = sample(spec, x)
        np.testing.assert_allclose(q.q, x**2, atol=1e-12)

    def test_square_integrable_tail(self):
        q = potential_function(wvn_preset(0.2))
        x = np.linspace(100, 10000, 200001)
        tail = np.cumsum(q(x) ** 2) * (x[1] - x[0])
        # the integral of q^2 beyond X decays like 1/X
        remaining = tail[-1] - tail[[1000, 10000]]
        assert remaining[1] < remaining[0]


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            PotentialSpec("gaussian")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            PotentialSpec("soliton", {"height": 1.0})

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_rybkin_rho(self, rho):
        with pytest.raises(ValueError):
            PotentialSpec("rybkin", {"rho": rho})

    def test_gammas(self):
        assert PotentialSpec("wvn", {"A": -0.8, "omega": 1.0}).gammas == [pytest.approx(0.2)]
        assert wvn_preset(0.2).theorem_compliant
        assert not PotentialSpec("wvn", {"A": 2.4, "omega": 1.0}).theorem_compliant
        assert not PotentialSpec("rybkin").theorem_compliant

    def test_presets(self):
        assert wvn_preset(0.2, sign=-1).parameters["A"] == pytest.approx(-0.8)
        with pytest.raises(ValueError):
            wvn_preset(0.5)
        with pytest.raises(ValueError):
            periodic_preset([1.2, 1.0], [1.0, 2.0])
        assert periodic_preset([0.4, 0.4], [1.0, 2.0]).theorem_compliant


class TestRybkinJost:
    def test_unit_at_origin(self):
        for k in (0.5, 2.0, 3j, 0.3 + 0.2j):
            p, m = rybkin_jost(1.0, 0.0, k)
            assert p == pytest.approx(1.0) and m == pytest.approx(1.0)

    def test_normalization_at_infinity(self):
        x = 1e6
        p, _ = rybkin_jost(1.0, x, 2.0)
        assert abs(p * np.exp(-2j * x) - 1.0) < 1e-5

    def test_solves_schrodinger(self):
        # -psi'' + q psi = k^2 psi, checked by finite differences
        q = potential_function(PotentialSpec("rybkin"))
        x = np.linspace(0.3, 8.0, 30)
        h = 1e-3
        for k in (0.5, 2.0, 3j):
            p = lambda s: rybkin_jost(1.0, s, k)[0]
            d2 = (p(x + h) - 2 * p(x) + p(x - h)) / h**2
            res = -d2 + q(x) * p(x) - k * k * p(x)
            assert np.max(np.abs(res)) < 1e-4 * max(1.0, np.max(np.abs(p(x))))

    def test_half_lines(self):
        p, m = rybkin_jost(1.0, np.array([-1.0, 1.0]), 2.0)
        assert np.isnan(p[0]) and np.isnan(m[1])

    @pytest.mark.parametrize("k", [1.0, -1.0])
    def test_poles(self, k):
        with pytest.raises(PoleAtResonance):
            rybkin_jost(1.0, 0.5, k)


class TestKnownScattering:
    def test_soliton(self):
        f = known_scattering(PotentialSpec("soliton"))
        assert f.bound_states == [(1.0, 2.0)]
        assert f.reflection(np.array([0.5]))[0] == 0

    def test_wvn_jump_size(self):
        f = known_scattering(wvn_preset(0.25))
        (res,) = f.resonances
        assert res.jump_size == pytest.approx(np.sqrt(2.0))
        assert res.transmission_order == pytest.approx(0.5)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_wvn_sign_limit(self, sign):
        (res,) = known_scattering(wvn_preset(0.2, sign=sign)).resonances
        assert res.sign_limit == -sign

    def test_rybkin_facts(self):
        f = known_scattering(PotentialSpec("rybkin"))
        assert f.n_bound_states == 1
        assert f.bound_states[0][0] == pytest.approx(1.0)
        k = np.array([0.5, 2.0, 3.0])
        np.testing.assert_allclose(np.abs(f.reflection(k)) ** 2 + np.abs(f.transmission(k)) ** 2, 1.0)
        assert f.reflection(np.array([1.0]))[0] == pytest.approx(-1.0)

    def test_custom_has_no_facts(self):
        spec = PotentialSpec("custom_samples", {"x": [0.0, 1.0], "q": [0.0, 0.0]})
        with pytest.raises(NoKnownFacts):
            known_scattering(spec)


class TestProfile:
    def test_rejects_nonuniform(self):
        with pytest.raises(ValueError):
            PotentialProfile([0.0, 1.0, 3.0], [0.0, 0.0, 0.0])

    def test_rejects_complex(self):
        with pytest.raises(ValueError):
            PotentialProfile([0.0, 1.0], [0.0, 1j])

    def test_spline_evaluator_zero_outside(self):
        q = PotentialProfile(np.linspace(0, 1, 11), np.ones(11))
        f = q.evaluator()
        assert f(0.55) == pytest.approx(1.0) and f(2.0) == 0.0
