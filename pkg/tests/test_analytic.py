import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fragcorr import (
    PreconditionError,
    alpha,
    alpha_bounds,
    alpha_free,
    derive_params,
    perfect_correlation_density,
    phase_coeff,
    wavefunction,
    wavefunction_density,
    width_trajectory,
)

params_strategy = st.builds(
    derive_params,
    m=st.floats(0.1, 10),
    hbar=st.floats(0.1, 10),
    kappa=st.floats(1e-3, 10),
    a=st.floats(0.1, 10),
)


def printed_phase_coeff(p, t):
    """Two-term form of the phase coefficient, valid away from sin(wt) = 0."""
    M, w, a, hbar = p.M, p.omega, p.a, p.hbar
    s, c = math.sin(w * t), math.cos(w * t)
    first = -(M**3 * w**3) / (8 * hbar**3 * s**3) * (c / (1 / a**4 + M**2 * w**2 * c**2 / (4 * hbar**2 * s**2)))
    return first + M * w * c / (2 * hbar * s)


class TestAlpha:
    def test_initial_width(self, stiff, soft, free):
        for p in (stiff, soft, free):
            assert alpha(p, 0.0) == pytest.approx(1 / p.a**2, rel=1e-15)

    def test_quarter_period_reaches_upper_bound(self, stiff):
        assert alpha(stiff, math.pi / 4) == pytest.approx(4.0, rel=1e-14)
        assert alpha_bounds(stiff)[1] == pytest.approx(4.0, rel=1e-15)

    def test_eighth_period(self, stiff):
        # 16 / (4 * 1/2 + 16 * 1/2)
        assert alpha(stiff, math.pi / 8) == pytest.approx(1.6, rel=1e-14)

    def test_critical_constant(self, critical):
        t = np.linspace(0, 20, 401)
        assert np.allclose(alpha(critical, t), 1.0, rtol=1e-12, atol=0)

    def test_vectorized_matches_scalar(self, stiff):
        t = np.array([0.1, 0.7, 3.0])
        assert np.array_equal(alpha(stiff, t), [alpha(stiff, float(x)) for x in t])

    def test_negative_time_rejected(self, stiff):
        with pytest.raises(PreconditionError):
            alpha(stiff, -1.0)

    @settings(max_examples=200)
    @given(p=params_strategy, t=st.floats(0, 1e3))
    def test_bounds_and_period(self, p, t):
        lo, hi = alpha_bounds(p)
        val = alpha(p, t)
        assert min(lo, hi) * (1 - 1e-12) <= val <= max(lo, hi) * (1 + 1e-12)
        assert alpha(p, t + math.pi / p.omega) == pytest.approx(val, rel=1e-9)


class TestAlphaFree:
    def test_values(self, free):
        assert alpha_free(free, 0.0) == 1.0
        assert alpha_free(free, 1.0) == pytest.approx(0.5, rel=1e-15)

    def test_free_dispatch(self, free):
        t = np.linspace(0, 5, 11)
        assert np.array_equal(alpha(free, t), alpha_free(free, t))

    def test_monotone(self, free):
        assert np.all(np.diff(alpha_free(free, np.linspace(0, 50, 500))) < 0)

    @pytest.mark.parametrize("wt", [1e-3, 1e-2])
    def test_small_frequency_limit(self, wt):
        # Series: relative gap ~ (wt)^2 (1 + b^2 t^2 / 3) / (1 + b^2 t^2) with b = 2 hbar / (M a^2).
        t = 1.0
        p = derive_params(1.0, 1.0, 2.0 * (wt / t) ** 2 / 8.0, 1.0)
        gap = abs(alpha(p, t) - alpha_free(p, t)) / alpha_free(p, t)
        assert gap < 1e-3
        assert gap == pytest.approx(wt**2 * (4 / 3) / 2, rel=1e-2)


class TestPhaseCoeff:
    def test_initial_phase_zero(self, stiff, free):
        assert phase_coeff(stiff, 0.0) == 0.0
        assert phase_coeff(free, 0.0) == 0.0

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_vanishes_at_half_periods(self, stiff, n):
        t = n * math.pi / stiff.omega
        assert abs(phase_coeff(stiff, t)) < 1e-12

    @pytest.mark.parametrize("n", [1, 3])
    def test_continuous_through_resonance(self, stiff, n):
        tn = n * math.pi / stiff.omega
        for eps in (1e-8, -1e-8):
            assert abs(phase_coeff(stiff, tn + eps / stiff.omega)) < 1e-6 / stiff.a**2
        # two-term form loses all digits there
        two_term = printed_phase_coeff(stiff, tn + 1e-8 / stiff.omega)
        combined = phase_coeff(stiff, tn + 1e-8 / stiff.omega)
        assert abs(two_term - combined) >= 0.5 * abs(combined)

    @settings(max_examples=100)
    @given(p=params_strategy, frac=st.floats(0.05, 0.95))
    def test_equals_two_term_form_off_resonance(self, p, frac):
        t = frac * math.pi / p.omega
        expected = printed_phase_coeff(p, t)
        scale = max(abs(expected), alpha(p, t))
        assert abs(phase_coeff(p, t) - expected) <= 1e-8 * scale

    @pytest.mark.parametrize("fixture", ["stiff", "soft", "free"])
    @pytest.mark.parametrize("t", [0.3, 1.1, 2.7])
    def test_continuity_equation(self, request, fixture, t):
        """d rho/dt + d j/dX = 0 with j = (hbar/M) Im(psi* dpsi/dX), by central differences."""
        p = request.getfixturevalue(fixture)
        X = np.linspace(-2, 2, 41)
        h = 1e-5

        def rho(tt, xx):
            return np.abs(wavefunction(p, tt, xx)) ** 2

        def current(tt, xx):
            psi = wavefunction(p, tt, xx)
            dpsi = (wavefunction(p, tt, xx + h) - wavefunction(p, tt, xx - h)) / (2 * h)
            return p.hbar / p.M * np.imag(np.conj(psi) * dpsi)

        drho = (rho(t + h, X) - rho(t - h, X)) / (2 * h)
        dj = (current(t, X + 1e-4) - current(t, X - 1e-4)) / 2e-4
        assert np.max(np.abs(drho + dj)) < 1e-5 * np.max(np.abs(drho) + 1)


class TestDensities:
    def test_origin_value(self, stiff):
        assert wavefunction_density(stiff, 0.0, 0.0) == pytest.approx((2 / math.pi) ** 1.5, rel=1e-15)
        assert wavefunction_density(stiff, 0.0, 0.0) == pytest.approx(0.5079, abs=1e-4)

    @pytest.mark.parametrize("t", [0.0, 0.4, 1.3, 7.0])
    def test_unit_norm_3d(self, stiff, free, t):
        for p in (stiff, free):
            val, _ = integrate.quad(lambda r: 4 * math.pi * r**2 * wavefunction_density(p, t, r), 0, np.inf)
            assert val == pytest.approx(1.0, rel=1e-9)

    def test_unit_norm_1d(self, soft):
        val, _ = integrate.quad(lambda x: wavefunction_density(soft, 2.0, x, dims=1), -np.inf, np.inf)
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_stiff_peak_at_quarter_period(self, stiff):
        hi = alpha_bounds(stiff)[1]
        assert wavefunction_density(stiff, math.pi / 4, 0.0) == pytest.approx((2 * hi / math.pi) ** 1.5, rel=1e-13)

    def test_perfect_correlation_stiff(self, stiff):
        val = perfect_correlation_density(stiff, math.pi / 4, dims=3)
        assert val == pytest.approx((8 / math.pi) ** 1.5, rel=1e-13)
        assert val == pytest.approx(4.06359, abs=1e-5)

    def test_perfect_correlation_free_decays(self, free):
        vals = perfect_correlation_density(free, np.linspace(0, 1e4, 1000))
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 1e-11

    def test_perfect_correlation_critical_constant(self, critical):
        vals = perfect_correlation_density(critical, np.linspace(0, 30, 300))
        assert np.ptp(vals) <= 1e-12 * vals[0]

    def test_perfect_correlation_oscillation_bounds(self, soft):
        lo, hi = alpha_bounds(soft)
        vals = perfect_correlation_density(soft, np.linspace(0, 30, 3001), dims=1)
        assert vals.min() >= (2 * min(lo, hi) / math.pi) ** 0.5 * (1 - 1e-12)
        assert vals.max() <= (2 * max(lo, hi) / math.pi) ** 0.5 * (1 + 1e-12)

    def test_invalid_dims(self, stiff):
        with pytest.raises(PreconditionError):
            perfect_correlation_density(stiff, 0.0, dims=2)


class TestWidthTrajectory:
    def test_stiff_metadata(self, stiff):
        tr = width_trajectory(stiff, np.linspace(0, 3, 31))
        assert (tr.alpha_minus, tr.alpha_plus) == pytest.approx((1.0, 4.0))
        assert tr.period == pytest.approx(math.pi / 2)
        assert tr.alpha.shape == (31,)

    def test_free_unbounded_period(self, free):
        tr = width_trajectory(free, [0.0, 1.0])
        assert tr.period == math.inf and tr.free

    def test_unordered_times_rejected(self, stiff):
        with pytest.raises(PreconditionError):
            width_trajectory(stiff, [1.0, 0.5])
