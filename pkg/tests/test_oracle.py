import math

import numpy as np
import pytest

from fragcorr import (
    DomainTooSmallError,
    MomentState,
    NumericalError,
    PreconditionError,
    ResolutionError,
    ShapeError,
    alpha,
    derive_params,
    min_uncertainty_state,
    variance_X,
    wavefunction,
)
from fragcorr import oracle
from fragcorr.moments import variance_X_printed


def evolved(params, t, **grid):
    spec = oracle.default_grid(params, t, **grid)
    return oracle.split_step_evolve(oracle.gaussian_state(spec, params), params, t)


def analytic_density(params, t, x):
    al = alpha(params, t)
    return math.sqrt(2 * al / math.pi) * np.exp(-2 * al * x**2)


class TestGridSpec:
    @pytest.mark.parametrize("n", [64, 255, 300, 1000])
    def test_bad_sizes(self, n):
        with pytest.raises(ResolutionError):
            oracle.GridSpec(n=n, extent=10.0, dt=1e-3)

    def test_geometry(self):
        g = oracle.GridSpec(n=256, extent=8.0, dt=1e-3)
        assert g.dx == pytest.approx(1 / 16)
        assert g.x[0] == -8.0 and g.x[-1] == pytest.approx(8.0 - g.dx)

    def test_default_extent_covers_both_widths(self, stiff, soft):
        assert oracle.default_grid(stiff).extent == pytest.approx(20 * max(1.0, 2 / (2 * 2 * 1)))
        g = oracle.default_grid(soft)
        assert g.extent == pytest.approx(20 * max(1.0, 2 / (2 * soft.omega)))
        assert g.dt * soft.omega <= 1e-2

    def test_step_too_coarse(self, stiff):
        spec = oracle.GridSpec(n=1024, extent=20.0, dt=0.1)
        with pytest.raises(ResolutionError):
            oracle.split_step_evolve(oracle.gaussian_state(spec, stiff), stiff, 1.0)


class TestSplitStep:
    @pytest.mark.parametrize("t", [1.0, 3.0])
    def test_free_matches_spreading_law(self, free, t):
        wf = evolved(free, t)
        err = math.sqrt(np.sum((wf.density - analytic_density(free, t, wf.x)) ** 2) * wf.spec.dx)
        assert err < 1e-8

    def test_critical_is_stationary(self, critical):
        spec = oracle.default_grid(critical, math.pi)
        wf0 = oracle.gaussian_state(spec, critical)
        snaps = oracle.propagate(wf0, critical, np.linspace(0, math.pi, 9)[1:])
        worst = max(np.max(np.abs(s.density - wf0.density)) for s in snaps)
        assert worst < 1e-6

    def test_returns_after_period(self, stiff):
        T = math.pi / stiff.omega
        spec = oracle.default_grid(stiff, T)
        wf0 = oracle.gaussian_state(spec, stiff)
        wf = oracle.split_step_evolve(wf0, stiff, T)
        assert np.max(np.abs(wf.density - wf0.density)) < 1e-6
        assert oracle.fidelity(wf, wf0) > 1 - 1e-10

    def test_norm_conserved(self, soft):
        wf = evolved(soft, 5.0)
        assert abs(wf.norm - 1.0) < 1e-10

    def test_energy_conserved_short(self, stiff):
        d = oracle.propagation_diagnostics(stiff, math.pi, samples=20,
                                           spec=oracle.default_grid(stiff, math.pi, n=1024))
        assert d.norm_drift < 1e-10
        assert d.energy_drift < 1e-6

    def test_energy_of_ground_state(self, critical):
        spec = oracle.default_grid(critical)
        assert oracle.energy(oracle.gaussian_state(spec, critical), critical) == pytest.approx(0.5, rel=1e-12)

    def test_second_order_convergence(self, stiff):
        t = 0.9
        T0 = math.pi / stiff.omega
        errs = []
        for f in (3e-3, 1.5e-3, 7.5e-4):
            wf = evolved(stiff, t, n=1024, dt=f * T0)
            errs.append(abs(oracle.extract_alpha(wf).alpha / alpha(stiff, t) - 1))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(orders - 2.0) < 0.1)

    def test_halving_fine_step_changes_little(self, stiff):
        t = 0.9
        T0 = math.pi / stiff.omega
        a1 = oracle.extract_alpha(evolved(stiff, t, n=1024, dt=5e-5 * T0)).alpha
        a2 = oracle.extract_alpha(evolved(stiff, t, n=1024, dt=2.5e-5 * T0)).alpha
        assert abs(a1 / a2 - 1) < 1e-8

    def test_domain_too_small(self, free):
        spec = oracle.GridSpec(n=1024, extent=6.0, dt=1.0)
        with pytest.raises(DomainTooSmallError):
            oracle.split_step_evolve(oracle.gaussian_state(spec, free), free, 5.0)

    def test_momentum_aliasing(self, stiff):
        spec = oracle.GridSpec(n=256, extent=200.0, dt=1e-3)
        with pytest.raises(ResolutionError):
            oracle.split_step_evolve(oracle.gaussian_state(spec, stiff), stiff, 0.01)

    def test_norm_failure_reported(self, stiff, monkeypatch):
        run = oracle._Stepper.run
        monkeypatch.setattr(oracle._Stepper, "run", lambda self, psi, dt, n, **kw: 1.001 * run(self, psi, dt, n))
        with pytest.raises(NumericalError, match="norm drift"):
            evolved(stiff, 0.1)

    def test_backwards_rejected(self, stiff):
        wf = evolved(stiff, 0.2)
        with pytest.raises(PreconditionError):
            oracle.split_step_evolve(wf, stiff, 0.1)


class TestExtractAlpha:
    def test_initial(self, stiff):
        est = oracle.extract_alpha(oracle.gaussian_state(oracle.default_grid(stiff), stiff))
        assert est.alpha == pytest.approx(1.0, rel=1e-12)
        assert est.alpha_fit == pytest.approx(1.0, rel=1e-10)

    def test_stiff_quarter_period(self, stiff):
        est = oracle.extract_alpha(evolved(stiff, math.pi / 4))
        assert est.alpha == pytest.approx(4.0, abs=1e-6)
        assert est.alpha_fit == pytest.approx(est.alpha, rel=1e-6)

    def test_free(self, free):
        est = oracle.extract_alpha(evolved(free, 1.0))
        assert est.alpha == pytest.approx(0.5, abs=1e-6)
        assert abs(est.excess_kurtosis) < 1e-10

    def test_non_gaussian_rejected(self, stiff):
        spec = oracle.default_grid(stiff)
        x = spec.x
        psi = np.exp(-(x - 2) ** 2) + np.exp(-(x + 2) ** 2)
        with pytest.raises(ShapeError):
            oracle.extract_alpha(oracle.GridWavefunction(psi.astype(complex), spec))


class TestPhaseFidelity:
    @pytest.mark.parametrize("fixture", ["stiff", "soft", "free"])
    def test_full_wavefunction(self, request, fixture):
        p = request.getfixturevalue(fixture)
        t_end = 3.0 if p.is_free else math.pi / p.omega
        spec = oracle.default_grid(p, t_end)
        times = np.linspace(0, t_end, 7)[1:]
        for wf in oracle.propagate(oracle.gaussian_state(spec, p), p, times):
            assert oracle.fidelity(wf, wavefunction(p, wf.t, wf.x)) > 1 - 1e-8

    def test_phase_is_needed(self, soft):
        t = 0.3 * math.pi / soft.omega
        wf = evolved(soft, t)
        stripped = np.abs(wavefunction(soft, t, wf.x))
        assert oracle.fidelity(wf, stripped) < 1 - 1e-3


class TestMomentOracle:
    def test_stiff(self, stiff):
        var, mean = oracle.moment_oracle(min_uncertainty_state(stiff, 1.0), stiff, 3.0)
        assert var == pytest.approx(0.235362, abs=1e-6)
        assert mean == pytest.approx(3.0, abs=1e-9)
        # printed 4 M^2 denominators disagree with the grid
        printed = variance_X_printed(min_uncertainty_state(stiff), stiff, 3.0)
        assert abs(printed - var) > 1e-3

    def test_free(self, free):
        var, mean = oracle.moment_oracle(min_uncertainty_state(free, 2.0), free, 1.0)
        assert var == pytest.approx(0.5, abs=1e-6)
        assert mean == pytest.approx(2.0, abs=1e-9)
        assert abs(variance_X_printed(min_uncertainty_state(free), free, 1.0) - var) > 0.1

    @pytest.mark.parametrize("kappa", [0.0, 1.0])
    def test_mean_independent_of_coupling(self, kappa):
        p = derive_params(1, 1, kappa, 1)
        _, mean = oracle.moment_oracle(min_uncertainty_state(p, 2.0), p, 0.5)
        assert mean == pytest.approx(1.0, abs=1e-9)

    def test_correlated_squeezed_state(self, soft):
        dX, cov = 0.3, 0.4
        s = MomentState(dX=dX, dP=math.sqrt((0.25 + cov**2) / dX**2), covXP=cov)
        var, _ = oracle.moment_oracle(s, soft, 2.2)
        assert var == pytest.approx(variance_X(s, soft, 2.2), rel=1e-6)

    def test_mixed_state_rejected(self, stiff):
        with pytest.raises(PreconditionError):
            oracle.moment_oracle(MomentState(dX=1.0, dP=1.0), stiff, 1.0)


class TestGridPurity:
    def test_product_state(self):
        n, L = 512, 10.0
        dx = 2 * L / n
        x = -L + dx * (np.arange(n) + 0.5)
        g = np.exp(-x**2)
        tr = oracle.reduced_purities(np.outer(g, g), dx)
        assert tr.purity_x == pytest.approx(1.0, rel=1e-12)
        assert tr.trace_x == pytest.approx(1.0, rel=1e-12)

    def test_schmidt_law(self):
        p = derive_params(1, 1, 0, 1 / math.sqrt(math.pi))
        res = oracle.grid_purity(p, 0.0, box_L=40.0, n=1024)
        assert res.schmidt_1d / 40.0 == pytest.approx(1.0, rel=2e-2)

    def test_two_trace_symmetry_and_bounds(self, stiff):
        psi, dx = oracle.ridge_state(float(alpha(stiff, 0.6)), 30.0, 512)
        tr = oracle.reduced_purities(psi, dx)
        assert tr.purity_x == pytest.approx(tr.purity_y, rel=1e-8)
        assert tr.trace_x == pytest.approx(1.0, rel=1e-12)
        assert 0 < tr.purity_x <= 1

    def test_box_too_small(self, free):
        with pytest.raises(ResolutionError):
            oracle.grid_purity(free, 0.0, box_L=10.0, n=1024)

    def test_too_few_points(self, stiff):
        with pytest.raises(ResolutionError):
            oracle.grid_purity(stiff, 0.0, box_L=40.0, n=256)

    def test_unresolved_ridge(self):
        p = derive_params(1, 1, 0, 0.05)  # alpha = 400: ridge narrower than the grid step
        with pytest.raises(ResolutionError):
            oracle.grid_purity(p, 0.0, box_L=40.0, n=512)

    def test_phase_kept_state_is_invariant_under_free_flow(self, free):
        # Free flow is a product of one-particle unitaries, so the full
        # state's Schmidt number cannot change; the relative density one does.
        s0 = oracle.grid_purity(free, 0.0, 40.0, 1024, check_convergence=False, include_phase=True).schmidt_1d
        s1 = oracle.grid_purity(free, 1.0, 40.0, 1024, check_convergence=False, include_phase=True).schmidt_1d
        d1 = oracle.grid_purity(free, 1.0, 40.0, 1024, check_convergence=False).schmidt_1d
        assert s1 == pytest.approx(s0, rel=1e-2)
        assert d1 < 0.75 * s0
