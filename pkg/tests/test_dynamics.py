"""RK4 Euler-Korteweg solver, split-step NLS and the Madelung transform."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eklab.constitutive import ConstantCapillarity, GammaLaw, Laws, LinearLaw, QHDCapillarity, VacuumError, total_energy
from eklab.dynamics import (
    Trajectory,
    WaveField,
    cfl_dt,
    ek_rhs,
    evolve_nls,
    madelung,
    madelung_trajectory,
    nls_energy,
    nls_mass,
    nls_split_step,
    simulate,
    step_rk4,
)
from eklab.fields import EKState, integrate_array, make_grid

LAWS = Laws(GammaLaw(1.0, 2.0), ConstantCapillarity(0.01))


def cosine_state(n=32, amp=0.1, vel=0.05):
    grid = make_grid(1, n)
    x = grid.nodes()
    rho = 1 + amp * np.cos(x)
    return EKState.from_arrays(grid, rho, rho * vel * np.sin(x))


class TestRightHandSide:
    def test_constant_state_is_steady(self):
        grid = make_grid(2, 8)
        state = EKState.from_arrays(grid, np.full(grid.shape, 1.3), np.full((2,) + grid.shape, 0.4))
        drho, dm = ek_rhs(state, LAWS)
        assert np.max(np.abs(drho)) < 1e-14 and np.max(np.abs(dm)) < 1e-13

    def test_analytic_oracle_at_rest(self):
        """m = 0: dm/dt = -p' + rho kappa rho''' for constant kappa."""
        state = cosine_state(64, vel=0.0)
        x = state.grid.nodes()
        rho = 1 + 0.1 * np.cos(x)
        expected = -2 * rho * (-0.1 * np.sin(x)) + rho * 0.01 * (0.1 * np.sin(x))
        drho, dm = ek_rhs(state, LAWS)
        np.testing.assert_allclose(drho, 0.0, atol=1e-14)
        np.testing.assert_allclose(dm[0], expected, atol=1e-13)

    def test_analytic_oracle_transport(self):
        """Uniform velocity c: the momentum flux derivative is c^2 rho'."""
        grid = make_grid(1, 64)
        x = grid.nodes()
        rho = 1 + 0.1 * np.cos(x)
        laws = Laws(LinearLaw(1.0), ConstantCapillarity(1e-3))
        state = EKState.from_arrays(grid, rho, 0.5 * rho)
        drho, dm = ek_rhs(state, laws)
        np.testing.assert_allclose(drho, 0.5 * 0.1 * np.sin(x), atol=1e-13)
        expected = 0.25 * 0.1 * np.sin(x) + rho * 1e-3 * 0.1 * np.sin(x)
        np.testing.assert_allclose(dm[0], expected, atol=1e-13)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2]))
    def test_conserved_integrals(self, seed, dim):
        grid = make_grid(dim, 16)
        rng = np.random.default_rng(seed)
        rho = 1 + 0.2 * rng.random(grid.shape)
        m = 0.1 * rng.normal(size=(dim,) + grid.shape)
        drho, dm = ek_rhs(EKState.from_arrays(grid, rho, m), LAWS)
        assert abs(integrate_array(drho, grid)) < 1e-12
        assert np.max(np.abs(integrate_array(dm, grid))) < 1e-10


class TestRK4:
    def test_constant_state_is_fixed_point(self):
        grid = make_grid(1, 16)
        state = EKState.from_arrays(grid, np.full(16, 2.0), np.full(16, 0.3))
        out = step_rk4(state, 1e-3, LAWS)
        np.testing.assert_allclose(out.rho.values, 2.0, rtol=1e-15)
        np.testing.assert_allclose(out.m.data, 0.3, rtol=1e-13)

    def test_mass_conserved_per_step(self):
        state = cosine_state()
        out = step_rk4(state, 1e-3, LAWS)
        m0 = integrate_array(state.rho.values, state.grid)
        assert abs(integrate_array(out.rho.values, state.grid) - m0) < 1e-13 * m0

    def test_fourth_order_self_convergence(self):
        state = cosine_state(32, amp=0.2, vel=0.2)
        T = 0.2
        ref = simulate(state, T, T / 640, LAWS)
        errors = []
        for n in (10, 20, 40):
            run = simulate(state, T, T / n, LAWS)
            errors.append(np.max(np.abs(run.rho_array[-1] - ref.rho_array[-1])))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(np.abs(orders - 4) < 0.3)

    def test_vacuum_rejected(self):
        grid = make_grid(1, 8)
        state = EKState.from_arrays(grid, np.zeros(8), np.zeros(8))
        with pytest.raises(VacuumError):
            step_rk4(state, 1e-3, LAWS)

    def test_cfl_scales_with_square_spacing(self):
        coarse, fine = cosine_state(32), cosine_state(64)
        ratio = cfl_dt(coarse, LAWS) / cfl_dt(fine, LAWS)
        assert 3.5 < ratio < 4.5


class TestSimulate:
    def test_zero_horizon(self):
        traj = simulate(cosine_state(), 0.0, 1e-3, LAWS)
        assert traj.n_samples == 1
        np.testing.assert_array_equal(traj.rho_array[0], cosine_state().rho.values)

    def test_step_only_shrinks(self):
        traj = simulate(cosine_state(), 0.1, 0.03, LAWS, sample_every=2)
        assert traj.diagnostics["dt"] <= 0.03
        assert traj.diagnostics["n_steps"] % 2 == 0
        assert traj.T == pytest.approx(0.1, rel=1e-12)

    def test_subsampling_commutes_with_integration(self):
        state = cosine_state()
        every = simulate(state, 0.04, 0.005, LAWS, sample_every=1)
        coarse = simulate(state, 0.04, 0.005, LAWS, sample_every=2)
        np.testing.assert_array_equal(every.subsample(2).rho_array, coarse.rho_array)
        np.testing.assert_array_equal(every.subsample(2).m_array, coarse.m_array)

    def test_diagnostics(self):
        traj = simulate(cosine_state(), 0.05, 0.005, LAWS)
        d = traj.diagnostics
        assert len(d["mass"]) == len(d["total_energy"]) == traj.n_samples
        assert np.ptp(d["mass"]) < 1e-13
        e0 = total_energy(cosine_state(), LAWS)
        assert d["total_energy"][0] == pytest.approx(e0, rel=1e-14)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            simulate(cosine_state(), -1.0, 1e-3, LAWS)
        with pytest.raises(ValueError):
            simulate(cosine_state(), 1.0, 0.0, LAWS)
        with pytest.raises(ValueError):
            simulate(cosine_state(), 1.0, 1e-3, LAWS, sample_every=0)


class TestTrajectory:
    def test_shape_validation(self):
        grid = make_grid(1, 8)
        with pytest.raises(ValueError):
            Trajectory(grid, 0.0, 0.1, np.ones((3, 8)), np.ones((2, 1, 8)))

    def test_times(self):
        grid = make_grid(1, 8)
        traj = Trajectory(grid, 1.0, 0.25, np.ones((5, 8)), np.zeros((5, 1, 8)))
        np.testing.assert_allclose(traj.times, [1.0, 1.25, 1.5, 1.75, 2.0])
        assert traj.T == 2.0


class TestNLS:
    law = GammaLaw(0.5, 2.0)

    def test_plane_wave_is_exact(self):
        """psi = a exp(i(kx - w t)) with eps0 w = eps0^2 k^2 / 2 + h'(a^2)."""
        grid = make_grid(1, 32)
        x = grid.nodes()
        a, k, eps0, T = 1.2, 3, 0.7, 0.5
        omega = (0.5 * eps0**2 * k**2 + self.law.dh(a**2)) / eps0
        waves, _ = evolve_nls(WaveField(grid, a * np.exp(1j * k * x)), T, 0.01, eps0, self.law)
        np.testing.assert_allclose(waves[-1].psi, a * np.exp(1j * (k * x - omega * T)), atol=1e-11)

    def test_single_step_mass(self):
        grid = make_grid(1, 64)
        x = grid.nodes()
        psi = WaveField(grid, (1 + 0.3 * np.cos(x)) * np.exp(1j * np.sin(2 * x)))
        out = nls_split_step(psi, 1e-3, 1.0, self.law)
        assert abs(nls_mass(out) - nls_mass(psi)) < 1e-13 * nls_mass(psi)

    def test_energy_drift_small(self):
        grid = make_grid(1, 128)
        x = grid.nodes()
        psi = WaveField(grid, (1 + 0.1 * np.cos(x)).astype(complex))
        waves, _ = evolve_nls(psi, 1.0, 1e-3, 1.0, self.law, sample_every=100)
        e = np.array([nls_energy(w, 1.0, self.law) for w in waves])
        assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8

    def test_fused_steps_match_single_steps(self):
        grid = make_grid(1, 32)
        x = grid.nodes()
        psi = WaveField(grid, (1 + 0.2 * np.cos(x)).astype(complex))
        waves, dt = evolve_nls(psi, 0.01, 1e-3, 1.0, self.law, sample_every=10)
        step = psi
        for _ in range(10):
            step = nls_split_step(step, dt, 1.0, self.law)
        np.testing.assert_allclose(waves[-1].psi, step.psi, atol=1e-13)


class TestMadelung:
    def test_plane_wave(self):
        grid = make_grid(1, 32)
        state = madelung(WaveField(grid, np.exp(1j * grid.nodes())), 1.0)
        np.testing.assert_allclose(state.rho.values, 1.0, rtol=1e-14)
        np.testing.assert_allclose(state.velocity[0], 1.0, rtol=1e-12)

    def test_real_wave_has_no_velocity(self):
        grid = make_grid(1, 32)
        state = madelung(WaveField(grid, 1 + 0.2 * np.cos(grid.nodes())), 2.0)
        assert np.max(np.abs(state.m.data)) < 1e-15

    def test_phase_gradient(self):
        grid = make_grid(1, 64)
        x = grid.nodes()
        state = madelung(WaveField(grid, (1 + 0.1 * np.cos(x)) * np.exp(1j * np.sin(x))), 1.0)
        np.testing.assert_allclose(state.velocity[0], np.cos(x), atol=1e-12)

    @pytest.mark.parametrize("eps0", [0.5, 1.0, 2.0])
    def test_energy_consistency(self, eps0):
        """The NLS energy equals the QHD energy of the Madelung state."""
        grid = make_grid(1, 128)
        x = grid.nodes()
        law = GammaLaw(0.5, 2.0)
        psi = WaveField(grid, (1 + 0.2 * np.cos(x)) * np.exp(0.3j * np.sin(2 * x)))
        ek = total_energy(madelung(psi, eps0), Laws(law, QHDCapillarity(eps0)))
        assert ek == pytest.approx(nls_energy(psi, eps0, law), rel=1e-10)

    def test_vacuum_refused(self):
        grid = make_grid(1, 32)
        with pytest.raises(VacuumError):
            madelung(WaveField(grid, np.cos(grid.nodes() / 2) ** 2 * np.ones(32)), 1.0)

    def test_trajectory(self):
        grid = make_grid(1, 64)
        x = grid.nodes()
        traj = madelung_trajectory(WaveField(grid, (1 + 0.1 * np.cos(x)).astype(complex)), 0.1, 1e-3, 1.0,
                                   GammaLaw(0.5, 2.0), sample_every=20)
        assert traj.n_samples == 6
        assert traj.dt_sample == pytest.approx(0.02, rel=1e-12)
        np.testing.assert_allclose(traj.diagnostics["total_energy"], traj.diagnostics["nls_energy"], rtol=1e-10)
        assert math.isclose(traj.diagnostics["mass"][0], traj.diagnostics["nls_mass"][0], rel_tol=1e-13)
