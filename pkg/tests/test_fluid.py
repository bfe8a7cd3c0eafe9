"""Tests for the spectral Navier-Stokes solver.

Oracles used here, all independent of the solver:

* Taylor-Green vortex u = sin x cos y e^(-2 nu t), v = -cos x sin y e^(-2 nu t)
  solves the incompressible equations on the 2 pi periodic box exactly; its
  vorticity is 2 sin x sin y e^(-2 nu t) and its pressure is
  (rho / 4)(cos 2x + cos 2y) e^(-4 nu t).
* A uniform body force f0 on a quiescent fluid produces the exact uniform
  flow u(t) = f0 t / rho: every spatial operator vanishes on constants.
* A rigid rotation at rate omega has vorticity 2 omega; a Gaussian-windowed
  copy keeps that value at the window centre where the window is flat.
"""

import logging

import numpy as np
import pytest

from ibflow.fluid import (FluidState, advance_fluid, divergence,
                          max_divergence, project_velocity, vorticity)

TWO_PI = 2.0 * np.pi


def grid(n, l=TWO_PI):
    xs = l * np.arange(n) / n
    return np.meshgrid(xs, xs, indexing="ij")


def taylor_green(n, t=0.0, nu=0.0):
    x, y = grid(n)
    decay = np.exp(-2.0 * nu * t)
    return np.sin(x) * np.cos(y) * decay, -np.cos(x) * np.sin(y) * decay


def make_state(n, u, v, rho=1.0, mu=0.0, **kw):
    return FluidState(nx=n, ny=n, lx=TWO_PI, ly=TWO_PI, rho=rho, mu=mu,
                      u=u, v=v, **kw)


class TestValidation:
    def test_rejects_nonpositive_density(self):
        z = np.zeros((8, 8))
        with pytest.raises(ValueError):
            FluidState(nx=8, ny=8, lx=1.0, ly=1.0, rho=0.0, mu=0.1, u=z, v=z)

    def test_rejects_negative_viscosity(self):
        z = np.zeros((8, 8))
        with pytest.raises(ValueError):
            FluidState(nx=8, ny=8, lx=1.0, ly=1.0, rho=1.0, mu=-1.0, u=z, v=z)

    def test_rejects_rectangular_cells(self):
        z = np.zeros((8, 8))
        with pytest.raises(ValueError, match="square"):
            FluidState(nx=8, ny=8, lx=1.0, ly=2.0, rho=1.0, mu=0.1, u=z, v=z)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            FluidState(nx=8, ny=8, lx=1.0, ly=1.0, rho=1.0, mu=0.1,
                       u=np.zeros((8, 4)), v=np.zeros((8, 8)))

    def test_rejects_nonpositive_dt(self):
        s = FluidState.quiescent(8, 8, 1.0, 1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            advance_fluid(s, 0.0)

    def test_missing_fields_default_to_zero(self):
        s = FluidState.quiescent(8, 8, 1.0, 1.0, 1.0, 0.1)
        assert np.all(s.p == 0.0) and np.all(s.fx == 0.0) and np.all(s.fy == 0.0)


class TestFixedPoints:
    def test_rest_state_stays_at_rest(self):
        s = FluidState.quiescent(16, 16, TWO_PI, TWO_PI, 1.0, 0.01)
        s = advance_fluid(s, 1e-2)
        assert np.all(s.u == 0.0) and np.all(s.v == 0.0) and np.all(s.p == 0.0)

    def test_uniform_flow_is_exact(self):
        # constants are untouched by advection, diffusion, and projection
        n = 16
        u0 = 0.3 * np.ones((n, n))
        s = make_state(n, u0, 0.5 * np.ones((n, n)), mu=0.4)
        s = advance_fluid(s, 1e-2)
        assert np.max(np.abs(s.u - 0.3)) < 1e-14
        assert np.max(np.abs(s.v - 0.5)) < 1e-14

    def test_uniform_force_drives_linear_growth(self):
        n, f0, rho, dt, steps = 16, 2.5, 4.0, 1e-3, 40
        s = FluidState.quiescent(n, n, TWO_PI, TWO_PI, rho, 0.7)
        s = make_state(n, s.u, s.v, rho=rho, mu=0.7, fx=f0 * np.ones((n, n)))
        for _ in range(steps):
            s = advance_fluid(s, dt)
        expect = f0 * steps * dt / rho
        assert abs(np.mean(s.u) - expect) < 1e-14 * steps
        assert np.max(np.abs(s.u - expect)) < 1e-13
        assert np.max(np.abs(s.v)) < 1e-14


class TestTaylorGreen:
    def test_decay_matches_analytic_solution(self):
        n, nu, dt, steps = 32, 0.1, 5e-4, 200
        u, v = taylor_green(n)
        s = make_state(n, u, v, rho=2.0, mu=2.0 * nu)
        for _ in range(steps):
            s = advance_fluid(s, dt)
        ue, ve = taylor_green(n, t=steps * dt, nu=nu)
        # splitting error is about 2 nu^2 t dt = 1e-6 here
        assert np.max(np.abs(s.u - ue)) < 5e-6
        assert np.max(np.abs(s.v - ve)) < 5e-6

    def test_pressure_recovered_from_projection(self):
        # the step's pressure balances the advection of the entering field,
        # so after one step it equals the analytic t=0 pressure to roundoff
        n, rho = 64, 3.0
        u, v = taylor_green(n)
        s = make_state(n, u, v, rho=rho, mu=0.03)
        s = advance_fluid(s, 1e-3)
        x, y = grid(n)
        p_exact = 0.25 * rho * (np.cos(2 * x) + np.cos(2 * y))
        assert np.max(np.abs(s.p - p_exact)) < 1e-10

    def test_error_shrinks_with_refinement(self):
        # dt scales with h^2, so the measured error should drop about 4x
        nu, t_final = 0.1, 0.2

        def run(n, dt):
            u, v = taylor_green(n)
            s = make_state(n, u, v, mu=nu)
            for _ in range(round(t_final / dt)):
                s = advance_fluid(s, dt)
            ue, _ = taylor_green(n, t=t_final, nu=nu)
            return np.max(np.abs(s.u - ue))

        e_coarse = run(32, 4e-3)
        e_fine = run(64, 1e-3)
        ratio = e_coarse / e_fine
        assert 3.4 < ratio < 4.6


class TestVorticity:
    def test_taylor_green_curl(self):
        n = 32
        u, v = taylor_green(n)
        x, y = grid(n)
        w = vorticity(make_state(n, u, v))
        assert np.max(np.abs(w - 2.0 * np.sin(x) * np.sin(y))) < 1e-12

    def test_uniform_flow_has_zero_curl(self):
        n = 16
        w = vorticity(make_state(n, np.ones((n, n)), -2.0 * np.ones((n, n))))
        assert np.max(np.abs(w)) < 1e-13

    def test_windowed_rigid_rotation(self):
        # u = -omega (y - c) w(r), v = omega (x - c) w(r) with a Gaussian
        # window w; at the centre w is flat so the curl is 2 omega there
        n, omega, sigma = 64, 1.7, 0.6
        x, y = grid(n)
        dx, dy = x - np.pi, y - np.pi
        w = np.exp(-(dx**2 + dy**2) / (2.0 * sigma**2))
        state = make_state(n, -omega * dy * w, omega * dx * w)
        curl = vorticity(state)
        centre = np.argmin(dx[:, 0]**2), np.argmin(dy[0, :]**2)
        assert abs(curl[centre] - 2.0 * omega) < 1e-4 * abs(2.0 * omega)


class TestIncompressibility:
    def test_divergence_of_shear_field(self):
        n = 32
        x, y = grid(n)
        state = make_state(n, np.sin(x), np.zeros((n, n)))
        assert np.max(np.abs(divergence(state) - np.cos(x))) < 1e-12

    def test_stream_function_field_is_divergence_free(self):
        n = 32
        u, v = taylor_green(n)
        assert max_divergence(make_state(n, u, v)) < 1e-12

    def test_step_projects_out_divergence(self):
        n = 32
        x, y = grid(n)
        s = make_state(n, np.sin(x), np.sin(y), mu=0.05)
        s = advance_fluid(s, 1e-3)
        assert max_divergence(s) < 1e-10 * max(np.max(np.abs(s.u)), 1.0)

    def test_projection_is_idempotent(self):
        rng = np.random.default_rng(7)
        n = 32
        x, y = grid(n)
        u = sum(rng.normal() * np.sin(i * x + rng.normal())
                * np.cos(j * y + rng.normal())
                for i in range(1, 4) for j in range(1, 4))
        v = sum(rng.normal() * np.cos(i * x + rng.normal())
                * np.sin(j * y + rng.normal())
                for i in range(1, 4) for j in range(1, 4))
        u1, v1 = project_velocity(u, v, TWO_PI, TWO_PI)
        u2, v2 = project_velocity(u1, v1, TWO_PI, TWO_PI)
        scale = np.max(np.abs(u1)) + np.max(np.abs(v1))
        assert np.max(np.abs(u2 - u1)) < 1e-12 * scale
        assert np.max(np.abs(v2 - v1)) < 1e-12 * scale

    def test_projection_removes_pure_gradients(self):
        n = 32
        x, y = grid(n)
        # (u, v) = grad(cos 2x cos y) has no divergence-free part
        u = -2.0 * np.sin(2 * x) * np.cos(y)
        v = -np.cos(2 * x) * np.sin(y)
        up, vp = project_velocity(u, v, TWO_PI, TWO_PI)
        assert np.max(np.abs(up)) < 1e-12
        assert np.max(np.abs(vp)) < 1e-12


class TestConservation:
    def test_momentum_conserved_without_force_or_viscosity(self):
        rng = np.random.default_rng(11)
        n = 32
        x, y = grid(n)
        u = sum(rng.normal(scale=0.2) * np.sin(i * x) * np.cos(j * y)
                for i in range(1, 4) for j in range(1, 4)) + 0.4
        v = sum(rng.normal(scale=0.2) * np.cos(i * x) * np.sin(j * y)
                for i in range(1, 4) for j in range(1, 4)) - 0.2
        u, v = project_velocity(u, v, TWO_PI, TWO_PI)
        s = make_state(n, u, v, mu=0.0)
        mu0, mv0 = np.mean(s.u), np.mean(s.v)
        for _ in range(20):
            s = advance_fluid(s, 2e-3)
        assert abs(np.mean(s.u) - mu0) < 1e-12
        assert abs(np.mean(s.v) - mv0) < 1e-12

    def test_two_runs_are_bitwise_identical(self):
        def run():
            u, v = taylor_green(32)
            s = make_state(32, u, v, mu=0.02)
            for _ in range(5):
                s = advance_fluid(s, 1e-3)
            return s

        a, b = run(), run()
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
        assert np.array_equal(a.p, b.p)


class TestStability:
    def test_excessive_cfl_aborts(self):
        n = 16
        s = make_state(n, 100.0 * np.ones((n, n)), np.zeros((n, n)), mu=0.1)
        with pytest.raises(RuntimeError, match="CFL"):
            advance_fluid(s, 1.0)

    def test_high_cfl_warns(self, caplog):
        n = 16
        h = TWO_PI / n
        s = make_state(n, np.ones((n, n)), np.zeros((n, n)), mu=0.1)
        with caplog.at_level(logging.WARNING, logger="ibflow.fluid"):
            advance_fluid(s, 0.7 * h)
        assert any("CFL" in r.message for r in caplog.records)

    def test_moderate_cfl_is_silent(self, caplog):
        n = 16
        h = TWO_PI / n
        s = make_state(n, np.ones((n, n)), np.zeros((n, n)), mu=0.1)
        with caplog.at_level(logging.WARNING, logger="ibflow.fluid"):
            advance_fluid(s, 0.2 * h)
        assert not caplog.records
