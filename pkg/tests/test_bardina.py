import math

import numpy as np
import pytest

from bardina.core.errors import ConfigError, CflViolationError, FieldError
from bardina.models.envelope import BoundsEnvelope
from bardina.models.field import SpectralField
from bardina.services.bardina import (
    TruthNorms,
    bounds_from_initial,
    build_forcing,
    eval_M1,
    eval_M2,
    eval_M3,
    iterate_truth,
    observer_physics,
    resolve_c_gn,
    rhs_truth,
    simulate_truth,
    steady_state,
    step_truth,
    uniform_steps,
)
from bardina.services.diagnostics import verify_envelopes
from bardina.services.spectral import apply_A, helmholtz_inverse, sine_mode, sobolev_norm_sq
from bardina.utils.tools import non_increasing
from tests.conftest import random_field, relative_error


def energy(u: SpectralField, alpha_sq: float) -> float:
    return sobolev_norm_sq(u, 0) + alpha_sq * sobolev_norm_sq(u, 1)


class TestRightHandSide:
    def test_unforced_shear_decays_linearly(self, grid8, unforced):
        u = sine_mode(grid8, (1, 0, 0), 0.3, direction=(0, 1, 0))
        u_t = rhs_truth(u, unforced)
        lam = grid8.lambda1
        assert relative_error(u_t.coeffs, -unforced.nu * lam * u.coeffs) <= 1e-12

    def test_zero_state_gives_filtered_forcing(self, grid8, lowmode_params):
        forcing = build_forcing(grid8, lowmode_params)
        u_t = rhs_truth(SpectralField.zeros(grid8), lowmode_params)
        expected = helmholtz_inverse(forcing, lowmode_params.alpha_sq)
        np.testing.assert_allclose(u_t.coeffs, expected.coeffs, rtol=0, atol=1e-15)

    def test_manufactured_steady_state(self, grid16, steady_params):
        u_star = steady_state(grid16, steady_params)
        forcing = build_forcing(grid16, steady_params)
        residual = rhs_truth(u_star, steady_params)
        assert residual.max_abs() <= 1e-12 * forcing.max_abs()

    def test_steady_state_needs_manufactured_forcing(self, grid8, unforced):
        with pytest.raises(FieldError):
            steady_state(grid8, unforced)

    def test_requires_divergence_free_state(self, grid8, unforced):
        coeffs = np.zeros(grid8.shape, dtype=np.complex128)
        with pytest.raises(FieldError):
            rhs_truth(SpectralField(grid8, coeffs), unforced)

    def test_observer_physics_hides_alpha(self, grid8, steady_params):
        physics = observer_physics(grid8, steady_params)
        assert physics.nu == steady_params.nu
        assert not hasattr(physics, "alpha")
        assert physics.f_sup == pytest.approx(math.sqrt(sobolev_norm_sq(physics.forcing, 0)))


class TestStepping:
    def test_shear_mode_matches_analytic_decay(self, grid8, unforced):
        amplitude = 0.3
        u0 = sine_mode(grid8, (1, 0, 0), amplitude, direction=(0, 1, 0))
        dt, steps = 0.01, 200
        u = u0
        for i in range(steps):
            u = step_truth(u, dt, unforced, step=i, time=i * dt)
        decay = math.exp(-unforced.nu * grid8.lambda1 * steps * dt)
        assert relative_error(u.coeffs, decay * u0.coeffs) <= 1e-12

    def test_zero_step_is_identity(self, grid8, steady_params):
        u = random_field(grid8, 3, norm=0.5)
        assert step_truth(u, 0.0, steady_params) is u

    def test_steady_state_is_fixed_point(self, grid8, steady_params):
        u_star = steady_state(grid8, steady_params)
        forcing = build_forcing(grid8, steady_params)
        u = u_star
        for i in range(1000):
            u = step_truth(u, 0.01, steady_params, forcing, step=i, time=i * 0.01)
        assert float(np.max(np.abs(u.coeffs - u_star.coeffs))) <= 1e-10 * u_star.max_abs()

    def test_zero_data_stays_zero(self, grid8, unforced):
        trajectory = simulate_truth(SpectralField.zeros(grid8), 0.5, 0.05, unforced)
        assert all(u.is_zero() and u_t.is_zero() for _, u, u_t in trajectory)

    def test_cfl_violation(self, grid8, unforced):
        u = sine_mode(grid8, (1, 0, 0), 10.0)
        with pytest.raises(CflViolationError):
            step_truth(u, 1.0, unforced)

    def test_unforced_energy_is_non_increasing(self, grid8, unforced):
        u0 = random_field(grid8, 5, norm=2.0)
        energies = [energy(u, unforced.alpha_sq) for _, _, u, _ in iterate_truth(u0, 0.02, 100, unforced)]
        assert energies[-1] < energies[0]
        assert non_increasing(energies, floor=1e-14 * energies[0])

    def test_iterate_truth_yields_analytic_derivative(self, grid8, steady_params):
        u0 = random_field(grid8, 2, norm=1.0)
        nodes = list(iterate_truth(u0, 0.01, 3, steady_params))
        assert [i for i, *_ in nodes] == [0, 1, 2, 3]
        for _, t, u, u_t in nodes:
            assert relative_error(u_t.coeffs, rhs_truth(u, steady_params).coeffs) <= 1e-14

    def test_self_convergence_is_second_order(self, grid8, steady_params):
        u_star = steady_state(grid8, steady_params)
        u0 = u_star + random_field(grid8, 4, norm=2.0)
        horizon = 1.0

        def final_state(dt: float) -> np.ndarray:
            return simulate_truth(u0, horizon, dt, steady_params).states[-1].coeffs

        reference = final_state(0.0025)
        errors = [float(np.max(np.abs(final_state(dt) - reference))) for dt in (0.04, 0.02, 0.01)]
        orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
        assert min(orders) >= 1.8


class TestUniformSteps:
    def test_step_reduced_to_land_on_horizon(self):
        dt, n = uniform_steps(1.0, 0.3)
        assert n == 4
        assert dt == pytest.approx(0.25)

    def test_exact_multiple_kept(self):
        dt, n = uniform_steps(1.5, 0.01)
        assert n == 150
        assert dt == pytest.approx(0.01, rel=1e-12)

    def test_zero_horizon(self):
        assert uniform_steps(0.0, 0.1) == (0.1, 0)


class TestEnvelopes:
    envelope = BoundsEnvelope(M_A=1.5, M_B=2.0, M_C=3.0, alpha0=0.2, alpha1=0.3, c_gn=1.0)

    def test_M1_at_zero_time_unforced(self):
        m1 = eval_M1(0.0, self.envelope, 0.0, 0.1, 1.0)
        assert m1 ** 2 == pytest.approx(1.5 ** 2 + 0.3 ** 2 * 2.0 ** 2, rel=1e-15)

    def test_M1_unforced_limit(self):
        assert eval_M1(1e5, self.envelope, 0.0, 0.1, 1.0) == 0.0

    def test_M1_forced_limit(self):
        assert eval_M1(1e5, self.envelope, 0.4, 0.1, 1.0) == pytest.approx(0.4 / 0.1, rel=1e-14)

    def test_M3_unforced_limit(self):
        assert eval_M3(1e5, self.envelope, 0.0, 0.1, 1.0) == pytest.approx(0.0, abs=1e-300)

    def test_M2_by_hand(self):
        nu, lambda1, f_sup, t = 0.1, 1.0, 0.2, 0.5
        c, a0, a1 = 1.0, 0.2, 0.3
        decay = math.exp(-nu * lambda1 * t)
        e0 = 1.5 ** 2 + a1 ** 2 * 2.0 ** 2
        expected = (
            decay * (2.0 ** 2 + a1 ** 2 * 3.0 ** 2)
            + 2 * c ** 4 / (a0 ** 5 * nu ** 2 * lambda1) * decay * e0 ** 2
            + f_sup ** 2 / (nu ** 2 * lambda1)
            + 2 * c ** 4 / (a0 ** 5 * nu ** 6 * lambda1 ** 5) * f_sup ** 4
        )
        assert eval_M2(t, self.envelope, f_sup, nu, lambda1) ** 2 == pytest.approx(expected, rel=1e-14)

    def test_missing_constant_in_strict_mode(self):
        envelope = self.envelope.model_copy(update={"c_gn": None})
        assert resolve_c_gn(envelope) == 1.0
        with pytest.raises(ConfigError):
            resolve_c_gn(envelope, strict=True)

    def test_bounds_from_initial_margin(self, grid8):
        u0 = random_field(grid8, 1, norm=2.0)
        envelope = bounds_from_initial(u0, 0.2, 0.3, margin=1.5)
        assert envelope.M_A == pytest.approx(3.0, rel=1e-12)
        assert envelope.M_C == pytest.approx(1.5 * math.sqrt(sobolev_norm_sq(u0, 2)), rel=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_truth_envelopes_hold_on_forced_run(self, grid8, steady_params, seed):
        u0 = random_field(grid8, seed, norm=1.0)
        physics = observer_physics(grid8, steady_params)
        envelope = bounds_from_initial(u0, 0.2, 0.3, c_gn=1.0)
        samples = [(t, TruthNorms.of(u, u_t)) for _, t, u, u_t in iterate_truth(u0, 0.02, 100, steady_params)]
        audit = verify_envelopes(samples, envelope, physics.f_sup, physics.nu, grid8.lambda1, steady_params.alpha_sq)
        for name in ("energy_M1", "enstrophy_M2", "time_derivative_M3"):
            assert audit.checks[name] == len(samples)
            assert audit.violations[name] == 0

    def test_understated_bounds_are_flagged(self, grid8, unforced):
        u0 = random_field(grid8, 0, norm=1.0)
        physics = observer_physics(grid8, unforced)
        envelope = BoundsEnvelope(M_A=1e-6, M_B=1e-6, M_C=1e-6, alpha0=0.2, alpha1=0.3, c_gn=1.0)
        samples = [(t, TruthNorms.of(u, u_t)) for _, t, u, u_t in iterate_truth(u0, 0.02, 5, unforced)]
        audit = verify_envelopes(samples, envelope, physics.f_sup, physics.nu, grid8.lambda1, unforced.alpha_sq)
        assert audit.violations["energy_M1"] > 0
