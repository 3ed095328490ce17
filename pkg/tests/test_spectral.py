import math

import numpy as np
import pytest
from pydantic import ValidationError

from bardina.core.errors import FieldError, GridMismatchError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.services.spectral import (
    apply_A,
    bilinear_B,
    check_invariants,
    dealias,
    divergence_defect,
    enforce_hermitian,
    helmholtz_apply,
    helmholtz_inverse,
    inner_product,
    leray_project,
    low_mode_project,
    physical_energy,
    sine_mode,
    sobolev_norm_sq,
)
from tests.conftest import TWO_PI, random_field, random_raw_field, relative_error


def single_mode(grid: GridSpec, K, vector) -> SpectralField:
    """Поле c_K = vector, c_{-K} = conj(vector)."""
    n = grid.n_grid
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[(slice(None),) + tuple(k % n for k in K)] = vector
    coeffs[(slice(None),) + tuple(-k % n for k in K)] = np.conj(vector)
    return SpectralField(grid, coeffs)


class TestGrid:
    def test_odd_grid_rejected(self):
        with pytest.raises(ValidationError):
            GridSpec(L=1.0, n_grid=9)

    def test_dealias_cut_is_strict_two_thirds(self):
        assert GridSpec(L=TWO_PI, n_grid=32).lattice.dealias_cut == 10
        assert GridSpec(L=TWO_PI, n_grid=8).lattice.dealias_cut == 2

    def test_lambda1(self):
        assert GridSpec(L=TWO_PI, n_grid=8).lambda1 == pytest.approx(1.0, rel=1e-15)

    def test_nyquist_and_mean_not_retained(self, grid8):
        retained = grid8.lattice.retained
        assert not retained[0, 0, 0]
        assert not retained[4, 0, 0]
        assert retained[3, 0, 0]


class TestLeray:
    def test_gradient_field_vanishes(self, grid8):
        phi = enforce_hermitian(random_raw_field(grid8, 1).coeffs, grid8)[0]
        gradient = SpectralField(grid8, 1j * grid8.lattice.K * phi)
        projected = leray_project(gradient)
        assert projected.max_abs() <= 1e-12 * gradient.max_abs()

    def test_single_mode_by_hand(self, grid8):
        field = single_mode(grid8, (1, 0, 0), np.array([1.0, 1.0, 0.0]))
        projected = leray_project(field)
        np.testing.assert_allclose(projected.coeffs[:, 1, 0, 0], [0.0, 1.0, 0.0], atol=1e-15)
        assert projected.divergence_free

    def test_divergence_free_field_unchanged(self, grid16):
        u = random_field(grid16, 3)
        assert relative_error(leray_project(u).coeffs, u.coeffs) <= 1e-12

    @pytest.mark.parametrize("seed", range(100))
    def test_idempotent_and_self_adjoint(self, grid16, seed):
        a = random_raw_field(grid16, seed)
        b = random_raw_field(grid16, seed + 1000)
        pa = leray_project(a)
        assert relative_error(leray_project(pa).coeffs, pa.coeffs) <= 1e-12
        lhs = inner_product(pa, b, 0)
        rhs = inner_product(a, leray_project(b), 0)
        scale = math.sqrt(sobolev_norm_sq(a, 0) * sobolev_norm_sq(b, 0))
        assert abs(lhs - rhs) <= 1e-12 * scale
        assert divergence_defect(pa) <= 1e-12


class TestDiagonalOperators:
    def test_stokes_eigenvalue_unit_box(self, unit_grid):
        field = single_mode(unit_grid, (1, 0, 0), np.array([0.0, 1.0, 0.0]))
        image = apply_A(field)
        assert image.coeffs[1, 1, 0, 0].real == pytest.approx(4.0 * math.pi ** 2, rel=1e-14)

    def test_stokes_eigenvalue_two_pi_box(self, grid8):
        field = single_mode(grid8, (1, 1, 0), np.array([0.0, 0.0, 1.0]))
        assert apply_A(field).coeffs[2, 1, 1, 0].real == pytest.approx(2.0, rel=1e-14)

    def test_stokes_of_zero(self, grid8):
        assert apply_A(SpectralField.zeros(grid8)).is_zero()

    def test_helmholtz_factor(self, unit_grid):
        field = single_mode(unit_grid, (1, 0, 0), np.array([0.0, 1.0, 0.0]))
        image = helmholtz_inverse(field, 1.0)
        assert image.coeffs[1, 1, 0, 0].real == pytest.approx(1.0 / (1.0 + 4.0 * math.pi ** 2), rel=1e-14)

    def test_helmholtz_identity_for_zero_alpha(self, grid16):
        u = random_field(grid16, 5)
        np.testing.assert_array_equal(helmholtz_inverse(u, 0.0).coeffs, u.coeffs)

    def test_helmholtz_inverse_property(self, grid16):
        u = random_field(grid16, 6)
        restored = helmholtz_inverse(u + apply_A(u) * 0.3, 0.3)
        assert relative_error(restored.coeffs, u.coeffs) <= 1e-12
        assert relative_error(helmholtz_apply(helmholtz_inverse(u, 0.3), 0.3).coeffs, u.coeffs) <= 1e-12

    def test_negative_alpha_rejected(self, grid8):
        with pytest.raises(FieldError):
            helmholtz_inverse(SpectralField.zeros(grid8), -1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_operators_commute(self, grid16, seed):
        u = random_raw_field(grid16, seed)
        pairs = [
            (lambda f: apply_A(f), lambda f: helmholtz_inverse(f, 0.2)),
            (lambda f: apply_A(f), lambda f: low_mode_project(f, 4)),
            (lambda f: helmholtz_inverse(f, 0.2), lambda f: low_mode_project(f, 4)),
            (lambda f: leray_project(f), lambda f: apply_A(f)),
            (lambda f: leray_project(f), lambda f: helmholtz_inverse(f, 0.2)),
            (lambda f: leray_project(f), lambda f: low_mode_project(f, 4)),
        ]
        for first, second in pairs:
            assert relative_error(first(second(u)).coeffs, second(first(u)).coeffs) <= 1e-12


class TestLowModeProjection:
    def test_cutoff_one_is_empty(self, grid8):
        assert low_mode_project(random_field(grid8, 1), 1).is_zero()

    def test_strict_inequality(self, grid8):
        u = sine_mode(grid8, (1, 0, 0), 1.0) + sine_mode(grid8, (2, 0, 0), 1.0)
        kept = low_mode_project(u, 2)
        expected = sine_mode(grid8, (1, 0, 0), 1.0)
        np.testing.assert_array_equal(kept.coeffs, expected.coeffs)

    def test_inclusive_variant(self):
        grid = GridSpec(L=TWO_PI, n_grid=8, observe_inclusive=True)
        kept = low_mode_project(sine_mode(grid, (2, 0, 0), 1.0), 2)
        assert not kept.is_zero()

    def test_nonpositive_cutoff(self, grid8):
        with pytest.raises(FieldError):
            low_mode_project(SpectralField.zeros(grid8), 0)


class TestNorms:
    def test_single_pair_parseval(self, grid8):
        c = np.array([0.0, 0.3 + 0.4j, 0.0])
        field = single_mode(grid8, (1, 0, 0), c)
        assert sobolev_norm_sq(field, 0) == pytest.approx(2.0 * grid8.volume * 0.25, rel=1e-14)

    def test_zero_field(self, grid8):
        for s in (0, 1, 2):
            assert sobolev_norm_sq(SpectralField.zeros(grid8), s) == 0.0

    def test_physical_quadrature_agrees(self, grid16):
        u = random_field(grid16, 2, dealiased=False)
        assert physical_energy(u) == pytest.approx(sobolev_norm_sq(u, 0), rel=1e-12)

    def test_inner_product_of_distinct_modes(self, grid8):
        a = sine_mode(grid8, (1, 0, 0), 1.0)
        b = sine_mode(grid8, (0, 2, 0), 1.0)
        assert inner_product(a, b, 0) == 0.0

    def test_inner_product_with_itself(self, grid16):
        u = random_field(grid16, 4)
        for s in (0, 1, 2):
            assert inner_product(u, u, s) == pytest.approx(sobolev_norm_sq(u, s), rel=1e-13)

    def test_stokes_pairing(self, grid16):
        u = random_field(grid16, 8)
        assert inner_product(u, apply_A(u), 1) == pytest.approx(sobolev_norm_sq(u, 2), rel=1e-12)
        assert inner_product(u, apply_A(u), 0) == pytest.approx(sobolev_norm_sq(u, 1), rel=1e-12)

    def test_grid_mismatch(self, grid8, grid16):
        with pytest.raises(GridMismatchError):
            inner_product(SpectralField.zeros(grid8), SpectralField.zeros(grid16), 0)


class TestInequalities:
    @pytest.mark.parametrize("seed", range(100))
    def test_poincare_and_projection_estimates(self, grid16, seed):
        u = random_field(grid16, seed, dealiased=False)
        lambda1 = grid16.lambda1
        norm_sq = sobolev_norm_sq(u, 0)
        grad_sq = sobolev_norm_sq(u, 1)
        assert lambda1 * norm_sq <= grad_sq * (1 + 1e-12)
        for N in (2, 4, 8):
            tail = u - low_mode_project(u, N)
            assert sobolev_norm_sq(tail, 0) <= grad_sq / (lambda1 * N ** 2) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(100))
    def test_helmholtz_inverse_bounds(self, grid16, seed):
        u = random_field(grid16, seed, dealiased=False)
        alpha_sq = 0.0625
        v = helmholtz_inverse(u, alpha_sq)
        assert sobolev_norm_sq(v, 0) <= sobolev_norm_sq(u, 0) * (1 + 1e-12)
        assert alpha_sq ** 2 * sobolev_norm_sq(v, 2) <= sobolev_norm_sq(u, 0) * (1 + 1e-12)


def convolution_oracle(u: SpectralField, v: SpectralField) -> SpectralField:
    """B(u, v) прямым суммированием по парам мод."""
    grid = u.grid
    n = grid.n_grid
    lat = grid.lattice
    support = [tuple(idx) for idx in np.argwhere(lat.dealias)]
    result = np.zeros(grid.shape, dtype=np.complex128)
    for p in support:
        u_p = u.coeffs[(slice(None),) + p]
        for q in support:
            K = lat.K[(slice(None),) + p] + lat.K[(slice(None),) + q]
            if np.any(np.abs(K) > lat.dealias_cut) or not np.any(K):
                continue
            wave_q = lat.wave[(slice(None),) + q]
            target = (slice(None),) + tuple(int(k) % n for k in K)
            result[target] += 1j * np.dot(u_p, wave_q) * v.coeffs[(slice(None),) + q]
    return leray_project(SpectralField(grid, result))


class TestBilinear:
    def test_shear_self_advection_vanishes(self, grid8):
        u = sine_mode(grid8, (1, 0, 0), 0.7, direction=(0, 1, 0))
        assert bilinear_B(u, u).is_zero()

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_orthogonality(self, grid16, seed):
        u = random_field(grid16, seed)
        v = random_field(grid16, seed + 1000)
        b = bilinear_B(u, v)
        scale = math.sqrt(sobolev_norm_sq(b, 0) * sobolev_norm_sq(v, 0))
        assert abs(inner_product(b, v, 0)) <= 1e-10 * scale

    def test_matches_convolution_oracle(self, grid8):
        u = random_field(grid8, 11)
        v = random_field(grid8, 12)
        assert relative_error(bilinear_B(u, v).coeffs, convolution_oracle(u, v).coeffs) <= 1e-12

    def test_requires_divergence_free_advection(self, grid8):
        raw = random_raw_field(grid8, 0)
        with pytest.raises(FieldError):
            bilinear_B(raw, raw)

    def test_result_is_dealiased_and_projected(self, grid16):
        b = bilinear_B(random_field(grid16, 1), random_field(grid16, 2))
        assert b.dealiased and b.divergence_free
        assert not np.any(b.coeffs * ~grid16.lattice.dealias)


class TestRandomFields:
    def test_seed_determinism(self, grid16):
        np.testing.assert_array_equal(random_field(grid16, 42).coeffs, random_field(grid16, 42).coeffs)

    def test_norm_honoured(self, grid16):
        u = random_field(grid16, 9, norm=1.0)
        assert sobolev_norm_sq(u, 0) == pytest.approx(1.0, rel=1e-12)

    def test_invariants(self, grid16):
        u = random_field(grid16, 10)
        check_invariants(u)
        assert dealias(u).dealiased

    def test_broken_symmetry_detected(self, grid8):
        coeffs = np.zeros(grid8.shape, dtype=np.complex128)
        coeffs[0, 0, 1, 0] = 1.0
        with pytest.raises(FieldError):
            check_invariants(SpectralField(grid8, coeffs))

    def test_fields_are_immutable(self, grid8):
        u = random_field(grid8, 1)
        with pytest.raises(ValueError):
            u.coeffs[0, 1, 0, 0] = 1.0
