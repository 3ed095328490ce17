"""
Операторы функционального пространства на решетке Фурье.

Все операторы диагональны по модам, кроме билинейной формы B, которая
вычисляется псевдоспектрально с деалиасингом. Каждая функция возвращает
новое SpectralField.
"""
import math
from functools import lru_cache
from typing import Optional

import numpy as np

from bardina.core.errors import FieldError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.physics import SpectrumProfile
from bardina.services.fft import to_physical, to_spectral
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.SPECTRAL)

_SPACE_AXES = (-3, -2, -1)


def _at_minus_k(coeffs: np.ndarray) -> np.ndarray:
    """Массив c[-K] в порядке FFT."""
    return np.roll(np.flip(coeffs, axis=_SPACE_AXES), 1, axis=_SPACE_AXES)


def enforce_hermitian(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Симметризует c_K = conj(c_{-K}) и обнуляет неудерживаемые узлы."""
    sym = 0.5 * (coeffs + np.conj(_at_minus_k(coeffs)))
    sym[:, ~grid.lattice.retained] = 0.0
    return sym


def _project_coeffs(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    lat = grid.lattice
    k_dot = np.sum(lat.K * coeffs, axis=0)
    return coeffs - lat.K * (k_dot * lat.inv_k_sq)


def leray_project(field: SpectralField) -> SpectralField:
    """
    Проекция Гельмгольца-Лере: c_K -> c_K - K (c_K . K) / |K|^2.

    Args:
        field: Поле с эрмитовой симметрией и нулевым средним

    Returns:
        SpectralField: Бездивергентная часть поля
    """
    return field.with_coeffs(_project_coeffs(field.coeffs, field.grid), divergence_free=True)


def apply_A(field: SpectralField) -> SpectralField:
    """Оператор Стокса: умножение моды K на 4*pi^2*|K|^2/L^2."""
    return field.with_coeffs(field.grid.lattice.lam * field.coeffs)


@lru_cache(maxsize=64)
def _helmholtz_factor(grid: GridSpec, alpha_sq: float) -> np.ndarray:
    L_sq = grid.L ** 2
    factor = L_sq / (L_sq + 4.0 * alpha_sq * math.pi ** 2 * grid.lattice.k_sq)
    factor.setflags(write=False)
    return factor


def _check_alpha_sq(alpha_sq: float) -> float:
    alpha_sq = float(alpha_sq)
    if not alpha_sq >= 0.0:
        raise FieldError(f"alpha_sq must be non-negative, got {alpha_sq}")
    return alpha_sq


def helmholtz_inverse(field: SpectralField, alpha_sq: float) -> SpectralField:
    """(I + alpha^2 A)^-1: умножение моды K на L^2 / (L^2 + 4 alpha^2 pi^2 |K|^2)."""
    factor = _helmholtz_factor(field.grid, _check_alpha_sq(alpha_sq))
    return field.with_coeffs(factor * field.coeffs)


def helmholtz_apply(field: SpectralField, alpha_sq: float) -> SpectralField:
    """(I + alpha^2 A)."""
    alpha_sq = _check_alpha_sq(alpha_sq)
    return field.with_coeffs((1.0 + alpha_sq * field.grid.lattice.lam) * field.coeffs)


def low_mode_project(field: SpectralField, N: int) -> SpectralField:
    """
    P_N: оставляет ровно моды 0 < |K| < N (|K| - евклидова норма целого вектора).

    При grid.observe_inclusive используется |K| <= N.
    """
    if N < 1:
        raise FieldError(f"N must be a positive integer, got {N}")
    return field.with_coeffs(field.coeffs * field.grid.observed_mask(int(N)))


def dealias(field: SpectralField) -> SpectralField:
    """Обнуляет моды вне правила деалиасинга."""
    return field.with_coeffs(field.coeffs * field.grid.lattice.dealias, dealiased=True)


@lru_cache(maxsize=64)
def _sobolev_weight(grid: GridSpec, s: float) -> np.ndarray:
    lat = grid.lattice
    safe = np.where(lat.retained, lat.lam, 1.0)
    weight = np.where(lat.retained, safe ** s, 0.0)
    weight.setflags(write=False)
    return weight


def sobolev_norm_sq(field: SpectralField, s: float) -> float:
    """
    ||u||_s^2 = L^3 sum_K (2 pi |K| / L)^(2s) |c_K|^2.

    s=0 дает ||u||^2, s=1 дает ||grad u||^2, s=2 дает ||A u||^2.
    """
    grid = field.grid
    c = field.coeffs
    power = c.real ** 2 + c.imag ** 2
    return float(grid.volume * np.sum(_sobolev_weight(grid, float(s)) * power))


def inner_product(a: SpectralField, b: SpectralField, s: float) -> float:
    """(a, b)_s = L^3 sum_K (2 pi |K| / L)^(2s) c_K(a) . conj(c_K(b)); вещественно."""
    a.same_grid(b)
    grid = a.grid
    pairing = np.real(a.coeffs * np.conj(b.coeffs))
    return float(grid.volume * np.sum(_sobolev_weight(grid, float(s)) * pairing))


def bilinear_B(u: SpectralField, v: SpectralField) -> SpectralField:
    """
    B(u, v) = P[(u . grad) v], псевдоспектрально.

    u и grad v переводятся в физическое пространство, перемножаются поточечно,
    результат возвращается в пространство Фурье, деалиасируется и проецируется.

    Raises:
        FieldError: u не бездивергентно
        GridMismatchError: поля на разных сетках
    """
    if not u.divergence_free:
        raise FieldError("B(u, v) requires a divergence-free advecting field u")
    u.same_grid(v)
    grid = u.grid
    lat = grid.lattice

    u_phys = to_physical(u.coeffs)
    advection = np.zeros(u_phys.shape, dtype=np.float64)
    for i in range(3):
        # d_i v_j для всех j
        advection += u_phys[i] * to_physical(1j * lat.wave[i] * v.coeffs)

    coeffs = enforce_hermitian(to_spectral(advection), grid)
    coeffs *= lat.dealias
    return SpectralField(grid, _project_coeffs(coeffs, grid), divergence_free=True, dealiased=True)


def random_divfree_field(
    grid: GridSpec,
    spectrum: SpectrumProfile,
    seed: int,
    norm: Optional[float] = None,
    dealiased: bool = False,
) -> SpectralField:
    """
    Воспроизводимое случайное бездивергентное поле.

    Args:
        grid: Сетка
        spectrum: Радиальный профиль амплитуд коэффициентов
        seed: Зерно генератора numpy
        norm: Если задано, поле нормируется так, что ||u|| = norm
        dealiased: Ограничить поле маской деалиасинга

    Returns:
        SpectralField: Эрмитово, с нулевым средним и бездивергентное поле
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    lat = grid.lattice

    coeffs = enforce_hermitian(raw * spectrum.amplitude(np.sqrt(lat.k_sq)), grid)
    if dealiased:
        coeffs *= lat.dealias
    field = SpectralField(grid, _project_coeffs(coeffs, grid), divergence_free=True, dealiased=dealiased)

    if norm is not None:
        current = math.sqrt(sobolev_norm_sq(field, 0))
        if current == 0.0:
            raise FieldError("cannot normalise a zero field")
        field = field * (norm / current)
    return field


def sine_mode(
    grid: GridSpec,
    K: tuple,
    amplitude: float,
    direction: Optional[tuple] = None,
) -> SpectralField:
    """
    amplitude * sin(2 pi K.x / L) * e, где e - единичный вектор, перпендикулярный K.

    Если direction не задан, берется K x e_x (или K x e_y, если K параллелен e_x).
    """
    k_vec = np.asarray(K, dtype=np.float64)
    if direction is None:
        e = np.cross(k_vec, [1.0, 0.0, 0.0])
        if not np.any(e):
            e = np.cross(k_vec, [0.0, 1.0, 0.0])
    else:
        e = np.asarray(direction, dtype=np.float64)
    e = e / np.linalg.norm(e)
    if abs(float(np.dot(e, k_vec))) > 1e-12 * float(np.linalg.norm(k_vec)):
        raise FieldError(f"direction {tuple(e)} is not perpendicular to K={K}")

    n = grid.n_grid
    idx = tuple(int(k) % n for k in K)
    neg = tuple(int(-k) % n for k in K)
    if not grid.lattice.retained[idx]:
        raise FieldError(f"wavevector {K} is not on the retained lattice of n_grid={n}")

    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    # sin(th) = (e^{i th} - e^{-i th}) / 2i
    coeffs[(slice(None),) + idx] += -0.5j * amplitude * e
    coeffs[(slice(None),) + neg] += 0.5j * amplitude * e
    return SpectralField(grid, coeffs, divergence_free=True, dealiased=bool(grid.lattice.dealias[idx]))


def physical_values(field: SpectralField) -> np.ndarray:
    """Значения поля в узлах сетки, форма (3, n, n, n)."""
    return to_physical(field.coeffs)


def from_physical(grid: GridSpec, values: np.ndarray) -> SpectralField:
    """Поле по значениям в узлах (без проекции)."""
    return SpectralField(grid, enforce_hermitian(to_spectral(values), grid))


def max_velocity(field: SpectralField) -> float:
    """max_x |u(x)| по узлам сетки."""
    values = physical_values(field)
    return float(np.sqrt(np.max(np.sum(values * values, axis=0))))


def physical_energy(field: SpectralField) -> float:
    """Квадратура ||u||^2 в физическом пространстве (для перекрестной проверки Парсеваля)."""
    values = physical_values(field)
    return float(field.grid.spacing ** 3 * np.sum(values * values))


def hermitian_defect(field: SpectralField) -> float:
    """max_K |c_K - conj(c_{-K})|, отнесенный к max|c|."""
    scale = field.max_abs()
    if scale == 0.0:
        return 0.0
    c = field.coeffs
    return float(np.max(np.abs(c - np.conj(_at_minus_k(c))))) / scale


def divergence_defect(field: SpectralField) -> float:
    """max_K |K . c_K| / |K|, отнесенный к max|c|."""
    scale = field.max_abs()
    if scale == 0.0:
        return 0.0
    lat = field.grid.lattice
    k_dot = np.abs(np.sum(lat.K * field.coeffs, axis=0)) * np.sqrt(lat.inv_k_sq)
    return float(np.max(k_dot)) / scale


def check_invariants(field: SpectralField, tol: float = 1e-12) -> None:
    """
    Проверка эрмитовости, нулевого среднего и (если заявлено) бездивергентности.

    Raises:
        FieldError: Если инвариант нарушен сверх tol
    """
    herm = hermitian_defect(field)
    if herm > tol:
        raise FieldError(f"hermitian symmetry broken: defect {herm:.3e}")
    if np.any(field.coeffs[:, 0, 0, 0]):
        raise FieldError("mean mode K=0 is not zero")
    if field.divergence_free:
        div = divergence_defect(field)
        if div > tol:
            raise FieldError(f"divergence-free invariant broken: defect {div:.3e}")


__all__ = [
    'enforce_hermitian',
    'leray_project',
    'apply_A',
    'helmholtz_inverse',
    'helmholtz_apply',
    'low_mode_project',
    'dealias',
    'sobolev_norm_sq',
    'inner_product',
    'bilinear_B',
    'random_divfree_field',
    'sine_mode',
    'physical_values',
    'from_physical',
    'max_velocity',
    'physical_energy',
    'hermitian_defect',
    'divergence_defect',
    'check_invariants',
]
