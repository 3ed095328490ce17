"""
Двухэтапная экспоненциальная схема Рунге-Кутты (интегрирующий множитель).

Линейная часть -nu*A продвигается точно множителем exp(-nu*lambda_K*dt),
остальные члены N(u) - явной двухэтапной комбинацией с phi-весами:

    a       = E u + dt*phi1 * N(u)
    u_next  = a + dt*phi2 * (N(a) - N(u))

где x = nu*lambda_K*dt, E = exp(-x), phi1 = (1 - exp(-x))/x,
phi2 = (exp(-x) - 1 + x)/x^2. Стационарная точка du/dt = 0 остается
точной неподвижной точкой схемы.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from bardina.core.config import get_settings
from bardina.core.errors import BlowUpError, CflViolationError, FieldError, IntegrationError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.services.spectral import (
    check_invariants,
    enforce_hermitian,
    leray_project,
    max_velocity,
)

# Nonlinear(field, stage) -> поле без линейного члена; stage = 0 (узел) или 1 (предиктор)
Nonlinear = Callable[[SpectralField, int], SpectralField]

BLOWUP_THRESHOLD = 1e12
CFL_SAFETY = 0.5
_TAYLOR_SWITCH = 1e-3


@dataclass(frozen=True)
class EtdFactors:
    """Множители схемы для фиксированных (сетка, nu, dt)."""
    decay: np.ndarray
    phi1_dt: np.ndarray
    phi2_dt: np.ndarray


def _phi_functions(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    small = x < _TAYLOR_SWITCH
    safe = np.where(small, 1.0, x)

    phi1 = -np.expm1(-safe) / safe
    phi2 = (np.expm1(-safe) + safe) / safe ** 2

    # ряды Тейлора около нуля
    phi1_series = 1.0 - x / 2.0 + x ** 2 / 6.0 - x ** 3 / 24.0
    phi2_series = 0.5 - x / 6.0 + x ** 2 / 24.0 - x ** 3 / 120.0
    return np.where(small, phi1_series, phi1), np.where(small, phi2_series, phi2)


@lru_cache(maxsize=32)
def etd_factors(grid: GridSpec, nu: float, dt: float) -> EtdFactors:
    """
    Кэшируемые множители E, dt*phi1, dt*phi2.

    Args:
        grid: Сетка
        nu: Вязкость
        dt: Шаг по времени (dt = 0 дает тождественный шаг)
    """
    x = nu * grid.lattice.lam * dt
    phi1, phi2 = _phi_functions(x)
    factors = EtdFactors(decay=np.exp(-x), phi1_dt=dt * phi1, phi2_dt=dt * phi2)
    for array in (factors.decay, factors.phi1_dt, factors.phi2_dt):
        array.setflags(write=False)
    return factors


def predictor(u: SpectralField, forcing_term: SpectralField, factors: EtdFactors) -> SpectralField:
    """Первый этап схемы a = E u + dt*phi1 * N(u)."""
    return u.with_coeffs(factors.decay * u.coeffs + factors.phi1_dt * forcing_term.coeffs)


def etd2_step(u: SpectralField, dt: float, nu: float, nonlinear: Nonlinear) -> SpectralField:
    """
    Один шаг схемы для du/dt = -nu*A u + N(u).

    Returns:
        SpectralField: Новое состояние с восстановленной эрмитовостью и проекцией Лере
    """
    if dt < 0.0:
        raise FieldError(f"time step must be non-negative, got {dt}")
    if dt == 0.0:
        return u

    factors = etd_factors(u.grid, float(nu), float(dt))
    n0 = nonlinear(u, 0)
    stage = predictor(u, n0, factors)
    n1 = nonlinear(stage, 1)

    coeffs = stage.coeffs + factors.phi2_dt * (n1.coeffs - n0.coeffs)
    coeffs = enforce_hermitian(coeffs, u.grid)
    return leray_project(SpectralField(u.grid, coeffs, dealiased=u.dealiased and n0.dealiased))


def cfl_limit(u: SpectralField, safety: float = CFL_SAFETY) -> float:
    """Наибольший допустимый шаг safety * (L/n) / max|u|; inf для нулевого поля."""
    speed = max_velocity(u)
    if speed == 0.0:
        return math.inf
    return safety * u.grid.spacing / speed


def check_cfl(u: SpectralField, dt: float, step: int, time: float) -> None:
    limit = cfl_limit(u)
    if dt > limit:
        raise CflViolationError(f"dt={dt:.6g} exceeds advective CFL bound {limit:.6g}", step, time)


def check_step_result(u: SpectralField, step: int, time: float) -> None:
    """
    Детектор разрушения решения и выборочная проверка инвариантов.

    Raises:
        BlowUpError: Неконечные коэффициенты или |c| > 1e12
        IntegrationError: Нарушен инвариант поля
    """
    if not u.is_finite():
        raise BlowUpError("non-finite coefficients", step, time)
    if u.max_abs() > BLOWUP_THRESHOLD:
        raise BlowUpError(f"coefficient magnitude {u.max_abs():.3e} exceeds {BLOWUP_THRESHOLD:.0e}", step, time)
    if get_settings().should_check(step):
        try:
            check_invariants(u, tol=1e-10)
        except FieldError as exc:
            raise IntegrationError(str(exc), step, time) from exc


__all__ = [
    'Nonlinear',
    'EtdFactors',
    'etd_factors',
    'predictor',
    'etd2_step',
    'cfl_limit',
    'check_cfl',
    'check_step_result',
    'BLOWUP_THRESHOLD',
]
