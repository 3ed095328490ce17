"""
Истинная система: упрощенная модель Бардины в форме с проекцией Лере

    u_t = -nu A u - (I + alpha^2 A)^-1 B(u, u) + (I + alpha^2 A)^-1 P f,

ее интегрирование по времени и априорные оценки M1-M3.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Tuple

from bardina.core.errors import ConfigError, FieldError
from bardina.models.envelope import BoundsEnvelope
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.physics import ForcingKind, ObserverPhysics, PhysicalParams
from bardina.models.trajectory import TruthTrajectory
from bardina.services.integrator import check_cfl, check_step_result, etd2_step
from bardina.services.spectral import (
    apply_A,
    bilinear_B,
    helmholtz_apply,
    helmholtz_inverse,
    leray_project,
    sine_mode,
    sobolev_norm_sq,
)
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.TRUTH)

DEFAULT_C_GN = 1.0


# === Внешняя сила ===

def _sine_sum(grid: GridSpec, params: PhysicalParams) -> SpectralField:
    total = SpectralField.zeros(grid)
    for K in params.forcing.mode_set:
        total = total + sine_mode(grid, K, params.forcing.amplitude)
    return total


def steady_state(grid: GridSpec, params: PhysicalParams) -> SpectralField:
    """
    Точное стационарное решение u* для manufactured_steady.

    Raises:
        FieldError: Сила другого типа
    """
    if params.forcing.kind is not ForcingKind.MANUFACTURED_STEADY:
        raise FieldError(f"steady state is only known for manufactured_steady forcing, got {params.forcing.kind.value}")
    return _sine_sum(grid, params)


@lru_cache(maxsize=16)
def build_forcing(grid: GridSpec, params: PhysicalParams) -> SpectralField:
    """
    Поле силы P f.

    Для manufactured_steady f = P[nu A (u* + alpha^2 A u*) + B(u*, u*)],
    так что rhs_truth(u*) = 0.
    """
    kind = params.forcing.kind
    if kind is ForcingKind.NONE or params.forcing.amplitude == 0.0:
        return SpectralField.zeros(grid)
    if kind is ForcingKind.STEADY_LOWMODE:
        return leray_project(_sine_sum(grid, params))

    u_star = steady_state(grid, params)
    viscous = apply_A(helmholtz_apply(u_star, params.alpha_sq)) * params.nu
    return leray_project(viscous + bilinear_B(u_star, u_star))


def forcing_sup(forcing: SpectralField) -> float:
    """sup_t ||f(t)|| для стационарной силы."""
    return math.sqrt(sobolev_norm_sq(forcing, 0))


def observer_physics(grid: GridSpec, params: PhysicalParams) -> ObserverPhysics:
    """Данные, передаваемые стороне восстановления (без alpha)."""
    forcing = build_forcing(grid, params)
    return ObserverPhysics(nu=params.nu, forcing=forcing, f_sup=forcing_sup(forcing))


# === Динамика ===

def truth_nonlinear(u: SpectralField, params: PhysicalParams, forcing: SpectralField) -> SpectralField:
    """(I + alpha^2 A)^-1 (P f - B(u, u))."""
    return helmholtz_inverse(forcing - bilinear_B(u, u), params.alpha_sq)


def rhs_truth(u: SpectralField, params: PhysicalParams, forcing: Optional[SpectralField] = None) -> SpectralField:
    """
    Правая часть u_t истинной системы.

    Args:
        u: Бездивергентное состояние
        params: Физические параметры
        forcing: Поле силы (по умолчанию строится из params)

    Returns:
        SpectralField: u_t
    """
    if not u.divergence_free:
        raise FieldError("rhs_truth requires a divergence-free state")
    if forcing is None:
        forcing = build_forcing(u.grid, params)
    return truth_nonlinear(u, params, forcing) - apply_A(u) * params.nu


def step_truth(
    u: SpectralField,
    dt: float,
    params: PhysicalParams,
    forcing: Optional[SpectralField] = None,
    step: int = 0,
    time: float = 0.0,
) -> SpectralField:
    """
    Один шаг экспоненциальной схемы для истинной системы.

    Raises:
        CflViolationError: dt превышает адвективную границу
        BlowUpError: Разрушение решения
    """
    if forcing is None:
        forcing = build_forcing(u.grid, params)
    check_cfl(u, dt, step, time)

    def nonlinear(field: SpectralField, stage: int) -> SpectralField:
        return truth_nonlinear(field, params, forcing)

    new = etd2_step(u, dt, params.nu, nonlinear)
    check_step_result(new, step + 1, time + dt)
    return new


def uniform_steps(horizon: float, dt: float) -> Tuple[float, int]:
    """
    Равномерная сетка по времени, покрывающая [0, horizon].

    Returns:
        (dt_eff, n_steps) с dt_eff <= dt и n_steps * dt_eff == horizon
    """
    if horizon < 0.0:
        raise FieldError(f"horizon must be non-negative, got {horizon}")
    if horizon == 0.0:
        return dt, 0
    n_steps = max(1, math.ceil(horizon / dt - 1e-9))
    return horizon / n_steps, n_steps


def iterate_truth(
    u0: SpectralField,
    dt: float,
    n_steps: int,
    params: PhysicalParams,
) -> Iterator[Tuple[int, float, SpectralField, SpectralField]]:
    """
    Генератор узлов траектории: (i, t_i, u_i, u_t_i) для i = 0..n_steps.

    u_t вычисляется аналитически через rhs_truth в каждом узле.
    """
    if not u0.divergence_free:
        raise FieldError("initial state must be divergence-free")
    forcing = build_forcing(u0.grid, params)
    u = u0
    for i in range(n_steps + 1):
        t = i * dt
        yield i, t, u, rhs_truth(u, params, forcing)
        if i < n_steps:
            u = step_truth(u, dt, params, forcing, step=i, time=t)


def simulate_truth(u0: SpectralField, horizon: float, dt: float, params: PhysicalParams) -> TruthTrajectory:
    """
    Траектория на [0, horizon] с хранением u и u_t в каждом узле.

    Если horizon не кратен dt, шаг уменьшается до horizon / ceil(horizon / dt).
    """
    dt_eff, n_steps = uniform_steps(horizon, dt)
    if dt_eff != dt:
        log.debug(f"time step reduced from {dt:.6g} to {dt_eff:.17g} to land on horizon {horizon:.6g}")

    trajectory = TruthTrajectory(dt=dt_eff)
    for _, t, u, u_t in iterate_truth(u0, dt_eff, n_steps, params):
        trajectory.append(t, u, u_t)

    log.info(f"truth simulated: {n_steps} steps of dt={dt_eff:.4g} up to t={horizon:.4g}")
    return trajectory


# === Нормы и оценки ===

@dataclass(frozen=True)
class TruthNorms:
    """||u||, ||grad u||, ||A u||, ||u_t|| в одном узле."""
    norm_u: float
    norm_grad: float
    norm_A: float
    norm_ut: float

    @classmethod
    def of(cls, u: SpectralField, u_t: SpectralField) -> 'TruthNorms':
        return cls(
            norm_u=math.sqrt(sobolev_norm_sq(u, 0)),
            norm_grad=math.sqrt(sobolev_norm_sq(u, 1)),
            norm_A=math.sqrt(sobolev_norm_sq(u, 2)),
            norm_ut=math.sqrt(sobolev_norm_sq(u_t, 0)),
        )


def bounds_from_initial(
    u0: SpectralField,
    alpha0: float,
    alpha1: float,
    c_gn: Optional[float] = None,
    margin: float = 1.0,
) -> BoundsEnvelope:
    """BoundsEnvelope с M_A, M_B, M_C, равными нормам u0, умноженным на margin."""
    return BoundsEnvelope(
        M_A=margin * math.sqrt(sobolev_norm_sq(u0, 0)),
        M_B=margin * math.sqrt(sobolev_norm_sq(u0, 1)),
        M_C=margin * math.sqrt(sobolev_norm_sq(u0, 2)),
        alpha0=alpha0,
        alpha1=alpha1,
        c_gn=c_gn,
    )


def resolve_c_gn(env: BoundsEnvelope, strict: bool = False) -> float:
    """
    Константа Гальярдо-Ниренберга.

    Raises:
        ConfigError: Константа не задана в строгом режиме
    """
    if env.c_gn is not None:
        return env.c_gn
    if strict:
        raise ConfigError("recovery.c_gn", "the Gagliardo-Nirenberg constant must be set in strict mode")
    return DEFAULT_C_GN


def eval_M1(t: float, env: BoundsEnvelope, f_sup: float, nu: float, lambda1: float) -> float:
    """M1(t): M1^2 = e^{-nu l1 t}(M_A^2 + alpha1^2 M_B^2) + sup||f||^2 / (l1^2 nu^2)."""
    decay = math.exp(-nu * lambda1 * t)
    m1_sq = decay * (env.M_A ** 2 + env.alpha1 ** 2 * env.M_B ** 2) + f_sup ** 2 / (lambda1 ** 2 * nu ** 2)
    return math.sqrt(m1_sq)


def eval_M2(
    t: float,
    env: BoundsEnvelope,
    f_sup: float,
    nu: float,
    lambda1: float,
    strict: bool = False,
) -> float:
    """M2(t) с alpha0 в знаменателях, как в определении оценки."""
    c = resolve_c_gn(env, strict)
    a0 = env.alpha0
    decay = math.exp(-nu * lambda1 * t)
    energy0 = env.M_A ** 2 + env.alpha1 ** 2 * env.M_B ** 2
    m2_sq = (
        decay * (env.M_B ** 2 + env.alpha1 ** 2 * env.M_C ** 2)
        + 2.0 * c ** 4 / (a0 ** 5 * nu ** 2 * lambda1) * decay * energy0 ** 2
        + f_sup ** 2 / (nu ** 2 * lambda1)
        + 2.0 * c ** 4 / (a0 ** 5 * nu ** 6 * lambda1 ** 5) * f_sup ** 4
    )
    return math.sqrt(m2_sq)


def eval_M3(
    t: float,
    env: BoundsEnvelope,
    f_sup: float,
    nu: float,
    lambda1: float,
    strict: bool = False,
) -> float:
    """M3(t) = (nu/alpha0) M2 + c^2 / (alpha0^4 l1^{3/4}) M1^2 + sup||f||."""
    c = resolve_c_gn(env, strict)
    m1 = eval_M1(t, env, f_sup, nu, lambda1)
    m2 = eval_M2(t, env, f_sup, nu, lambda1, strict)
    return nu / env.alpha0 * m2 + c ** 2 / (env.alpha0 ** 4 * lambda1 ** 0.75) * m1 ** 2 + f_sup


__all__ = [
    'DEFAULT_C_GN',
    'steady_state',
    'build_forcing',
    'forcing_sup',
    'observer_physics',
    'truth_nonlinear',
    'rhs_truth',
    'step_truth',
    'uniform_steps',
    'iterate_truth',
    'simulate_truth',
    'TruthNorms',
    'bounds_from_initial',
    'resolve_c_gn',
    'eval_M1',
    'eval_M2',
    'eval_M3',
]
