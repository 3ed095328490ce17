"""
Наблюдатель с обратной связью (непрерывное усвоение данных):

    w_t = -nu A w - (I + beta^2 A)^-1 B(w, w) + (I + beta^2 A)^-1 P f - eta P (P_N w - P_N u).

В исходной форме обратная связь умножена на (I + beta^2 A), поэтому после
обращения (I + beta^2 A) она входит без операторного множителя.
"""
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from bardina.core.errors import FieldError, StabilityGuardError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.observation import NudgedState, ObservationStream, StageObservation
from bardina.models.physics import ObserverPhysics
from bardina.services.integrator import check_cfl, check_step_result, etd2_step, etd_factors, predictor
from bardina.services.spectral import (
    apply_A,
    bilinear_B,
    helmholtz_inverse,
    leray_project,
    low_mode_project,
    sobolev_norm_sq,
)
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.NUDGING)

ETA_DT_LIMIT = 0.5


def check_observation_cutoff(grid: GridSpec, N: int) -> None:
    """
    Raises:
        FieldError: N выходит за предел Найквиста сетки
    """
    if N < 1 or N > grid.max_observable():
        raise FieldError(
            f"observation cutoff N={N} must lie in [1, {grid.max_observable()}] for n_grid={grid.n_grid}"
        )


def _check_support(obs: SpectralField, N: int) -> None:
    outside = obs.coeffs * ~obs.grid.observed_mask(N)
    if np.any(outside):
        raise FieldError(f"observation has support outside 0 < |K| < {N}")


def nudging_nonlinear(
    w: SpectralField,
    beta_sq: float,
    eta: float,
    N: int,
    obs_u: SpectralField,
    forcing: SpectralField,
) -> SpectralField:
    """Все члены w_t, кроме -nu A w."""
    feedback = leray_project(low_mode_project(w, N) - obs_u)
    return helmholtz_inverse(forcing - bilinear_B(w, w), beta_sq) - feedback * eta


def rhs_nudged(state: NudgedState, obs_u_now: SpectralField, f: SpectralField, nu: float) -> SpectralField:
    """
    Правая часть w_t наблюдателя.

    Args:
        state: Состояние наблюдателя (w, beta^2, eta, N)
        obs_u_now: Наблюдение P_N u в тот же момент
        f: Поле силы
        nu: Вязкость

    Raises:
        FieldError: N вне сетки или наблюдение с лишним носителем
    """
    check_observation_cutoff(state.w.grid, state.N_obs)
    state.w.same_grid(obs_u_now)
    _check_support(obs_u_now, state.N_obs)
    return nudging_nonlinear(state.w, state.beta_sq, state.eta, state.N_obs, obs_u_now, f) - apply_A(state.w) * nu


def step_nudged(
    state: NudgedState,
    dt: float,
    obs: Tuple[SpectralField, SpectralField],
    f: SpectralField,
    nu: float,
    step: int = 0,
    time: float = 0.0,
) -> NudgedState:
    """
    Один шаг наблюдателя той же экспоненциальной схемой, что и истина.

    Args:
        obs: Наблюдения для узла и для второго этапа схемы

    Raises:
        StabilityGuardError: eta * dt > 0.5
        CflViolationError, BlowUpError: как у step_truth
    """
    if state.eta * dt > ETA_DT_LIMIT:
        raise StabilityGuardError(f"eta*dt={state.eta * dt:.4g} exceeds {ETA_DT_LIMIT}", step, time)
    check_observation_cutoff(state.w.grid, state.N_obs)
    check_cfl(state.w, dt, step, time)

    def nonlinear(field: SpectralField, stage: int) -> SpectralField:
        return nudging_nonlinear(field, state.beta_sq, state.eta, state.N_obs, obs[stage], f)

    new_w = etd2_step(state.w, dt, nu, nonlinear)
    check_step_result(new_w, step + 1, time + dt)
    return state.with_w(new_w)


def stage_observations(
    stream: ObservationStream,
    i: int,
    nu: float,
    policy: StageObservation = StageObservation.PREDICTOR,
) -> Tuple[SpectralField, SpectralField]:
    """
    Наблюдения для шага из узла i в узел i+1.

    PREDICTOR: второй этап использует P_N a, a = E u + dt*phi1 (u_t + nu A u),
    то есть предиктор схемы истины, вычисленный только по наблюдаемым модам.
    NODE: второй этап использует P_N u(t_{i+1}).
    """
    obs_now = stream.obs_u(i)
    if policy is StageObservation.NODE:
        return obs_now, stream.obs_u(i + 1)
    factors = etd_factors(stream.grid, float(nu), stream.dt)
    forcing_term = stream.obs_ut(i) + apply_A(obs_now) * nu
    return obs_now, predictor(obs_now, forcing_term, factors)


def sync_error(w: SpectralField, u: SpectralField, beta_sq: float) -> Tuple[float, float]:
    """(||g||^2, beta^2 ||grad g||^2) для g = w - u."""
    g = w - u
    return sobolev_norm_sq(g, 0), beta_sq * sobolev_norm_sq(g, 1)


@dataclass(frozen=True)
class NudgedNode:
    """Узел прогона наблюдателя с аналитической производной w_t."""
    index: int
    time: float
    state: NudgedState
    w_t: SpectralField
    obs_u: SpectralField
    obs_ut: SpectralField


def iterate_nudged(
    state: NudgedState,
    stream: ObservationStream,
    physics: ObserverPhysics,
    i_start: int,
    i_end: int,
    policy: StageObservation = StageObservation.PREDICTOR,
) -> Iterator[NudgedNode]:
    """
    Прогон наблюдателя по узлам потока i_start..i_end включительно.

    Выдает узлы по одному, без накопления траектории.
    """
    if not 0 <= i_start <= i_end < len(stream):
        raise FieldError(f"nudged run [{i_start}, {i_end}] is outside the stream of {len(stream)} nodes")
    if state.N_obs > stream.N_obs:
        raise FieldError(f"observer cutoff N={state.N_obs} exceeds the stream cutoff N_obs={stream.N_obs}")

    dt = stream.dt
    for i in range(i_start, i_end + 1):
        obs_u = stream.obs_u(i)
        if state.N_obs < stream.N_obs:
            obs_u = low_mode_project(obs_u, state.N_obs)
        w_t = rhs_nudged(state, obs_u, physics.forcing, physics.nu)
        yield NudgedNode(i, stream.time_at(i), state, w_t, obs_u, stream.obs_ut(i))

        if i < i_end:
            obs_now, obs_next = stage_observations(stream, i, physics.nu, policy)
            if state.N_obs < stream.N_obs:
                obs_now = low_mode_project(obs_now, state.N_obs)
                obs_next = low_mode_project(obs_next, state.N_obs)
            state = step_nudged(state, dt, (obs_now, obs_next), physics.forcing, physics.nu, step=i, time=stream.time_at(i))


__all__ = [
    'ETA_DT_LIMIT',
    'check_observation_cutoff',
    'nudging_nonlinear',
    'rhs_nudged',
    'step_nudged',
    'stage_observations',
    'sync_error',
    'NudgedNode',
    'iterate_nudged',
]
