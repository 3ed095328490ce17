"""
Поток наблюдений P_N u(t), P_N u_t(t) и состояние наблюдателя.

Поток хранит только эрмитову половину наблюдаемых мод: каждая запись -
массив формы (3, m). Полные поля восстанавливаются по запросу.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Tuple

import numpy as np

from bardina.core.errors import FieldError, GridMismatchError, ObservationWindowError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec

_TIME_RTOL = 1e-9


def _half_space(K: np.ndarray) -> np.ndarray:
    kx, ky, kz = K
    return (kx > 0) | ((kx == 0) & (ky > 0)) | ((kx == 0) & (ky == 0) & (kz > 0))


class ObservationStream:
    """
    Непрерывный ряд наблюдений низких мод на равномерной сетке по времени.

    Все хранимые поля имеют носитель только на 0 < |K| < N_obs. Сторона
    восстановления получает истину исключительно через этот интерфейс.

    Example:
        >>> stream = ObservationStream(grid, N_obs=8, dt=0.01)
        >>> stream.append(0.0, u, u_t)
        >>> stream.obs_u(0)
    """

    def __init__(self, grid: GridSpec, N_obs: int, dt: float, t0: float = 0.0):
        if N_obs < 1:
            raise FieldError(f"N_obs must be positive, got {N_obs}")
        if N_obs > grid.max_observable():
            raise FieldError(
                f"N_obs={N_obs} exceeds the grid Nyquist limit {grid.max_observable()} for n_grid={grid.n_grid}"
            )
        if dt <= 0.0:
            raise FieldError(f"observation step must be positive, got {dt}")

        self.grid = grid
        self.N_obs = int(N_obs)
        self.dt = float(dt)
        self.t0 = float(t0)

        lat = grid.lattice
        mask = grid.observed_mask(self.N_obs)
        half = mask & _half_space(lat.K)
        n = grid.n_grid
        ids = np.arange(n ** 3).reshape(n, n, n)
        minus_ids = np.roll(np.flip(ids, axis=(0, 1, 2)), 1, axis=(0, 1, 2))

        self._half = np.flatnonzero(half)
        self._minus = minus_ids.ravel()[self._half]
        self._lam = lat.lam.ravel()[self._half]
        self._k_sq = lat.k_sq.ravel()[self._half]
        self._dealiased = not bool(np.any(mask & ~lat.dealias))

        self._u: List[np.ndarray] = []
        self._ut: List[np.ndarray] = []

    # --- Построение ---
    def append(self, t: float, u: SpectralField, u_t: SpectralField) -> None:
        """
        Добавляет наблюдение в момент t = t0 + len(stream) * dt.

        Из u и u_t сохраняются только наблюдаемые моды.
        """
        if u.grid != self.grid or u_t.grid != self.grid:
            raise GridMismatchError("observation fields live on a different grid than the stream")
        expected = self.t0 + len(self) * self.dt
        if abs(t - expected) > _TIME_RTOL * max(1.0, abs(expected)):
            raise ObservationWindowError(f"observation at t={t} breaks the uniform grid (expected {expected})")
        self._u.append(self._compress(u.coeffs))
        self._ut.append(self._compress(u_t.coeffs))

    def _compress(self, coeffs: np.ndarray) -> np.ndarray:
        return np.array(coeffs.reshape(3, -1)[:, self._half], dtype=np.complex128)

    def _expand(self, half_coeffs: np.ndarray) -> SpectralField:
        full = np.zeros((3, self.grid.n_grid ** 3), dtype=np.complex128)
        full[:, self._half] = half_coeffs
        full[:, self._minus] = np.conj(half_coeffs)
        return SpectralField(
            self.grid,
            full.reshape(self.grid.shape),
            divergence_free=True,
            dealiased=self._dealiased,
        )

    @classmethod
    def from_arrays(
        cls,
        grid: GridSpec,
        N_obs: int,
        dt: float,
        u_half: Iterable[np.ndarray],
        ut_half: Iterable[np.ndarray],
        t0: float = 0.0,
    ) -> 'ObservationStream':
        stream = cls(grid, N_obs, dt, t0)
        stream._u = [np.asarray(a, dtype=np.complex128) for a in u_half]
        stream._ut = [np.asarray(a, dtype=np.complex128) for a in ut_half]
        if len(stream._u) != len(stream._ut):
            raise ObservationWindowError("u and u_t observation series differ in length")
        return stream

    def with_measured_derivatives(self) -> 'ObservationStream':
        """
        Копия потока, где P_N u_t заменено центральными разностями P_N u
        (второй порядок, numpy.gradient с edge_order=2).
        """
        if len(self) < 3:
            raise ObservationWindowError("measured derivatives need at least three observations")
        series = np.stack(self._u)
        derivative = np.gradient(series, self.dt, axis=0, edge_order=2)
        return ObservationStream.from_arrays(self.grid, self.N_obs, self.dt, self._u, list(derivative), self.t0)

    # --- Доступ ---
    def __len__(self) -> int:
        return len(self._u)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def t_final(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    @property
    def mode_count(self) -> int:
        """Число наблюдаемых мод (обе половины)."""
        return 2 * len(self._half)

    def time_at(self, i: int) -> float:
        return self.t0 + self.dt * i

    def index_of(self, t: float) -> int:
        """
        Индекс узла, совпадающего с t.

        Raises:
            ObservationWindowError: t вне потока или не на сетке
        """
        i = int(round((t - self.t0) / self.dt))
        if i < 0 or i >= len(self):
            raise ObservationWindowError(f"t={t} lies outside the observation window [{self.t0}, {self.t_final}]")
        if abs(self.time_at(i) - t) > _TIME_RTOL * max(1.0, abs(t)) + 1e-12:
            raise ObservationWindowError(f"t={t} is not on the observation grid (dt={self.dt})")
        return i

    def window(self, t_a: float, t_b: float) -> Tuple[int, int]:
        """Индексы (i_a, i_b) окна [t_a, t_b]; требуется t_a < t_b."""
        if not t_b > t_a:
            raise ObservationWindowError(f"empty window [{t_a}, {t_b}]")
        return self.index_of(t_a), self.index_of(t_b)

    def obs_u(self, i: int) -> SpectralField:
        return self._expand(self._u[i])

    def obs_ut(self, i: int) -> SpectralField:
        return self._expand(self._ut[i])

    def half_arrays(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Сжатые (P_N u, P_N u_t) узла i, только для чтения вызывающей стороной."""
        return self._u[i], self._ut[i]

    def half_lambda(self) -> np.ndarray:
        return self._lam

    def half_mask(self, N: int) -> np.ndarray:
        """Маска 0 < |K| < N (или <= N) на сжатых модах."""
        if N > self.N_obs:
            raise ObservationWindowError(f"N={N} asks for modes beyond the observed cutoff N_obs={self.N_obs}")
        bound = float(N) * float(N)
        return self._k_sq <= bound if self.grid.observe_inclusive else self._k_sq < bound


class StageObservation(str, Enum):
    """Какое наблюдение используется на втором этапе схемы."""
    PREDICTOR = "predictor"  # предиктор истины, восстановленный из P_N u, P_N u_t
    NODE = "node"  # наблюдение в следующем узле


@dataclass(frozen=True)
class NudgedState:
    """
    Состояние наблюдателя. Поле z = w + beta^2 A w не хранится.

    Attributes:
        w: Бездивергентное поле наблюдателя
        beta_sq: Текущая оценка alpha^2 (> 0)
        eta: Коэффициент обратной связи (eta = 0 - свободный прогон)
        N_obs: Срез наблюдаемых мод
    """
    w: SpectralField
    beta_sq: float
    eta: float
    N_obs: int

    def __post_init__(self):
        if not self.beta_sq > 0.0:
            raise FieldError(f"beta_sq must be positive, got {self.beta_sq}")
        if not self.eta >= 0.0:
            raise FieldError(f"eta must be non-negative, got {self.eta}")
        if not self.w.divergence_free:
            raise FieldError("observer state must be divergence-free")
        if self.N_obs < 1:
            raise FieldError(f"N_obs must be positive, got {self.N_obs}")

    def with_w(self, w: SpectralField) -> 'NudgedState':
        return NudgedState(w=w, beta_sq=self.beta_sq, eta=self.eta, N_obs=self.N_obs)


__all__ = ['ObservationStream', 'StageObservation', 'NudgedState']
