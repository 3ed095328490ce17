from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

import numpy as np

from bardina.core.errors import FieldError
from bardina.models.field import SpectralField


@dataclass
class TruthTrajectory:
    """
    Траектория истинной системы на равномерной сетке по времени.

    Attributes:
        dt: Шаг по времени
        times: Моменты сохранения
        states: Состояния u
        derivatives: Производные u_t, выровненные с times
    """
    dt: float
    times: List[float] = field(default_factory=list)
    states: List[SpectralField] = field(default_factory=list)
    derivatives: List[SpectralField] = field(default_factory=list)

    def append(self, t: float, u: SpectralField, u_t: SpectralField) -> None:
        if self.times and t <= self.times[-1]:
            raise FieldError(f"trajectory times must increase: {t} after {self.times[-1]}")
        if not u.divergence_free:
            raise FieldError(f"stored state at t={t} is not flagged divergence-free")
        self.times.append(float(t))
        self.states.append(u)
        self.derivatives.append(u_t)

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[Tuple[float, SpectralField, SpectralField]]:
        return iter(zip(self.times, self.states, self.derivatives))

    def time_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=np.float64)

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        if len(self.times) < 2:
            return True
        steps = np.diff(self.time_array())
        return bool(np.allclose(steps, self.dt, rtol=rtol, atol=0.0))


__all__ = ['TruthTrajectory']
