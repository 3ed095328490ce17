"""
Физические параметры модели Бардины и описание внешней силы.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from bardina.models.field import SpectralField

Wavevector = Tuple[int, int, int]

AXIS_MODES: Tuple[Wavevector, ...] = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class ForcingKind(str, Enum):
    NONE = "none"
    STEADY_LOWMODE = "steady_lowmode"
    MANUFACTURED_STEADY = "manufactured_steady"


class ForcingSpec(BaseModel):
    """
    Стационарная внешняя сила.

    steady_lowmode: f = amplitude * sum_K sin(2*pi*K.x/L) e_K.
    manufactured_steady: u* той же формы с амплитудой amplitude, а f подобрана так,
    что u* является точным стационарным решением.
    """
    model_config = ConfigDict(frozen=True)

    kind: ForcingKind = ForcingKind.NONE
    amplitude: float = Field(default=0.0, ge=0)
    mode_set: Tuple[Wavevector, ...] = AXIS_MODES

    @field_validator('mode_set')
    @classmethod
    def validate_modes(cls, v: Tuple[Wavevector, ...]) -> Tuple[Wavevector, ...]:
        if not v:
            raise ValueError("mode_set must contain at least one wavevector")
        for mode in v:
            if len(mode) != 3:
                raise ValueError(f"wavevector {mode} must have three components")
            if not any(mode):
                raise ValueError("the zero wavevector cannot be forced")
        return tuple(tuple(int(c) for c in mode) for mode in v)


class SpectrumProfile(BaseModel):
    """
    Радиальный профиль амплитуд случайного начального поля:
    a(|K|) = (1 + |K|)^(-slope) * exp(-(|K|/k_cut)^2).
    """
    model_config = ConfigDict(frozen=True)

    slope: float = Field(default=2.0, ge=0)
    k_cut: float = Field(default=4.0, gt=0)

    def amplitude(self, k_norm: np.ndarray) -> np.ndarray:
        return (1.0 + k_norm) ** (-self.slope) * np.exp(-(k_norm / self.k_cut) ** 2)


class PhysicalParams(BaseModel):
    """
    Attributes:
        nu: Кинематическая вязкость
        alpha: Истинный масштаб фильтра (скрыт от стороны восстановления)
        forcing: Описание внешней силы
    """
    model_config = ConfigDict(frozen=True)

    nu: float = Field(gt=0)
    alpha: float = Field(gt=0)
    forcing: ForcingSpec = ForcingSpec()

    @property
    def alpha_sq(self) -> float:
        return self.alpha ** 2


@dataclass(frozen=True)
class ObserverPhysics:
    """
    То, что известно наблюдателю: вязкость и сила. Параметр alpha сюда не входит.

    Attributes:
        nu: Кинематическая вязкость
        forcing: Поле силы (после проекции Лере)
        f_sup: sup_t ||f(t)||
    """
    nu: float
    forcing: SpectralField
    f_sup: float


__all__ = [
    'AXIS_MODES',
    'ForcingKind',
    'ForcingSpec',
    'SpectrumProfile',
    'PhysicalParams',
    'ObserverPhysics',
    'Wavevector',
]
