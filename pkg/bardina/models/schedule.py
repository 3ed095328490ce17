"""
Расписание алгоритма восстановления alpha.
"""
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Допуск на сравнение beta1^2 с alpha0^2, alpha1^2 (значения из текстового конфига)
_BOUND_RTOL = 1e-12


class RecoveryMode(str, Enum):
    STRICT = "strict"  # (eta, N) подбираются так, чтобы выполнялись все условия теоремы
    PRACTICAL = "practical"  # (eta, N) из конфига, условия только в отчете


class RecoverySchedule(BaseModel):
    """
    Параметры рекурсии. Списки eta, N_obs, N_tilde задают значения по итерациям;
    последний элемент повторяется для всех последующих итераций.

    Attributes:
        alpha0, alpha1: Априорные границы alpha
        beta1_sq: Начальное приближение alpha^2, alpha0^2 <= beta1_sq <= alpha1^2
        epsilon: Целевой зазор, 0 < epsilon < alpha0^2
        mode: strict | practical
        eta: Коэффициенты обратной связи eta_n
        N_obs: Срезы наблюдений N_n
        N_tilde: Срезы N~_n для zeta_n (пусто - совпадают с N_n)
        settle: Время установления t^_n - t_n (None - 5 / eta_n)
        window: Длина окна t_{n+1} - t^_n
        T_final: Конечное время T
        max_iters: Максимальное число итераций
        eta_min, eta_max, eta_growth: Лестница eta для строгого режима
    """
    model_config = ConfigDict(frozen=True)

    alpha0: float = Field(gt=0)
    alpha1: float = Field(gt=0)
    beta1_sq: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    mode: RecoveryMode = RecoveryMode.PRACTICAL
    eta: Tuple[float, ...] = (20.0,)
    N_obs: Tuple[int, ...] = (8,)
    N_tilde: Tuple[int, ...] = ()
    settle: Optional[float] = Field(default=None, ge=0)
    window: float = Field(default=1.0, gt=0)
    T_final: float = Field(default=20.0, gt=0)
    max_iters: int = Field(default=50, ge=1)
    eta_min: float = Field(default=1.0, gt=0)
    eta_max: float = Field(default=1e6, gt=0)
    eta_growth: float = Field(default=2.0, gt=1)

    @field_validator('eta')
    @classmethod
    def validate_eta(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("at least one eta value is required")
        if any(not x > 0 for x in v):
            raise ValueError("eta values must be positive")
        return v

    @field_validator('N_obs', 'N_tilde')
    @classmethod
    def validate_cutoffs(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(x < 1 for x in v):
            raise ValueError("observation cutoffs must be positive integers")
        return v

    @model_validator(mode='after')
    def validate_hypotheses(self) -> 'RecoverySchedule':
        if self.alpha1 < self.alpha0:
            raise ValueError("alpha1 must not be smaller than alpha0")
        lo, hi = self.alpha0 ** 2, self.alpha1 ** 2
        if self.beta1_sq < lo * (1 - _BOUND_RTOL) or self.beta1_sq > hi * (1 + _BOUND_RTOL):
            raise ValueError(f"beta1_sq={self.beta1_sq} must lie in [alpha0^2, alpha1^2] = [{lo}, {hi}]")
        if not self.epsilon < lo:
            raise ValueError(f"epsilon={self.epsilon} violates 0<ε<α₀² (alpha0^2={lo})")
        if not self.N_obs:
            raise ValueError("at least one N_obs value is required")
        for n in range(1, max(len(self.N_obs), len(self.N_tilde)) + 1):
            if self.N_tilde_at(n) > self.N_at(n):
                raise ValueError(f"N_tilde={self.N_tilde_at(n)} exceeds N_obs={self.N_at(n)} at iteration {n}")
        if self.eta_min > self.eta_max:
            raise ValueError("eta_min must not exceed eta_max")
        return self

    @staticmethod
    def _pick(values: tuple, n: int):
        return values[min(max(n, 1), len(values)) - 1]

    def eta_at(self, n: int) -> float:
        return float(self._pick(self.eta, n))

    def N_at(self, n: int) -> int:
        return int(self._pick(self.N_obs, n))

    def N_tilde_at(self, n: int) -> int:
        if not self.N_tilde:
            return self.N_at(n)
        return int(self._pick(self.N_tilde, n))

    def settle_for(self, eta: float) -> float:
        """t^_n - t_n: заданное значение или 5 / eta_n."""
        if self.settle is not None:
            return self.settle
        return 5.0 / eta

    def max_cutoff(self) -> int:
        return max(self.N_obs)

    def eta_ladder(self) -> Tuple[float, ...]:
        """Геометрическая лестница eta_min, eta_min*growth, ... <= eta_max."""
        ladder = []
        eta = self.eta_min
        while eta <= self.eta_max * (1 + 1e-12):
            ladder.append(eta)
            eta *= self.eta_growth
        return tuple(ladder)

    @staticmethod
    def N_ladder(N_start: int, N_cap: int) -> Tuple[int, ...]:
        """Удвоение N_start, 2 N_start, 4 N_start, ...; последняя ступень всегда N_cap."""
        ladder = []
        N = N_start
        while N < N_cap:
            ladder.append(N)
            N *= 2
        ladder.append(N_cap)
        return tuple(ladder)

    @property
    def strict(self) -> bool:
        return self.mode is RecoveryMode.STRICT


__all__ = ['RecoveryMode', 'RecoverySchedule']
