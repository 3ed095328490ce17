"""
Записи итераций восстановления и отчет о проверке условий.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from bardina.core.errors import RecoveryError
from bardina.models.field import SpectralField


class IterationStatus(str, Enum):
    UPDATED = "Updated"
    HALTED_DEGENERATE = "HaltedDegenerate"
    HALTED_FINAL_TIME = "HaltedFinalTime"
    HALTED_INFEASIBLE = "HaltedInfeasible"
    HALTED_REGIME_BREACH = "HaltedRegimeBreach"


@dataclass(frozen=True)
class ConditionResult:
    """Одно неравенство lhs <= rhs; margin = rhs - lhs."""
    code: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        # nan в любой части - условие не выполнено
        return bool(self.margin >= 0.0)


@dataclass(frozen=True)
class ConditionReport:
    results: Tuple[ConditionResult, ...]

    def __getitem__(self, code: str) -> ConditionResult:
        for result in self.results:
            if result.code == code:
                return result
        raise KeyError(code)

    def __iter__(self):
        return iter(self.results)

    @property
    def all_passed(self) -> bool:
        return all(r.satisfied for r in self.results)

    def failed(self) -> List[str]:
        return [r.code for r in self.results if not r.satisfied]

    def passed_string(self) -> str:
        """Строка из 0/1 в порядке кодов, например '11010111'."""
        return "".join("1" if r.satisfied else "0" for r in self.results)

    def margins(self) -> Dict[str, float]:
        return {r.code: r.margin for r in self.results}


@dataclass(frozen=True)
class IterationRecord:
    """
    Итог итерации n.

    g_norm_combo и abs_beta_sq_err известны только в режиме двойника и
    заполняются после прогона.
    """
    n: int
    t_n: float
    t_hat_n: float
    t_np1: float
    eta_n: float
    N_n: int
    N_tilde_n: int
    beta_n_sq: float
    beta_np1_sq: float
    delta_n: float
    zeta_n: float
    condition_report: ConditionReport
    status: IterationStatus
    g_norm_combo: Optional[float] = None
    abs_beta_sq_err: Optional[float] = None

    def __post_init__(self):
        if not (self.t_n <= self.t_hat_n < self.t_np1):
            raise RecoveryError(
                f"window times must satisfy t_n <= t_hat_n < t_np1, got {self.t_n}, {self.t_hat_n}, {self.t_np1}",
                self.n,
            )
        if not self.delta_n >= 0.0:
            raise RecoveryError(f"delta_n must be non-negative, got {self.delta_n}", self.n)

    @property
    def updated(self) -> bool:
        return self.status is IterationStatus.UPDATED


@dataclass(frozen=True)
class ObserverSnapshot:
    """Состояние наблюдателя, сохраненное для диагностик двойника."""
    n: int
    t: float
    w: SpectralField
    beta_sq: float
    eta: float
    at_start: bool = False


@dataclass(frozen=True)
class WindowDiagnostics:
    """Величины итерации, нужные для оценок двойника, но не для обновления."""
    n: int
    M2_tn: float
    M3_tn: float
    delta_tilde: float
    c_gn: float


@dataclass
class RecoveryResult:
    """
    Attributes:
        records: Записи итераций
        status: Итоговый статус цикла
        beta_sq_final: Последняя оценка alpha^2
        snapshots: Снимки наблюдателя в t_n и с шагом выборки
        diagnostics: Величины итераций для оценок двойника
        m4_checks, m4_violations: Проверка ||w||^2 + beta^2 ||grad w||^2 <= M4^2
    """
    records: List[IterationRecord] = field(default_factory=list)
    status: IterationStatus = IterationStatus.HALTED_FINAL_TIME
    beta_sq_final: float = math.nan
    snapshots: List[ObserverSnapshot] = field(default_factory=list)
    diagnostics: Dict[int, WindowDiagnostics] = field(default_factory=dict)
    m4_checks: int = 0
    m4_violations: int = 0

    @property
    def updated_records(self) -> List[IterationRecord]:
        return [r for r in self.records if r.updated]

    def beta_sq_series(self) -> List[float]:
        """beta_1^2, beta_2^2, ... по обновленным итерациям."""
        updated = self.updated_records
        if not updated:
            return [self.beta_sq_final]
        return [updated[0].beta_n_sq] + [r.beta_np1_sq for r in updated]


__all__ = [
    'IterationStatus',
    'ConditionResult',
    'ConditionReport',
    'IterationRecord',
    'ObserverSnapshot',
    'WindowDiagnostics',
    'RecoveryResult',
]
