"""
Конфигурация эксперимента-двойника и итоговый отчет.
"""
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import msgspec
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bardina.models.grid import GridSpec
from bardina.models.observation import StageObservation
from bardina.models.physics import PhysicalParams, SpectrumProfile
from bardina.models.records import IterationRecord
from bardina.models.schedule import RecoverySchedule


class InitialKind(str, Enum):
    RANDOM = "random"  # случайное поле со спектром SpectrumProfile
    SHEAR = "shear"  # одна сдвиговая мода K = (1, 0, 0)
    STEADY = "steady"  # u0 = u* (только manufactured_steady)


class InitialSpec(BaseModel):
    """
    Начальное условие истины.

    Attributes:
        amplitude: Среднеквадратичная скорость (для shear - пиковая амплитуда)
    """
    model_config = ConfigDict(frozen=True)

    kind: InitialKind = InitialKind.RANDOM
    amplitude: float = Field(default=0.1, gt=0)
    slope: float = Field(default=2.0, ge=0)
    k_cut: float = Field(default=4.0, gt=0)

    def spectrum(self) -> SpectrumProfile:
        return SpectrumProfile(slope=self.slope, k_cut=self.k_cut)


class ObserverStart(str, Enum):
    ZERO = "zero"
    TRUTH = "truth"


class DerivativeSource(str, Enum):
    EXACT = "exact"
    MEASURED = "measured"


class ObserverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    w0: ObserverStart = ObserverStart.ZERO
    derivatives: DerivativeSource = DerivativeSource.EXACT
    stage_observation: StageObservation = StageObservation.PREDICTOR


class BoundsSpec(BaseModel):
    """
    Априорные оценки начальных данных. Незаданные M_* берутся из норм u0,
    умноженных на margin.
    """
    model_config = ConfigDict(frozen=True)

    M_A: Optional[float] = Field(default=None, gt=0)
    M_B: Optional[float] = Field(default=None, gt=0)
    M_C: Optional[float] = Field(default=None, gt=0)
    margin: float = Field(default=1.0, ge=1)
    c_gn: Optional[float] = Field(default=None, gt=0)


class ExperimentConfig(BaseModel):
    """
    Полная конфигурация эксперимента (результат parse_config).

    Attributes:
        grid: Сетка
        physics: Вязкость, истинное alpha и сила
        initial: Начальное условие истины
        schedule: Расписание восстановления
        bounds: Априорные оценки
        observer: Настройки наблюдателя
        dt: Шаг по времени (верхняя граница, см. effective_dt)
        seed: Зерно случайного начального поля
        output_dir: Каталог артефактов
        sample_every: Шаг сохранения снимков наблюдателя
        truth_dump_dir: Каталог готового дампа истины (None - считать истину)
    """
    model_config = ConfigDict(frozen=True)

    grid: GridSpec
    physics: PhysicalParams
    initial: InitialSpec = InitialSpec()
    schedule: RecoverySchedule
    bounds: BoundsSpec = BoundsSpec()
    observer: ObserverOptions = ObserverOptions()
    dt: float = Field(default=0.01, gt=0)
    seed: int = 0
    output_dir: Path = Path("output")
    sample_every: int = Field(default=50, ge=1)
    truth_dump_dir: Optional[Path] = None

    @model_validator(mode='after')
    def validate_cutoffs(self) -> 'ExperimentConfig':
        limit = self.grid.max_observable()
        if self.schedule.max_cutoff() > limit:
            raise ValueError(
                f"N_obs={self.schedule.max_cutoff()} exceeds the grid Nyquist limit {limit} for n_grid={self.grid.n_grid}"
            )
        return self


class RunReport(msgspec.Struct, kw_only=True):
    """
    Итог команды для report.json.

    Attributes:
        iterations: Записи итераций
        fitted_contraction_ratio: Геометрическая подгонка |beta_n^2 - alpha^2|
        fitted_g_ratio: Геометрическая подгонка ||g_n(t_n)|| + beta_n ||grad g_n(t_n)||
        fitted_sync_rate: Наклон log(||g||^2 + beta^2 ||grad g||^2) по времени
        envelope_checks, envelope_violations: Число проверок и нарушений по оценкам
        wall_time: Время выполнения, с
    """
    command: str
    status: str
    exit_code: int
    dt: float
    iterations: List[IterationRecord] = []
    beta_sq_final: Optional[float] = None
    alpha_sq_true: Optional[float] = None
    fitted_contraction_ratio: Optional[float] = None
    fitted_g_ratio: Optional[float] = None
    fitted_sync_rate: Optional[float] = None
    envelope_checks: Dict[str, int] = {}
    envelope_violations: Dict[str, int] = {}
    wall_time: float = 0.0
    notes: List[str] = []


__all__ = [
    'InitialKind',
    'InitialSpec',
    'ObserverStart',
    'DerivativeSource',
    'ObserverOptions',
    'BoundsSpec',
    'ExperimentConfig',
    'RunReport',
]
