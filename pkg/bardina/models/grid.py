"""
Описание периодической сетки и кэшируемые массивы волновых чисел.

Коэффициенты хранятся на полной решетке в порядке numpy/scipy FFT:
индекс j вдоль оси соответствует целому волновому числу fftfreq(n) * n.
Удерживаются узлы с |K_i| < n_grid/2 (плоскость Найквиста всегда нулевая)
и K != 0.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from bardina.core.errors import FieldError


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Lattice:
    """
    Массивы решетки для конкретной сетки.

    Attributes:
        K: Целые волновые векторы, форма (3, n, n, n)
        k_sq: |K|^2 (целые значения в float)
        wave: 2*pi*K/L, форма (3, n, n, n)
        lam: Собственные значения A: 4*pi^2*|K|^2/L^2
        inv_k_sq: 1/|K|^2 вне K=0, иначе 0
        retained: Маска удерживаемых узлов (без Найквиста и K=0)
        dealias: Маска узлов, остающихся после правила деалиасинга
        dealias_cut: Наибольшее удерживаемое |K_i| после деалиасинга
    """
    K: np.ndarray
    k_sq: np.ndarray
    wave: np.ndarray
    lam: np.ndarray
    inv_k_sq: np.ndarray
    retained: np.ndarray
    dealias: np.ndarray
    dealias_cut: int


class GridSpec(BaseModel):
    """
    Периодический куб [0, L]^3 с n_grid модами на ось.

    Attributes:
        L: Длина стороны куба
        n_grid: Число мод на ось (четное, не меньше 4)
        dealias_fraction: Доля удерживаемых мод при нелинейных произведениях
        observe_inclusive: Наблюдать |K| <= N вместо строгого |K| < N
    """
    model_config = ConfigDict(frozen=True)

    L: float = Field(gt=0, description="Длина стороны куба")
    n_grid: int = Field(description="Число мод на ось")
    dealias_fraction: float = Field(default=2.0 / 3.0, gt=0, le=1)
    observe_inclusive: bool = False

    @field_validator('n_grid')
    @classmethod
    def validate_n_grid(cls, v: int) -> int:
        if v < 4:
            raise ValueError("n_grid must be at least 4")
        if v % 2:
            raise ValueError("n_grid must be even")
        return v

    @property
    def lambda1(self) -> float:
        """Константа Пуанкаре 4*pi^2/L^2."""
        return 4.0 * math.pi ** 2 / self.L ** 2

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (3, self.n_grid, self.n_grid, self.n_grid)

    @property
    def spacing(self) -> float:
        return self.L / self.n_grid

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def lattice(self) -> Lattice:
        return _build_lattice(self)

    def observed_mask(self, N: int) -> np.ndarray:
        """Маска наблюдаемых мод 0 < |K| < N (или <= N при observe_inclusive)."""
        return _observed_mask(self, N)

    def max_observable(self) -> int:
        """Наибольшее N, при котором наблюдаемый шар лежит внутри удерживаемой решетки."""
        half = self.n_grid // 2
        return half - 1 if self.observe_inclusive else half

    def coordinates(self) -> np.ndarray:
        """Узлы физической сетки, форма (3, n, n, n)."""
        x = np.arange(self.n_grid) * self.spacing
        return np.stack(np.meshgrid(x, x, x, indexing='ij'))


@lru_cache(maxsize=16)
def _build_lattice(grid: GridSpec) -> Lattice:
    n = grid.n_grid
    k1 = np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(np.int64)
    K = np.stack(np.meshgrid(k1, k1, k1, indexing='ij'))
    k_sq = np.sum(K * K, axis=0).astype(np.float64)

    retained = np.all(np.abs(K) < n // 2, axis=0)
    retained[0, 0, 0] = False

    # |K_i| < dealias_fraction * n/2 (строго), иначе при n кратном 3 алиасы попадают внутрь
    cut = math.ceil(grid.dealias_fraction * n / 2 - 1e-9) - 1
    if cut < 1:
        raise FieldError(
            f"dealias_fraction={grid.dealias_fraction} leaves no modes on n_grid={n}"
        )
    dealias = retained & np.all(np.abs(K) <= cut, axis=0)

    inv_k_sq = np.zeros_like(k_sq)
    np.divide(1.0, k_sq, out=inv_k_sq, where=k_sq > 0)

    wave = (2.0 * math.pi / grid.L) * K.astype(np.float64)
    lam = (4.0 * math.pi ** 2 / grid.L ** 2) * k_sq

    return Lattice(
        K=_readonly(K),
        k_sq=_readonly(k_sq),
        wave=_readonly(wave),
        lam=_readonly(lam),
        inv_k_sq=_readonly(inv_k_sq),
        retained=_readonly(retained),
        dealias=_readonly(dealias),
        dealias_cut=cut,
    )


@lru_cache(maxsize=64)
def _observed_mask(grid: GridSpec, N: int) -> np.ndarray:
    lat = grid.lattice
    bound = float(N) * float(N)
    if grid.observe_inclusive:
        mask = lat.k_sq <= bound
    else:
        mask = lat.k_sq < bound
    return _readonly(mask & lat.retained)


__all__ = ['GridSpec', 'Lattice']
