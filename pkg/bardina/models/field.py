"""
Неизменяемое спектральное векторное поле на периодической решетке.
"""
from dataclasses import dataclass, replace
from numbers import Number
from typing import Union

import numpy as np

from bardina.core.errors import FieldError, GridMismatchError
from bardina.models.grid import GridSpec

Scalar = Union[float, int, np.floating]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Коэффициенты Фурье векторного поля u(x) = sum_K c_K exp(2*pi*i*K.x/L).

    Массив коэффициентов копируется при создании и помечается только для чтения:
    каждая операция возвращает новое поле.

    Attributes:
        grid: Сетка поля
        coeffs: Комплексный массив формы (3, n, n, n) в порядке FFT
        divergence_free: Поле прошло проекцию Лере
        dealiased: Поле ограничено маской деалиасинга
    """
    grid: GridSpec
    coeffs: np.ndarray
    divergence_free: bool = False
    dealiased: bool = False

    def __post_init__(self):
        array = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if array.shape != self.grid.shape:
            raise FieldError(f"coefficient array has shape {array.shape}, expected {self.grid.shape}")
        array.setflags(write=False)
        object.__setattr__(self, 'coeffs', array)

    @classmethod
    def zeros(cls, grid: GridSpec) -> 'SpectralField':
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), divergence_free=True, dealiased=True)

    def with_coeffs(self, coeffs: np.ndarray, **flags: bool) -> 'SpectralField':
        """Новое поле на той же сетке с теми же флагами (если не переопределены)."""
        return replace(self, coeffs=coeffs, **flags)

    def same_grid(self, other: 'SpectralField') -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"fields live on different grids: {self.grid} vs {other.grid}")

    # --- Арифметика ---
    def _combine(self, other: 'SpectralField', coeffs: np.ndarray) -> 'SpectralField':
        return SpectralField(
            self.grid,
            coeffs,
            divergence_free=self.divergence_free and other.divergence_free,
            dealiased=self.dealiased and other.dealiased,
        )

    def __add__(self, other: 'SpectralField') -> 'SpectralField':
        if not isinstance(other, SpectralField):
            return NotImplemented
        self.same_grid(other)
        return self._combine(other, self.coeffs + other.coeffs)

    def __sub__(self, other: 'SpectralField') -> 'SpectralField':
        if not isinstance(other, SpectralField):
            return NotImplemented
        self.same_grid(other)
        return self._combine(other, self.coeffs - other.coeffs)

    def __mul__(self, scalar: Scalar) -> 'SpectralField':
        if not isinstance(scalar, Number):
            return NotImplemented
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'SpectralField':
        return self.with_coeffs(-self.coeffs)

    # --- Диагностика ---
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __repr__(self) -> str:
        return (
            f"SpectralField(n_grid={self.grid.n_grid}, L={self.grid.L:.6g}, "
            f"max|c|={self.max_abs():.3e}, divergence_free={self.divergence_free}, "
            f"dealiased={self.dealiased})"
        )


__all__ = ['SpectralField']
