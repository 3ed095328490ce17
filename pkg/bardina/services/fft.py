"""
Обертка над scipy.fft для полей на решетке.

Нормировка "forward": прямое преобразование делится на n^3, так что коэффициенты
совпадают с c_K в u(x) = sum_K c_K exp(2*pi*i*K.x/L).
"""
import numpy as np
from scipy import fft as sfft

from bardina.core.config import get_settings

_AXES = (-3, -2, -1)


def to_physical(coeffs: np.ndarray) -> np.ndarray:
    """Значения в узлах сетки (вещественная часть обратного преобразования)."""
    values = sfft.ifftn(coeffs, axes=_AXES, norm="forward", workers=get_settings().fft_workers())
    return np.ascontiguousarray(values.real)


def to_spectral(values: np.ndarray) -> np.ndarray:
    """Коэффициенты Фурье вещественных значений в узлах."""
    return sfft.fftn(values, axes=_AXES, norm="forward", workers=get_settings().fft_workers())


__all__ = ['to_physical', 'to_spectral']
