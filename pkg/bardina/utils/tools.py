"""
Подгонки для измерения скорости сходимости.
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.HARNESS)


def _positive(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, int]:
    """Индексы и значения положительных конечных элементов, число отброшенных."""
    arr = np.asarray(values, dtype=np.float64)
    keep = np.isfinite(arr) & (arr > 0.0)
    return np.flatnonzero(keep), arr[keep], int(arr.size - keep.sum())


def fit_geometric(values: Sequence[float], floor_ratio: float = 0.0) -> Optional[float]:
    """
    Отношение r геометрической последовательности: exp от наклона МНК-прямой
    по log(values) против номера.

    Args:
        values: Последовательность (неположительные элементы отбрасываются)
        floor_ratio: Элементы ниже floor_ratio * values[0] считаются уровнем шума

    Returns:
        r или None, если осталось меньше трех точек

    Example:
        >>> fit_geometric([1, 0.5, 0.25, 0.125])
        0.5
    """
    idx, vals, dropped = _positive(values)
    if dropped:
        log.debug(f"fit_geometric: {dropped} non-positive entries excluded")
    if floor_ratio > 0.0 and vals.size:
        above = vals >= floor_ratio * vals[0]
        idx, vals = idx[above], vals[above]
    if vals.size < 3:
        return None
    slope, _ = np.polyfit(idx.astype(np.float64), np.log(vals), 1)
    return float(math.exp(slope))


def fit_log_rate(
    times: Sequence[float],
    values: Sequence[float],
    floor_ratio: float = 1e-10,
    skip: float = 0.0,
) -> Optional[float]:
    """
    Наклон МНК-прямой log(values) по времени после переходного участка.

    Используются точки с t >= times[0] + skip и values >= floor_ratio * values[0].
    """
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.size == 0 or t.size != v.size or not v[0] > 0.0:
        return None
    keep = (t >= t[0] + skip) & np.isfinite(v) & (v > 0.0) & (v >= floor_ratio * v[0])
    if keep.sum() < 3:
        return None
    slope, _ = np.polyfit(t[keep], np.log(v[keep]), 1)
    return float(slope)


def non_increasing(values: Sequence[float], floor: float = 0.0) -> bool:
    """Последовательность не возрастает с допуском floor."""
    return all(b <= a + floor for a, b in zip(values, values[1:]))


__all__ = ['fit_geometric', 'fit_log_rate', 'non_increasing']
