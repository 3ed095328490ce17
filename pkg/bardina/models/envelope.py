"""
Априорные оценки решения: начальные данные и границы параметра.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class BoundsEnvelope(BaseModel):
    """
    Attributes:
        M_A: Оценка ||u(0)||
        M_B: Оценка ||grad u(0)||
        M_C: Оценка ||A u(0)||
        alpha0: Нижняя граница alpha
        alpha1: Верхняя граница alpha
        c_gn: Константа Гальярдо-Ниренберга (None - не задана)
    """
    model_config = ConfigDict(frozen=True)

    M_A: float = Field(ge=0)
    M_B: float = Field(ge=0)
    M_C: float = Field(ge=0)
    alpha0: float = Field(gt=0)
    alpha1: float = Field(gt=0)
    c_gn: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode='after')
    def validate_alpha_bounds(self) -> 'BoundsEnvelope':
        if self.alpha1 < self.alpha0:
            raise ValueError("alpha1 must not be smaller than alpha0")
        return self


__all__ = ['BoundsEnvelope']
