"""
Иерархия исключений пакета.

Все ошибки наследуются от BardinaError, а также от подходящего встроенного
исключения, чтобы вызывающий код мог ловить ValueError/RuntimeError как обычно.
"""
from typing import Optional


class BardinaError(Exception):
    """Базовое исключение пакета."""


class GridMismatchError(BardinaError, ValueError):
    """Операнды заданы на разных сетках."""


class FieldError(BardinaError, ValueError):
    """Некорректное поле или аргумент оператора."""


class ConfigError(BardinaError, ValueError):
    """
    Ошибка конфигурации эксперимента.

    Attributes:
        key: Ключ конфигурации, к которому относится ошибка
        constraint: Нарушенное ограничение в читаемом виде
    """

    def __init__(self, key: str, constraint: str):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")


class IntegrationError(BardinaError, RuntimeError):
    """
    Сбой интегрирования по времени.

    Attributes:
        step: Номер шага, на котором произошел сбой
        time: Модельное время шага
    """

    def __init__(self, message: str, step: int = 0, time: float = 0.0):
        self.step = step
        self.time = time
        super().__init__(f"{message} (step={step}, t={time:.6g})")


class CflViolationError(IntegrationError):
    """Шаг по времени нарушает адвективное условие CFL."""


class BlowUpError(IntegrationError):
    """Коэффициенты стали неконечными или превысили порог."""


class StabilityGuardError(IntegrationError):
    """Явная обратная связь неустойчива: eta * dt > 0.5."""


class ObservationWindowError(BardinaError, ValueError):
    """Запрошенное окно выходит за пределы потока наблюдений."""


class DegenerateWindowError(BardinaError, ArithmeticError):
    """delta_n ниже порога вырожденности: обновление невозможно."""


class ArtifactError(BardinaError, ValueError):
    """Артефакты эксперимента отсутствуют или не соответствуют схеме."""


class RecoveryError(BardinaError, RuntimeError):
    """
    Сбой внутри цикла восстановления.

    Attributes:
        iteration: Номер итерации n
    """

    def __init__(self, message: str, iteration: int, cause: Optional[BaseException] = None):
        self.iteration = iteration
        self.cause = cause
        super().__init__(f"iteration {iteration}: {message}")


__all__ = [
    'BardinaError',
    'GridMismatchError',
    'FieldError',
    'ConfigError',
    'IntegrationError',
    'CflViolationError',
    'BlowUpError',
    'StabilityGuardError',
    'ObservationWindowError',
    'DegenerateWindowError',
    'RecoveryError',
    'ArtifactError',
]
