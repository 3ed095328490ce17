"""
Базовые компоненты приложения.

Модуль не зависит от численной части пакета.
"""
from dataclasses import dataclass

from bardina.core.config import Settings, get_settings
from bardina.utils.logger import AlignedLogger


@dataclass
class AppComponents:
    """
    Контейнер для компонентов приложения.

    Attributes:
        settings: Настройки окружения
        logger: Логгер приложения
    """
    settings: Settings
    logger: AlignedLogger


def create_app_components() -> AppComponents:
    """Создать все компоненты приложения."""
    return AppComponents(
        settings=get_settings(),
        logger=AlignedLogger(),
    )


__all__ = ['AppComponents', 'create_app_components']
