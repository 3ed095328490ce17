"""
Восстановление масштаба фильтра alpha в упрощенной модели Бардины.

Основные компоненты доступны через:
- bardina.core - Ядро приложения (application, config, context, dispatch, errors)
- bardina.utils - Утилиты (logger, constants, tools)
- bardina.models - Модели данных (сетка, поля, параметры, записи итераций)
- bardina.services - Численные алгоритмы (спектральные операторы, истина, nudging, восстановление)
- bardina.rules - Условия сходимости
- bardina.managers - Сценарии экспериментов и артефакты
- bardina.handlers - Подкоманды командной строки
"""
from bardina.core.application import BardinaApplication
from bardina import instance

__all__ = ["BardinaApplication", "instance"]
