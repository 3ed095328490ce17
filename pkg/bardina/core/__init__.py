"""Ядро приложения bardina."""

from bardina.core.config import Settings, get_settings, settings
from bardina.core.context import get_app, set_app
from bardina.core.errors import *

__all__ = [
    'Settings',
    'get_settings',
    'settings',
    'get_app',
    'set_app',
    'BardinaError',
    'ConfigError',
    'IntegrationError',
    'RecoveryError',
]
