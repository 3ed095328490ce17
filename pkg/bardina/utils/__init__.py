"""Утилиты bardina."""

from bardina.utils.logger import AlignedLogger, ComponentLogger, setup_logging
from bardina.utils.constants import Commands, ExitCodes, Sections
from bardina.utils.tools import *

__all__ = [
    'AlignedLogger',
    'ComponentLogger',
    'setup_logging',
    'Commands',
    'ExitCodes',
    'Sections',
]
