from dataclasses import dataclass
from pathlib import Path
from typing import Tuple


@dataclass(frozen=True)
class CliCommand:
    """
    Разобранная командная строка.

    Attributes:
        subcommand: truth | assimilate | recover | check-conditions | report
        config_path: Файл конфигурации эксперимента
        overrides: Пары key=value, перекрывающие значения файла
    """
    subcommand: str
    config_path: Path
    overrides: Tuple[str, ...] = ()


__all__ = ['CliCommand']
