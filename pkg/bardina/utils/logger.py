import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from loguru import logger

from bardina.core.config import settings

CALLER_WIDTH = 55
SECTION_WIDTH = 9

_LINE = "{extra[caller]} | {extra[section]:<%d} | {message}" % SECTION_WIDTH
CONSOLE_FORMAT = "<level>{level: <8}</level> | <cyan>{time:HH:mm:ss.SSS}</cyan> | " + _LINE
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | " + _LINE


@dataclass(frozen=True)
class FileSink:
    name: str
    level: str
    rotation: str
    retention: str


FILE_SINKS = (
    FileSink("info.log", "DEBUG", "10 MB", "30 days"),
    FileSink("errors.log", "ERROR", "5 MB", "60 days"),
)


class AlignedLogger:
    """
    Логгер с секцией (SPECTRAL, RECOVERY, ...) и выровненной колонкой места вызова.

    Модули заводят его один раз: log = AlignedLogger.section(Sections.RECOVERY).
    """

    default_depth = 2  # фреймы log() и метода уровня

    def __init__(self, default_section: str = "BARDINA"):
        self.default_section = default_section.upper()

    def _bound(self, section: Optional[str], depth: int, exception: bool = False):
        name = (section or self.default_section).upper()
        return logger.opt(depth=depth, exception=exception).bind(section=name)

    def log(self, level: str, message: str, section: Optional[str] = None, depth: int = default_depth):
        self._bound(section, depth).log(level, message)

    def debug(self, message: str, section: Optional[str] = None, depth: int = default_depth):
        self.log("DEBUG", message, section, depth)

    def info(self, message: str, section: Optional[str] = None, depth: int = default_depth):
        self.log("INFO", message, section, depth)

    def success(self, message: str, section: Optional[str] = None, depth: int = default_depth):
        self.log("SUCCESS", message, section, depth)

    def warning(self, message: str, section: Optional[str] = None, depth: int = default_depth):
        self.log("WARNING", message, section, depth)

    def error(self, message: str, section: Optional[str] = None, depth: int = default_depth):
        self.log("ERROR", message, section, depth)

    def exception(self, message: str, section: Optional[str] = None, depth: int = default_depth - 1):
        """ERROR с traceback текущего исключения."""
        self._bound(section, depth, exception=True).error(message)

    @staticmethod
    def section(section_name: str) -> 'AlignedLogger':
        return AlignedLogger(section_name)


def caller_column(record) -> bool:
    """Фильтр loguru: дописывает в extra секцию и колонку module:function:line фиксированной ширины."""
    extra = record["extra"]
    extra.setdefault("section", "")
    where = f"{record['name']}:{record['function']}:{record['line']}"
    if len(where) > CALLER_WIDTH:
        where = "..." + where[-(CALLER_WIDTH - 3):]
    extra["caller"] = where.ljust(CALLER_WIDTH)
    return True


def setup_logging(log_dir: str = "logs", level: Optional[str] = None, enable_rotation: bool = True) -> Path:
    """
    Консоль (stderr) и файлы info.log / errors.log в log_dir.

    stdout остается за обработчиками команд: туда печатаются таблицы.
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)
    logger.remove()

    logger.add(
        sys.stderr,
        format=CONSOLE_FORMAT,
        level=level or settings.log_level,
        colorize=True,
        backtrace=True,
        diagnose=False,
        filter=caller_column,
    )
    for sink in FILE_SINKS:
        logger.add(
            log_path / sink.name,
            format=FILE_FORMAT,
            level=sink.level,
            rotation=sink.rotation if enable_rotation else None,
            retention=sink.retention,
            compression="zip",
            backtrace=True,
            diagnose=False,
            enqueue=True,
            filter=caller_column,
        )
    return log_path


class ComponentLogger:
    """Сводки запуска: подкоманды и разрешенная конфигурация."""

    @staticmethod
    def log_commands(names: Sequence[str]):
        log = logger.bind(section="COMMAND")
        for name in names:
            log.debug(f"subcommand registered: {name}")
        log.success(f"{len(names)} subcommands: {', '.join(names)}")

    @staticmethod
    def log_experiment(summary: Iterable[str]):
        log = logger.bind(section="CONFIG")
        log.info("resolved experiment:")
        for line in summary:
            log.info(f"  {line}")
