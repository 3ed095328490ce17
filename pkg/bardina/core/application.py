"""
Класс для настройки и запуска командной строки bardina.
"""
import argparse
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from bardina.core.components import create_app_components
from bardina.core.dispatch import CommandDispatch
from bardina.core.errors import ConfigError
from bardina.models.command import CliCommand
from bardina.models.experiment import ExperimentConfig
from bardina.services.config_service import ConfigService
from bardina.utils.constants import ExitCodes, Sections
from bardina.utils.logger import ComponentLogger, setup_logging


class _CliParser(argparse.ArgumentParser):
    """argparse без sys.exit(2): код 2 зарезервирован за вырожденным окном."""

    def error(self, message: str):
        raise ConfigError("cli", message)


class BardinaApplication:
    """
    Главный класс приложения.

    Пример использования:
        app = BardinaApplication()
        app.setup(commands=handlers)
        exit_code = app.run(["recover", "--config", "reference.cfg"])
    """

    def __init__(self, log_dir: str = "logs", log_level: Optional[str] = None):
        """
        Args:
            log_dir: Директория для хранения логов
            log_level: Уровень консольного лога (по умолчанию из настроек)
        """
        self.log_dir = log_dir
        self.log_level = log_level

        components = create_app_components()
        self.settings = components.settings
        self.logger = components.logger

        self._commands: Dict[str, CommandDispatch] = {}
        self._is_setup = False

    def setup_logging(self) -> 'BardinaApplication':
        """Настройка логирования."""
        setup_logging(self.log_dir, level=self.log_level)
        self.logger.debug("Starting bardina...", Sections.COMMAND)
        return self

    def register_commands(self, commands: List[CommandDispatch]) -> 'BardinaApplication':
        """Регистрация подкоманд."""
        for dp in commands:
            if dp.title in self._commands:
                raise ValueError(f"subcommand {dp.title} registered twice")
            self._commands[dp.title] = dp
        ComponentLogger.log_commands([dp.title for dp in commands])
        return self

    def setup(self, commands: Optional[List[CommandDispatch]] = None) -> 'BardinaApplication':
        if self._is_setup:
            self.logger.warning("Application already setup. Skipping...", Sections.COMMAND)
            return self

        self.setup_logging()
        if commands is not None:
            self.register_commands(commands)

        self._is_setup = True
        return self

    @property
    def commands(self) -> List[str]:
        return list(self._commands)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _CliParser(prog="bardina", description="Recursive recovery of the Bardina filter scale alpha")
        subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=_CliParser)
        for title, dp in self._commands.items():
            sub = subparsers.add_parser(title, help=dp.description, description=dp.description)
            sub.add_argument("--config", required=True, type=Path, help="experiment configuration file")
            sub.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")
        return parser

    def parse_command(self, argv: Optional[Sequence[str]] = None) -> CliCommand:
        """
        Raises:
            ConfigError: Неверная командная строка
        """
        args = self.build_parser().parse_args(argv)
        return CliCommand(subcommand=args.subcommand, config_path=args.config, overrides=tuple(args.overrides))

    def load_config(self, cmd: CliCommand) -> ExperimentConfig:
        """Читает конфигурацию, сохраняет resolved.cfg и логирует сводку."""
        cfg = ConfigService.parse_config(cmd.config_path, cmd.overrides)
        ConfigService.write_resolved(cfg)
        ComponentLogger.log_experiment(ConfigService.summary(cfg))
        return cfg

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Разбирает argv, выполняет подкоманду и возвращает код возврата."""
        if not self._is_setup:
            raise RuntimeError("Application is not setup. Call setup() before run()")

        try:
            cmd = self.parse_command(argv)
        except ConfigError as e:
            self.logger.error(f"❌ {e}", Sections.COMMAND)
            return ExitCodes.ERROR
        return self._commands[cmd.subcommand](cmd)


__all__ = ['BardinaApplication']
