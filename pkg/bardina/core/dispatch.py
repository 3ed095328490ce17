"""
Диспетчер подкоманд командной строки.

Каждый модуль из bardina.handlers создает свой CommandDispatch и
регистрирует в нем одну функцию через wrap_handler. Диспетчер замеряет
время, передает обработчику приложение из контекста, превращает
исключения в код возврата 1 и логирует итог.
"""
import time
from dataclasses import dataclass
from functools import wraps
from typing import Any, Callable, Optional, Protocol, TYPE_CHECKING

from bardina.core.context import get_app
from bardina.core.errors import BardinaError
from bardina.models.command import CliCommand
from bardina.utils.constants import ExitCodes, Sections

if TYPE_CHECKING:
    from bardina.core.application import BardinaApplication

# Обработчик: (команда, приложение) -> код возврата
THandler = Callable[..., int]


@dataclass
class ExecutionResult:
    """Результат выполнения подкоманды."""

    success: bool
    execution_time: float
    exit_code: int = ExitCodes.ERROR
    error: Optional[BaseException] = None


class ExecutionLogger(Protocol):
    """Протокол для логирования выполнения команд."""

    def log(self, title: str, command: CliCommand, result: ExecutionResult) -> None:
        ...


class DefaultExecutionLogger:
    """Стандартная реализация логирования."""

    def log(self, title: str, command: CliCommand, result: ExecutionResult) -> None:
        app = get_app()
        time_ms = round(result.execution_time * 1000)
        message = f"Executed <{title}> with {command.config_path} in {time_ms}ms, exit code {result.exit_code}"

        if result.success:
            app.logger.info(message, Sections.COMMAND, depth=3)
        else:
            app.logger.error(message, Sections.COMMAND, depth=3)


class CommandDispatch:
    """
    Одна подкоманда: имя, описание и обработчик.

    Example:
        >>> dp = CommandDispatch(title="recover", description="Run the recovery")
        >>> @dp.wrap_handler()
        ... def recover(cmd: CliCommand, app: BardinaApplication) -> int:
        ...     return 0
    """

    def __init__(
        self,
        title: str,
        description: str = "",
        logger: Optional[ExecutionLogger] = None,
    ):
        self.title = title
        self.description = description or f"Subcommand {title}"
        self._logger = logger or DefaultExecutionLogger()
        self._handler: Optional[THandler] = None

    @property
    def handler(self) -> Optional[THandler]:
        return self._handler

    def wrap_handler(self) -> Callable[[THandler], THandler]:
        """
        Декоратор обработчика подкоманды.

        Обработчик получает (cmd, app) и возвращает код возврата; любое
        исключение логируется с traceback (попадает в errors.log) и дает код 1.
        """

        def decorator(func: THandler) -> THandler:
            @wraps(func)
            def wrapper(cmd: CliCommand, *args: Any, **kwargs: Any) -> int:
                start_time = time.perf_counter()
                result = ExecutionResult(success=False, execution_time=0.0)
                app: 'BardinaApplication' = get_app()

                try:
                    kwargs['app'] = app
                    result.exit_code = int(func(cmd, *args, **kwargs))
                    result.success = result.exit_code == ExitCodes.OK
                except BardinaError as e:
                    result.error = e
                    app.logger.exception(f"❌ {self.title} failed: {e}", Sections.COMMAND)
                except Exception as e:
                    result.error = e
                    app.logger.exception(f"❌ {self.title} crashed: {type(e).__name__}: {e}", Sections.COMMAND)
                finally:
                    result.execution_time = time.perf_counter() - start_time
                    self._logger.log(self.title, cmd, result)

                return result.exit_code

            self._handler = wrapper
            return wrapper

        return decorator

    def __call__(self, cmd: CliCommand) -> int:
        if self._handler is None:
            raise RuntimeError(f"no handler registered for subcommand {self.title}")
        return self._handler(cmd)


__all__ = [
    'THandler',
    'ExecutionResult',
    'ExecutionLogger',
    'DefaultExecutionLogger',
    'CommandDispatch',
]
