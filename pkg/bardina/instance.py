"""
Инициализация глобального экземпляра BardinaApplication.

Приложение хранится в contextvars (bardina.core.context), поэтому
обработчики и диспетчер получают его через get_app() без передачи параметров.
"""
from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from bardina.core.application import BardinaApplication


def get_app() -> 'BardinaApplication':
    """
    Прокси к bardina.core.context.get_app().

    Raises:
        RuntimeError: Если приложение не было инициализировано
    """
    from bardina.core.context import get_app as get_app_from_context
    return get_app_from_context()


def init_app(log_dir: str = "logs", log_level: Optional[str] = None) -> 'BardinaApplication':
    """
    Создает BardinaApplication и устанавливает его в контекст.

    Example:
        >>> from bardina.instance import init_app
        >>> app = init_app(log_dir="logs")
        >>> app.setup(commands=handlers)
        >>> app.run(["truth", "--config", "reference.cfg"])
    """
    from bardina.core.application import BardinaApplication
    from bardina.core.context import set_app

    app = BardinaApplication(log_dir=log_dir, log_level=log_level)
    set_app(app)

    return app


__all__ = ['init_app', 'get_app']
