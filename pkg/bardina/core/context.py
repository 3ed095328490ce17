"""
Текущий экземпляр BardinaApplication.

init_app() кладет приложение в контекст, CommandDispatch достает его перед
вызовом обработчика подкоманды.
"""
from contextvars import ContextVar
from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from bardina.core.application import BardinaApplication

_current_app: ContextVar[Optional['BardinaApplication']] = ContextVar('bardina_app', default=None)


def set_app(app: 'BardinaApplication') -> None:
    _current_app.set(app)


def get_app() -> 'BardinaApplication':
    """
    Raises:
        RuntimeError: init_app() еще не вызывался
    """
    app = _current_app.get()
    if app is None:
        raise RuntimeError("bardina application is not initialised: call init_app() first")
    return app


__all__ = ['set_app', 'get_app']
