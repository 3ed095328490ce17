"""
Настройки окружения через Pydantic Settings.

Переменные читаются из .env файла или переменных окружения.
Приоритет: переменные окружения > .env файл > значения по умолчанию

Параметры эксперимента (вязкость, сетка, расписание восстановления)
сюда не входят: они задаются файлом конфигурации, см. ConfigService.
"""
from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Settings(BaseSettings):
    """
    Настройки запуска с валидацией через Pydantic.

    Все настройки автоматически загружаются из .env файла или переменных окружения.
    """

    # === Logging Configuration ===
    log_level: str = Field(
        default='INFO',
        alias='LOG_LEVEL',
        description="Уровень логирования (DEBUG, INFO, WARNING, ERROR)"
    )

    log_dir: str = Field(
        default='logs',
        alias='LOG_DIR',
        description="Директория для хранения логов"
    )

    # === Numerics ===
    threads: Optional[int] = Field(
        default=None,
        alias='BARDINA_THREADS',
        description="Максимальное число потоков для FFT (scipy.fft workers)"
    )

    debug_checks: bool = Field(
        default=False,
        alias='BARDINA_DEBUG_CHECKS',
        description="Проверять инварианты полей после каждого шага"
    )

    check_every: int = Field(
        default=50,
        alias='BARDINA_CHECK_EVERY',
        description="Шаг выборочной проверки инвариантов, если BARDINA_DEBUG_CHECKS выключен"
    )

    model_config = SettingsConfigDict(
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=False,
        extra='ignore'
    )

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL: ожидается одно из {', '.join(LOG_LEVELS)}, получено {v!r}")
        return level

    @field_validator('threads')
    @classmethod
    def validate_threads(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("BARDINA_THREADS должен быть положительным")
        return v

    @field_validator('check_every')
    @classmethod
    def validate_check_every(cls, v: int) -> int:
        if v < 1:
            raise ValueError("BARDINA_CHECK_EVERY должен быть положительным")
        return v

    def fft_workers(self) -> int:
        """Число потоков для scipy.fft (по умолчанию 1, результат детерминирован)."""
        return self.threads or 1

    def should_check(self, step: int) -> bool:
        """Нужно ли проверять инварианты на данном шаге."""
        return self.debug_checks or step % self.check_every == 0


@lru_cache()
def get_settings() -> Settings:
    """
    Получить singleton экземпляр настроек.

    Используется lru_cache для кэширования, чтобы не читать .env повторно.
    """
    return Settings()


settings = get_settings()
