"""Модуль настроек QuickStop.

Читает параметры по умолчанию из переменных окружения (и файла .env),
а также настраивает журналирование пакета.
"""

import logging
import os
from datetime import datetime, timezone
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from quickstop.exceptions import UsageError

load_dotenv()

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
HANDLER_NAME = 'quickstop-stderr'


class Settings(BaseModel):
    """Настройки по умолчанию.

    Атрибуты:
        log_level: Уровень журналирования.
        grid_step: Шаг сетки убеждений ε.
        tolerance: Допуск сходимости ε₀.
        max_iterations: Предельное число итераций по ценности.
        smoothing: Параметр сглаживания Лапласа при оценке переходов.
        seed: Зерно генератора случайных чисел.
        source_date_epoch: Время создания артефактов (секунды Unix); без
            него поле created_at не заполняется.
    """
    model_config = ConfigDict(frozen=True)

    log_level: str = 'WARNING'
    grid_step: float = Field(1e-3, gt=0, lt=1)
    tolerance: float = Field(1e-9, gt=0)
    max_iterations: int = Field(100_000, ge=1)
    smoothing: float = Field(1.0, ge=0)
    seed: int = 0
    source_date_epoch: Optional[int] = Field(None, ge=0)

    def created_at(self) -> Optional[datetime]:
        if self.source_date_epoch is None:
            return None
        return datetime.fromtimestamp(self.source_date_epoch, timezone.utc)


_ENV_NAMES = {
    'log_level': 'QUICKSTOP_LOG_LEVEL',
    'grid_step': 'QUICKSTOP_GRID_STEP',
    'tolerance': 'QUICKSTOP_TOLERANCE',
    'max_iterations': 'QUICKSTOP_MAX_ITERATIONS',
    'smoothing': 'QUICKSTOP_SMOOTHING',
    'seed': 'QUICKSTOP_SEED',
    'source_date_epoch': 'SOURCE_DATE_EPOCH',
}


@lru_cache
def get_settings() -> Settings:
    """Возвращает настройки, собранные из окружения.

    Исключения:
        UsageError: Если значение переменной окружения недопустимо.
    """
    values = {
        field: os.getenv(env_name)
        for field, env_name in _ENV_NAMES.items()
        if os.getenv(env_name) is not None
    }
    try:
        return Settings(**values)
    except ValidationError as exc:
        raise UsageError(
            f'Недопустимые настройки окружения: {exc.errors()[0]["msg"]}'
        ) from exc


def configure_logging(level: Optional[str] = None) -> None:
    """Настраивает корневой журнал пакета (вывод в stderr)."""
    level_name = (level or get_settings().log_level).upper()
    numeric = logging.getLevelName(level_name)
    if not isinstance(numeric, int):
        raise UsageError(f'Неизвестный уровень журналирования {level_name}')
    package_logger = logging.getLogger('quickstop')
    # поток stderr берется заново при каждом вызове
    for handler in list(package_logger.handlers):
        if handler.get_name() == HANDLER_NAME:
            package_logger.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.set_name(HANDLER_NAME)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    package_logger.addHandler(handler)
    package_logger.setLevel(numeric)
