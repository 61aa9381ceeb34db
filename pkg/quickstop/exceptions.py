"""Исключения QuickStop.

Каждое исключение несет текстовое описание (detail) и код завершения
процесса (exit_code), который использует командная строка.
"""

from typing import Optional

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


class QuickStopError(Exception):
    """Базовое исключение пакета.

    Атрибуты:
        detail: Описание ошибки для пользователя.
        exit_code: Код завершения для командной строки.
    """
    exit_code = EXIT_FAILURE

    def __init__(self, detail: str, exit_code: Optional[int] = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(QuickStopError):
    """Недопустимые параметры или настройки."""
    exit_code = EXIT_USAGE


class DataError(QuickStopError):
    """Ошибка во входных данных или артефактах."""
    exit_code = EXIT_DATA


class TraceFormatError(DataError):
    """Некорректная строка JSONL с трассой.

    Атрибуты:
        line_number: Номер строки во входном файле (если известен).
    """

    def __init__(self, detail: str, line_number: Optional[int] = None) -> None:
        if line_number is not None:
            detail = f'строка {line_number}: {detail}'
        super().__init__(detail)
        self.line_number = line_number


class ArtifactError(DataError):
    """Артефакт модели или политики не прошел проверку."""


class TrainingError(DataError):
    """Обучающих данных недостаточно для оценки модели."""


class SimulationError(DataError):
    """Симулятор не смог построить трассу."""


class ImpossibleObservationError(DataError):
    """Переход невозможен при обеих гипотезах (нулевой знаменатель)."""


class HorizonTooLargeError(DataError):
    """Перебор историй для оракула слишком велик."""


class ConvergenceError(QuickStopError):
    """Итерация по ценности не сошлась.

    Атрибуты:
        residual: Последняя величина изменения ‖s₁ − s₀‖.
        iterations: Число выполненных итераций.
    """
    exit_code = EXIT_CONVERGENCE

    def __init__(self, residual: float, iterations: int) -> None:
        super().__init__(
            f'итерация по ценности не сошлась за {iterations} шагов '
            f'(невязка {residual:.3e})'
        )
        self.residual = residual
        self.iterations = iterations


class ThresholdOrderError(QuickStopError):
    """Пороги не монотонны по стоимости распространения c."""


class DetectorError(QuickStopError):
    """Ошибка вызывающего кода при работе детектора."""
