"""Общие утилиты команд: параметры, загрузка моделей и трасс."""

from typing import Optional, Sequence, Type, TypeVar

import click
import numpy as np
from pydantic import BaseModel, ValidationError

from quickstop.artifacts import load_model_artifact
from quickstop.exceptions import DataError, UsageError
from quickstop.fixtures import weibo_transition_model
from quickstop.models import Trace
from quickstop.schemas import ModelArtifact
from quickstop.training import classify_trace

M = TypeVar('M', bound=BaseModel)

PROBABILITY = click.FloatRange(0.0, 1.0, min_open=True, max_open=True)
POSITIVE = click.FloatRange(min=0.0, min_open=True)
NON_NEGATIVE = click.FloatRange(min=0.0)

cost_options = [
    click.option('--cI', 'c_i', type=POSITIVE, default=10.0,
                 show_default=True, help='Стоимость ложной тревоги c_I.'),
    click.option('--cII', 'c_ii', type=POSITIVE, default=10.0,
                 show_default=True, help='Стоимость пропуска c_II.'),
]


def with_options(options: Sequence):
    """Навешивает на команду набор общих опций."""
    def decorator(func):
        for option in reversed(options):
            func = option(func)
        return func
    return decorator


def build(schema: Type[M], **values) -> M:
    """Создает модель из параметров командной строки.

    Исключения:
        UsageError: Если параметры не проходят проверку.
    """
    try:
        return schema(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = '.'.join(str(part) for part in error['loc'])
        raise UsageError(f'{field}: {error["msg"]}') from exc


def parse_floats(ctx, param, value: Optional[str]
                 ) -> Optional[tuple[float, ...]]:
    """Разбирает список чисел через запятую."""
    if value is None:
        return None
    try:
        return tuple(float(part) for part in value.split(',') if part)
    except ValueError:
        raise click.BadParameter('ожидаются числа через запятую')


def parameter_range(start: float, stop: float, step: float
                    ) -> list[float]:
    """Значения от start до stop включительно с шагом step."""
    if step <= 0 or stop < start:
        raise UsageError('нужны start ≤ stop и step > 0')
    count = int(round((stop - start) / step)) + 1
    return [float(v) for v in np.round(start + step * np.arange(count), 12)]


def resolve_artifact(model_path: Optional[str],
                     weibo_fixture: bool) -> ModelArtifact:
    """Артефакт из файла или эталонная модель Weibo.

    Исключения:
        UsageError: Если не задан ни файл, ни --weibo-fixture.
    """
    if weibo_fixture:
        if model_path is not None:
            raise UsageError('укажите либо файл модели, либо --weibo-fixture')
        model = weibo_transition_model()
        return ModelArtifact(
            class_count=model.class_count,
            alpha0=model.alpha0,
            alpha1=model.alpha1,
        )
    if model_path is None:
        raise UsageError('не задан файл модели')
    return load_model_artifact(model_path)


def classified(traces: Sequence[Trace],
               artifact: ModelArtifact) -> list[Trace]:
    """Переводит трассы в классы ребер оценщиком артефакта.

    Исключения:
        DataError: Если класс вне диапазона модели.
    """
    result = []
    for trace in traces:
        classes = classify_trace(trace, artifact.scorer, artifact.quantizer)
        if any(not 0 <= z < artifact.class_count for z in classes):
            raise DataError(
                f'трасса {trace.trace_id}: класс вне диапазона '
                f'[0, {artifact.class_count - 1}]'
            )
        result.append(Trace.from_classes(trace.trace_id, classes,
                                         trace.label))
    return result
