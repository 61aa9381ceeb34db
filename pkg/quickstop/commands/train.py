"""Команда train: оценка матриц переходов по размеченным трассам.

Пишет артефакт модели (без порогов) и рядом отчет об обучении.
"""

import logging
import os
from typing import Optional

import click

from quickstop.artifacts import (file_hash, read_traces, save_json,
                                 write_traces)
from quickstop.commands.common import build, parse_floats
from quickstop.config import get_settings
from quickstop.exceptions import UsageError
from quickstop.schemas import ModelArtifact, Provenance
from quickstop.training import (Quantizer, fit_training_pipeline,
                                split_traces)

logger = logging.getLogger(__name__)


def report_path_for(output: str) -> str:
    """Путь отчета рядом с моделью: model.json → model.report.json."""
    stem, _ = os.path.splitext(output)
    return f'{stem}.report.json'


@click.command('train')
@click.argument('traces_path', type=click.Path(dir_okay=False))
@click.option('-o', '--output', default='model.json', show_default=True,
              help='Файл артефакта модели.')
@click.option('--report', 'report_path', default=None,
              help='Файл отчета (по умолчанию рядом с моделью).')
@click.option('--classes', type=click.IntRange(min=2), default=None,
              help='Число классов C (равные интервалы оценки).')
@click.option('--boundaries', callback=parse_floats, default=None,
              help='Границы интервалов оценки через запятую.')
@click.option('--smoothing', type=click.FloatRange(min=0.0), default=None,
              help='Сглаживание Лапласа a ≥ 0.')
@click.option('--split-seed', type=int, default=None,
              help='Обучаться на 80%% трасс, выбранных с этим зерном.')
@click.option('--test-output', default=None,
              help='Куда записать отложенные 20%% трасс.')
@click.option('--calibrate/--no-calibrate', default=True, show_default=True,
              help='Калибровать линейный оценщик под интервалы.')
def train(
        traces_path: str,
        output: str,
        report_path: Optional[str],
        classes: Optional[int],
        boundaries: Optional[tuple[float, ...]],
        smoothing: Optional[float],
        split_seed: Optional[int],
        test_output: Optional[str],
        calibrate: bool
) -> None:
    """Оценивает матрицы переходов α₀ и α₁ по трассам TRACES_PATH."""
    settings = get_settings()
    smoothing = settings.smoothing if smoothing is None else smoothing
    if boundaries is not None and classes is not None:
        if len(boundaries) + 1 != classes:
            raise UsageError('--classes не совпадает с числом границ')
    if boundaries is not None:
        quantizer = build(Quantizer, boundaries=boundaries)
    elif classes is not None:
        quantizer = Quantizer.uniform(classes)
    else:
        quantizer = Quantizer()
    if test_output is not None and split_seed is None:
        raise UsageError('--test-output требует --split-seed')

    traces = read_traces(traces_path)
    if split_seed is not None:
        traces, test = split_traces(traces, seed=split_seed)
        if test_output is not None:
            with open(test_output, 'w', encoding='utf-8') as f:
                write_traces(test, f)
        logger.info('Обучение на %d трассах, отложено %d',
                    len(traces), len(test))

    result = fit_training_pipeline(traces, quantizer, smoothing,
                                   classes or quantizer.class_count,
                                   calibrate)
    save_json(result.report, report_path or report_path_for(output))
    model = result.report.require_model()
    artifact = ModelArtifact(
        class_count=model.class_count,
        alpha0=model.alpha0,
        alpha1=model.alpha1,
        quantizer=result.quantizer,
        scorer=result.scorer,
        prior_pi1=result.report.prior_pi1,
        provenance=Provenance(
            seed=split_seed,
            data_hash=file_hash(traces_path),
            source=traces_path,
            created_at=settings.created_at(),
        ),
    )
    save_json(artifact, output)
    click.echo(f'Модель записана в {output} (C={model.class_count}, '
               f'π₁={result.report.prior_pi1:.3f})')
