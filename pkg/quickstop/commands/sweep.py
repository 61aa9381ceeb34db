"""Команды sweep: прогоны по сеткам параметров с выводом в CSV."""

from typing import Optional

import click
import pandas as pd

from quickstop.artifacts import read_traces, write_csv
from quickstop.commands.common import (NON_NEGATIVE, PROBABILITY, POSITIVE,
                                       build, classified, cost_options,
                                       parameter_range, parse_floats,
                                       resolve_artifact, with_options)
from quickstop.config import get_settings
from quickstop.evaluation import cost_sweep, noise_sweep
from quickstop.models import CostConfig, SolverConfig
from quickstop.simulator import SyntheticConfig
from quickstop.solver import threshold_monotonicity_sweep

DEFAULT_NOISE_LEVELS = '0,0.1,0.2,0.3,0.4,0.5'

c_range_options = [
    click.option('--c-start', type=NON_NEGATIVE, default=0.05,
                 show_default=True),
    click.option('--c-stop', type=NON_NEGATIVE, default=1.2,
                 show_default=True),
    click.option('--c-step', type=POSITIVE, default=0.05,
                 show_default=True),
]

source_options = [
    click.argument('model_path', type=click.Path(dir_okay=False),
                   required=False),
    click.option('--weibo-fixture', is_flag=True,
                 help='Использовать встроенные матрицы переходов Weibo.'),
]


def solver_config(grid: Optional[float]) -> SolverConfig:
    settings = get_settings()
    return build(
        SolverConfig,
        grid_step=settings.grid_step if grid is None else grid,
        tolerance=settings.tolerance,
        max_iterations=settings.max_iterations,
    )


@click.group('sweep')
def sweep() -> None:
    """Прогоны по сеткам c и уровней шума."""


@sweep.command('thresholds')
@with_options(source_options)
@click.option('-o', '--output', default='thresholds.csv', show_default=True)
@with_options(cost_options)
@with_options(c_range_options)
@click.option('--grid', type=PROBABILITY, default=None)
def thresholds(
        model_path: Optional[str],
        weibo_fixture: bool,
        output: str,
        c_i: float,
        c_ii: float,
        c_start: float,
        c_stop: float,
        c_step: float,
        grid: Optional[float]
) -> None:
    """Пороги для каждого c с проверкой их монотонности."""
    artifact = resolve_artifact(model_path, weibo_fixture)
    costs = build(CostConfig, c_I=c_i, c_II=c_ii,
                  prior_pi1=artifact.prior_pi1)
    rows = threshold_monotonicity_sweep(
        artifact.transition_model(),
        costs,
        parameter_range(c_start, c_stop, c_step),
        solver_config(grid),
    )
    frame = pd.DataFrame([
        {
            'c': row.c,
            **{f'pi_lower_{z}': v for z, v in enumerate(row.pi_lower)},
            **{f'pi_upper_{z}': v for z, v in enumerate(row.pi_upper)},
        }
        for row in rows
    ])
    write_csv(frame, output)
    click.echo(f'{len(frame)} строк записано в {output}')


@sweep.command('cost')
@with_options(source_options)
@click.option('--traces', 'traces_path', type=click.Path(dir_okay=False),
              required=True, help='Размеченные трассы JSONL.')
@click.option('-o', '--output', default='cost_sweep.csv', show_default=True)
@with_options(cost_options)
@with_options(c_range_options)
@click.option('--prior', type=PROBABILITY, default=None)
@click.option('--grid', type=PROBABILITY, default=None)
def cost(
        model_path: Optional[str],
        weibo_fixture: bool,
        traces_path: str,
        output: str,
        c_i: float,
        c_ii: float,
        c_start: float,
        c_stop: float,
        c_step: float,
        prior: Optional[float],
        grid: Optional[float]
) -> None:
    """Метрики детектора для каждого c на одних и тех же трассах."""
    artifact = resolve_artifact(model_path, weibo_fixture)
    costs = build(
        CostConfig, c_I=c_i, c_II=c_ii,
        prior_pi1=artifact.prior_pi1 if prior is None else prior,
    )
    frame = cost_sweep(
        artifact.transition_model(),
        costs,
        parameter_range(c_start, c_stop, c_step),
        classified(read_traces(traces_path), artifact),
        solver_config(grid),
    )
    write_csv(frame, output)
    click.echo(f'{len(frame)} строк записано в {output}')


@sweep.command('noise')
@click.option('-o', '--output', default='noise_sweep.csv', show_default=True)
@click.option('--levels', callback=parse_floats,
              default=DEFAULT_NOISE_LEVELS, show_default=True,
              help='Вероятности ошибки класса через запятую.')
@with_options(cost_options)
@click.option('--c', 'c', type=NON_NEGATIVE, default=0.3, show_default=True)
@click.option('--nodes', type=click.IntRange(min=2), default=500,
              show_default=True)
@click.option('--traces', 'trace_count', type=click.IntRange(min=2),
              default=500, show_default=True)
@click.option('--smoothing', type=click.FloatRange(min=0.0), default=None)
@click.option('--grid', type=PROBABILITY, default=None)
@click.option('--seed', type=int, default=None)
def noise(
        output: str,
        levels: tuple[float, ...],
        c_i: float,
        c_ii: float,
        c: float,
        nodes: int,
        trace_count: int,
        smoothing: Optional[float],
        grid: Optional[float],
        seed: Optional[int]
) -> None:
    """Обучение и оценка на синтетических трассах с ошибками классов."""
    settings = get_settings()
    if not levels or any(not 0.0 <= p <= 1.0 for p in levels):
        raise click.BadParameter('уровни шума должны лежать в [0, 1]',
                                 param_hint='--levels')
    synthetic = build(
        SyntheticConfig,
        node_count=nodes,
        trace_count=trace_count,
        seed=settings.seed if seed is None else seed,
    )
    frame = noise_sweep(
        synthetic,
        levels,
        build(CostConfig, c_I=c_i, c_II=c_ii, c=c),
        solver_config(grid),
        settings.smoothing if smoothing is None else smoothing,
    )
    write_csv(frame, output)
    click.echo(f'{len(frame)} строк записано в {output}')
