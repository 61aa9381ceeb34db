"""Команда solve: пороги остановки для модели переходов."""

from typing import Optional

import click

from quickstop.artifacts import file_hash, save_json
from quickstop.commands.common import (NON_NEGATIVE, PROBABILITY, POSITIVE,
                                       build, cost_options,
                                       resolve_artifact, with_options)
from quickstop.config import get_settings
from quickstop.models import CostConfig, SolverConfig
from quickstop.schemas import Provenance
from quickstop.solver import solve as solve_policy


@click.command('solve')
@click.argument('model_path', type=click.Path(dir_okay=False),
                required=False)
@click.option('--weibo-fixture', is_flag=True,
              help='Использовать встроенные матрицы переходов Weibo.')
@click.option('-o', '--output', default='policy.json', show_default=True,
              help='Файл артефакта политики.')
@with_options(cost_options)
@click.option('--c', 'c', type=NON_NEGATIVE, default=0.05,
              show_default=True, help='Стоимость шага распространения c.')
@click.option('--prior', type=PROBABILITY, default=None,
              help='Априорная вероятность H1 (по умолчанию из модели).')
@click.option('--grid', type=PROBABILITY, default=None,
              help='Шаг сетки убеждений ε.')
@click.option('--tol', type=POSITIVE, default=None,
              help='Допуск сходимости ε₀.')
@click.option('--max-iterations', type=click.IntRange(min=1), default=None)
def solve(
        model_path: Optional[str],
        weibo_fixture: bool,
        output: str,
        c_i: float,
        c_ii: float,
        c: float,
        prior: Optional[float],
        grid: Optional[float],
        tol: Optional[float],
        max_iterations: Optional[int]
) -> None:
    """Решает уравнение Беллмана и пишет 2C порогов."""
    settings = get_settings()
    artifact = resolve_artifact(model_path, weibo_fixture)
    costs = build(
        CostConfig, c_I=c_i, c_II=c_ii, c=c,
        prior_pi1=artifact.prior_pi1 if prior is None else prior,
    )
    config = build(
        SolverConfig,
        grid_step=settings.grid_step if grid is None else grid,
        tolerance=settings.tolerance if tol is None else tol,
        max_iterations=(settings.max_iterations if max_iterations is None
                        else max_iterations),
    )
    policy = solve_policy(artifact.transition_model(), costs, config)
    provenance = Provenance(
        data_hash=file_hash(model_path) if model_path else None,
        source=model_path or 'weibo-fixture',
        created_at=settings.created_at(),
    )
    save_json(artifact.with_policy(policy, provenance), output)
    thresholds = policy.thresholds
    for z in range(artifact.class_count):
        low, high = thresholds.continuation_region(z)
        click.echo(f'z={z}: π_l={low:.4f} π_u={high:.4f}')
    click.echo(f'Политика записана в {output} '
               f'({thresholds.iterations} итераций)')
