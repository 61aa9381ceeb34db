"""Команда oracle: сравнение политики с точным оптимумом на горизонте L."""

from typing import Optional

import click

from quickstop.artifacts import load_policy
from quickstop.commands.common import PROBABILITY
from quickstop.evaluation import brute_force_optimal


@click.command('oracle')
@click.argument('policy_path', type=click.Path(dir_okay=False))
@click.option('--horizon', type=click.IntRange(min=1), default=6,
              show_default=True, help='Горизонт L (C^L ≤ 10^7).')
@click.option('--prior', type=PROBABILITY, default=None)
def oracle(policy_path: str, horizon: int, prior: Optional[float]) -> None:
    """Перебирает все истории длины ≤ L и печатает разрыв стоимостей."""
    _, policy = load_policy(policy_path)
    result = brute_force_optimal(policy.model, policy.costs, horizon,
                                 policy.thresholds, prior)
    click.echo(result.model_dump_json(indent=2))
