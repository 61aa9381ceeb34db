"""Команда evaluate: метрики политики на размеченных трассах."""

from typing import Optional

import click

from quickstop.artifacts import load_policy, read_traces, save_json
from quickstop.commands.common import PROBABILITY, classified
from quickstop.evaluation import evaluate as evaluate_policy


@click.command('evaluate')
@click.argument('policy_path', type=click.Path(dir_okay=False))
@click.argument('traces_path', type=click.Path(dir_okay=False))
@click.option('-o', '--output', default=None,
              help='Файл отчета JSON (по умолчанию stdout).')
@click.option('--prior', type=PROBABILITY, default=None)
def evaluate(
        policy_path: str,
        traces_path: str,
        output: Optional[str],
        prior: Optional[float]
) -> None:
    """Прогоняет детектор по каждой трассе и считает метрики."""
    artifact, policy = load_policy(policy_path)
    traces = classified(read_traces(traces_path), artifact)
    report = evaluate_policy(policy, traces, prior)
    if output is None:
        click.echo(report.model_dump_json(indent=2))
    else:
        save_json(report, output)
        click.echo(f'Точность {report.accuracy:.3f}, отчет в {output}')
