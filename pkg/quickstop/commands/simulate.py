"""Команда simulate: синтетические трассы и манифест эксперимента."""

import os
from typing import Optional

import click

from quickstop.artifacts import save_json, write_traces
from quickstop.commands.common import build
from quickstop.config import get_settings
from quickstop.fixtures import weibo_transition_model
from quickstop.schemas import Provenance, SimulationManifest
from quickstop.simulator import (SyntheticConfig, generate_network,
                                 generate_traces, inject_noise_all,
                                 sample_markov_mixture)

UNIT = click.FloatRange(0.0, 1.0)


def manifest_path_for(output: str) -> str:
    stem, _ = os.path.splitext(output)
    return f'{stem}.manifest.json'


@click.command('simulate')
@click.option('-o', '--output', default='traces.jsonl', show_default=True,
              help='Файл трасс JSONL.')
@click.option('--manifest', 'manifest_path', default=None,
              help='Файл манифеста (по умолчанию рядом с трассами).')
@click.option('--nodes', type=click.IntRange(min=2), default=500,
              show_default=True)
@click.option('--edges-per-node', type=click.IntRange(min=1), default=3,
              show_default=True)
@click.option('--same-type-prob', type=UNIT, default=0.7, show_default=True)
@click.option('--traces', 'trace_count', type=click.IntRange(min=1),
              default=500, show_default=True)
@click.option('--prior', type=UNIT, default=0.5, show_default=True,
              help='Доля трасс с дезинформацией.')
@click.option('--max-events', type=click.IntRange(min=2), default=500,
              show_default=True)
@click.option('--noise', type=UNIT, default=0.0, show_default=True,
              help='Вероятность ошибки класса ребра.')
@click.option('--features', is_flag=True,
              help='Добавить в события признаки типов узлов.')
@click.option('--markov', is_flag=True,
              help='Сэмплировать из матриц Weibo вместо SI-модели.')
@click.option('--length', type=click.IntRange(min=2), default=100,
              show_default=True, help='Длина марковских трасс.')
@click.option('--seed', type=int, default=None)
def simulate(
        output: str,
        manifest_path: Optional[str],
        nodes: int,
        edges_per_node: int,
        same_type_prob: float,
        trace_count: int,
        prior: float,
        max_events: int,
        noise: float,
        features: bool,
        markov: bool,
        length: int,
        seed: Optional[int]
) -> None:
    """Генерирует размеченные трассы распространения."""
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    config = build(
        SyntheticConfig,
        node_count=nodes,
        edges_per_node=edges_per_node,
        same_type_prob=same_type_prob,
        trace_count=trace_count,
        prior_pi1=prior,
        max_events=max_events,
        with_features=features,
        seed=seed,
    )
    if markov:
        traces = sample_markov_mixture(weibo_transition_model(), prior,
                                       trace_count, length, seed)
        same_type = 0.0
    else:
        network = generate_network(config)
        traces = generate_traces(config, network)
        same_type = network.same_type_fraction()
    if noise > 0:
        traces = inject_noise_all(traces, noise, seed)

    with open(output, 'w', encoding='utf-8') as f:
        write_traces(traces, f)
    misinformation = sum(trace.label.label for trace in traces)
    manifest = SimulationManifest(
        config=config,
        trace_count=len(traces),
        label_counts=(len(traces) - misinformation, misinformation),
        misclassification_probability=noise,
        same_type_fraction=same_type,
        provenance=Provenance(
            seed=seed,
            source='markov' if markov else 'si-network',
            created_at=settings.created_at(),
        ),
    )
    save_json(manifest, manifest_path or manifest_path_for(output))
    click.echo(f'Записано {len(traces)} трасс в {output}')
