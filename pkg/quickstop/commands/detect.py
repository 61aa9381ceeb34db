"""Команда detect: онлайн-детектор над потоком событий.

Каждая строка входа содержит одно событие с trace_id; по каждой трассе
выдается ровно одна строка с решением.
"""

from typing import IO, Optional

import click

from quickstop.artifacts import iter_stream_events, load_policy
from quickstop.commands.common import PROBABILITY
from quickstop.detector import StreamDetector
from quickstop.exceptions import DataError
from quickstop.schemas import ModelArtifact, StreamEvent, VerdictLine
from quickstop.training import EdgeScorer


def event_class(event: StreamEvent, artifact: ModelArtifact) -> int:
    """Класс ребра события: готовый или по оценщику артефакта.

    Исключения:
        DataError: Если класс не определяется или вне диапазона модели.
    """
    try:
        if event.edge_class is not None:
            z = event.edge_class
        else:
            scorer = artifact.scorer
            if scorer is None or (event.score is not None
                                  and not event.has_features):
                scorer = EdgeScorer.precomputed()
            z = artifact.quantizer.quantize(scorer.score_event(event))
    except ValueError as exc:
        raise DataError(f'трасса {event.trace_id}: {exc}') from exc
    if not 0 <= z < artifact.class_count:
        raise DataError(
            f'трасса {event.trace_id}: класс {z} вне диапазона '
            f'[0, {artifact.class_count - 1}]'
        )
    return z


@click.command('detect')
@click.argument('policy_path', type=click.Path(dir_okay=False))
@click.option('-i', '--input', 'stream', type=click.File('r'),
              default='-', help='Поток событий JSONL (по умолчанию stdin).')
@click.option('--prior', type=PROBABILITY, default=None,
              help='Априорная вероятность H1 (по умолчанию из политики).')
@click.option('--flush/--no-flush', default=True, show_default=True,
              help='Решать незавершенные трассы в конце потока.')
def detect(
        policy_path: str,
        stream: IO[str],
        prior: Optional[float],
        flush: bool
) -> None:
    """Читает события и печатает решения по мере их принятия."""
    artifact, policy = load_policy(policy_path)
    detector = StreamDetector(policy, prior)
    for event in iter_stream_events(stream):
        verdict = detector.feed(event.trace_id, event_class(event, artifact))
        if verdict is not None:
            click.echo(VerdictLine.build(event.trace_id,
                                         verdict).model_dump_json())
    if flush:
        for trace_id, verdict in detector.flush():
            click.echo(VerdictLine.build(trace_id, verdict).model_dump_json())
