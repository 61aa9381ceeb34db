"""Основной модуль командной строки QuickStop.

Создает группу команд click, настраивает журналирование и подключает
команды обучения, решения, детектирования, симуляции и оценки.
"""

from typing import Optional

import click

from quickstop.commands import (detect, evaluate, oracle, simulate, solve,
                                sweep, train)
from quickstop.config import configure_logging
from quickstop.exceptions import QuickStopError

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


class QuickStopGroup(click.Group):
    """Группа команд, переводящая QuickStopError в код завершения."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except QuickStopError as exc:
            error = click.ClickException(exc.detail)
            error.exit_code = exc.exit_code
            raise error from exc


@click.group(cls=QuickStopGroup)
@click.option('--log-level', type=click.Choice(LOG_LEVELS,
                                               case_sensitive=False),
              default=None, help='Уровень журналирования (stderr).')
def cli(log_level: Optional[str]) -> None:
    """QuickStop: быстрое обнаружение дезинформации по трассам."""
    configure_logging(log_level)


cli.add_command(train.train)
cli.add_command(solve.solve)
cli.add_command(detect.detect)
cli.add_command(simulate.simulate)
cli.add_command(evaluate.evaluate)
cli.add_command(sweep.sweep)
cli.add_command(oracle.oracle)

if __name__ == '__main__':
    cli()
