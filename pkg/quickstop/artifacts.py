"""Чтение и запись файлов QuickStop.

Трассы хранятся в JSONL (одна трасса на строку), модели, политики и
отчеты в JSON, таблицы прогонов в CSV. Все файлы в кодировке UTF-8.
"""

import hashlib
import json
import logging
import os
from typing import IO, Iterable, Iterator

import pandas as pd
from pydantic import BaseModel, ValidationError

from quickstop.exceptions import ArtifactError, DataError, TraceFormatError
from quickstop.models import Trace
from quickstop.schemas import (ARTIFACT_FORMAT_VERSION, ModelArtifact,
                               StreamEvent)
from quickstop.solver import Policy

logger = logging.getLogger(__name__)


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = '.'.join(str(part) for part in error['loc'])
    return f'{location}: {error["msg"]}' if location else error['msg']


def file_hash(path: str) -> str:
    """SHA-256 содержимого файла."""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def iter_traces(stream: IO[str]) -> Iterator[Trace]:
    """Читает трассы из JSONL-потока, пропуская пустые строки.

    Исключения:
        TraceFormatError: Если строка не является корректной трассой.
    """
    for line_number, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            yield Trace.model_validate_json(line)
        except ValidationError as exc:
            raise TraceFormatError(_first_error(exc), line_number) from exc


def read_traces(path: str) -> list[Trace]:
    """Читает все трассы файла.

    Исключения:
        DataError: Если файла нет или в нем нет ни одной трассы.
        TraceFormatError: Если строка некорректна.
    """
    if not os.path.exists(path):
        raise DataError(f'Не найден {path}')
    with open(path, 'r', encoding='utf-8') as f:
        traces = list(iter_traces(f))
    if not traces:
        raise DataError(f'{path}: нет ни одной трассы')
    logger.info('Прочитано %d трасс из %s', len(traces), path)
    return traces


def write_traces(traces: Iterable[Trace], stream: IO[str]) -> int:
    """Пишет трассы в JSONL; возвращает число строк."""
    count = 0
    for trace in traces:
        stream.write(
            trace.model_dump_json(by_alias=True, exclude_none=True) + '\n'
        )
        count += 1
    return count


def iter_stream_events(stream: IO[str]) -> Iterator[StreamEvent]:
    """Читает поток событий detect (одно событие на строку).

    Исключения:
        TraceFormatError: Если строка не является корректным событием.
    """
    for line_number, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            yield StreamEvent.model_validate_json(line)
        except ValidationError as exc:
            raise TraceFormatError(_first_error(exc), line_number) from exc


def save_json(document: BaseModel, path: str) -> None:
    """Сохраняет модель Pydantic в JSON-файл."""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(document.model_dump_json(indent=2))
        f.write('\n')
    logger.info('Записан %s', path)


def load_model_artifact(path: str) -> ModelArtifact:
    """Загружает и проверяет артефакт модели или политики.

    Исключения:
        ArtifactError: Если файла нет, версия не поддерживается или
            содержимое не проходит проверку (суммы строк, пороги).
    """
    if not os.path.exists(path):
        raise ArtifactError(f'Не найден {path}')
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ArtifactError(f'{path}: некорректный JSON ({exc})') from exc
    if not isinstance(data, dict):
        raise ArtifactError(f'{path}: ожидался JSON-объект')
    version = data.get('format_version')
    if version != ARTIFACT_FORMAT_VERSION:
        raise ArtifactError(f'{path}: неподдерживаемая версия {version}')
    try:
        return ModelArtifact.model_validate(data)
    except ValidationError as exc:
        raise ArtifactError(f'{path}: {_first_error(exc)}') from exc


def load_policy(path: str) -> tuple[ModelArtifact, Policy]:
    """Загружает артефакт политики.

    Исключения:
        ArtifactError: Если в артефакте нет порогов.
    """
    artifact = load_model_artifact(path)
    if not artifact.is_policy:
        raise ArtifactError(f'{path}: нет порогов, сначала выполните solve')
    return artifact, artifact.policy()


def write_csv(frame: pd.DataFrame, path: str) -> None:
    """Пишет таблицу прогона в CSV без индекса."""
    frame.to_csv(path, index=False)
    logger.info('Записано %d строк в %s', len(frame), path)
