"""Модуль загрузки эталонных таблиц.

Загружает из каталога fixtures/ эмпирические матрицы переходов (новости и
дезинформация) и таблицу вероятностей распространения по типам ребер.
"""

import json
import logging
import os
from functools import lru_cache
from typing import Any, Dict

import numpy as np

from quickstop.exceptions import ArtifactError
from quickstop.models import Hypothesis, TransitionModel

logger = logging.getLogger(__name__)

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')
FIXTURE_FORMAT_VERSION = 1


def _load_fixture(name: str) -> Dict[str, Any]:
    """Читает JSON-таблицу из каталога fixtures.

    Параметры:
        name (str): Имя файла без каталога.
    Возвращает:
        Содержимое файла.
    Исключения:
        ArtifactError: Если файл не найден или версия не поддерживается.
    """
    file_path = os.path.join(FIXTURES_DIR, name)
    if not os.path.exists(file_path):
        raise ArtifactError(f'Не найден {file_path}')
    with open(file_path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if data.get('format_version') != FIXTURE_FORMAT_VERSION:
        raise ArtifactError(
            f'{name}: неподдерживаемая версия {data.get("format_version")}'
        )
    logger.debug('Загружена таблица %s', name)
    return data


@lru_cache
def weibo_transition_model() -> TransitionModel:
    """Возвращает модель переходов, оцененную на данных Weibo.

    В двух опубликованных строках, сумма которых равна 0.999 из-за
    округления, поправлена одна средняя ячейка; исходные строки лежат в
    поле published_rows.
    """
    data = _load_fixture('weibo_transitions.json')
    return TransitionModel(
        class_count=data['class_count'],
        alpha0=data['alpha0'],
        alpha1=data['alpha1'],
    )


@lru_cache
def spread_probabilities() -> np.ndarray:
    """Возвращает матрицу 2×C вероятностей ретвита по типу ребра.

    Строка 0 соответствует новостям, строка 1 дезинформации.
    """
    data = _load_fixture('spread_probabilities.json')
    table = np.array(
        [data[Hypothesis.news.name], data[Hypothesis.misinformation.name]],
        dtype=float,
    )
    table.setflags(write=False)
    return table
