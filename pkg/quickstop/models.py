"""Модуль доменных типов QuickStop.

Определяет гипотезы, марковскую модель наблюдений над классами ребер,
стоимости ошибок, трассы распространения информации и параметры решателя.
Все типы неизменяемы после создания.
"""

import enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

ROW_SUM_TOLERANCE = 1e-9
DEFAULT_CLASS_COUNT = 4


class Hypothesis(enum.Enum):
    """Перечисление гипотез.

    Атрибуты:
        news: H0, информация является новостью.
        misinformation: H1, информация является дезинформацией.
    """
    news = 0
    misinformation = 1

    @classmethod
    def from_label(cls, label: int) -> 'Hypothesis':
        """Возвращает гипотезу по метке 0/1."""
        return cls(int(label))

    @property
    def label(self) -> int:
        return self.value


class TransitionModel(BaseModel):
    """Пара матриц переходов между классами ребер.

    Атрибуты:
        class_count: Число классов C.
        alpha0: Матрица C×C переходов при H0, alpha0[z_prev][z_next].
        alpha1: Матрица C×C переходов при H1.
    """
    model_config = ConfigDict(frozen=True)

    class_count: int = Field(ge=2)
    alpha0: tuple[tuple[float, ...], ...]
    alpha1: tuple[tuple[float, ...], ...]

    @model_validator(mode='after')
    def check_stochastic(self) -> 'TransitionModel':
        for name in ('alpha0', 'alpha1'):
            matrix = np.asarray(getattr(self, name), dtype=float)
            if matrix.shape != (self.class_count, self.class_count):
                raise ValueError(
                    f'{name} должна иметь размер '
                    f'{self.class_count}×{self.class_count}'
                )
            if np.any(matrix < 0) or np.any(matrix > 1):
                raise ValueError(f'{name} содержит значения вне [0, 1]')
            bad_rows = np.flatnonzero(
                np.abs(matrix.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE
            )
            if bad_rows.size:
                raise ValueError(
                    f'строки {bad_rows.tolist()} матрицы {name} '
                    f'не суммируются в 1'
                )
        return self

    @cached_property
    def matrices(self) -> np.ndarray:
        """Массив формы (2, C, C): matrices[j] = alpha_j."""
        stacked = np.array([self.alpha0, self.alpha1], dtype=float)
        stacked.setflags(write=False)
        return stacked

    def alpha(self, hypothesis: Hypothesis) -> np.ndarray:
        return self.matrices[hypothesis.label]

    def check_class(self, z: int) -> int:
        """Проверяет, что класс ребра лежит в [0, C−1]."""
        if not 0 <= int(z) < self.class_count:
            raise ValueError(
                f'класс {z} вне диапазона [0, {self.class_count - 1}]'
            )
        return int(z)

    @classmethod
    def from_arrays(
            cls,
            alpha0: np.ndarray,
            alpha1: np.ndarray
    ) -> 'TransitionModel':
        alpha0 = np.asarray(alpha0, dtype=float)
        return cls(
            class_count=alpha0.shape[0],
            alpha0=alpha0.tolist(),
            alpha1=np.asarray(alpha1, dtype=float).tolist(),
        )

    @classmethod
    def uniform(cls, class_count: int = DEFAULT_CLASS_COUNT
                ) -> 'TransitionModel':
        """Неинформативная модель: все переходы равновероятны."""
        matrix = np.full((class_count, class_count), 1.0 / class_count)
        return cls.from_arrays(matrix, matrix)


class CostConfig(BaseModel):
    """Стоимости задачи остановки.

    Атрибуты:
        c_I: Стоимость ошибки первого рода (новость объявлена
            дезинформацией).
        c_II: Стоимость ошибки второго рода (дезинформация объявлена
            новостью).
        c: Стоимость одного шага распространения дезинформации.
        prior_pi1: Априорная вероятность H1.
    """
    model_config = ConfigDict(frozen=True)

    c_I: float = Field(10.0, gt=0)
    c_II: float = Field(10.0, gt=0)
    c: float = Field(0.05, ge=0)
    prior_pi1: float = Field(0.5, gt=0, lt=1)

    @property
    def decision_threshold(self) -> float:
        """Точка c_I/(c_I+c_II), где g(π) меняет ветвь."""
        return self.c_I / (self.c_I + self.c_II)


class SolverConfig(BaseModel):
    """Параметры итерации по ценности.

    Атрибуты:
        grid_step: Шаг сетки ε.
        tolerance: Допуск сходимости ε₀.
        max_iterations: Предельное число итераций.
    """
    model_config = ConfigDict(frozen=True)

    grid_step: float = Field(1e-3, gt=0, lt=1)
    tolerance: float = Field(1e-9, gt=0)
    max_iterations: int = Field(100_000, ge=1)

    @property
    def grid_size(self) -> int:
        return int(np.ceil(1.0 / self.grid_step - 1e-12)) + 1

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size)


class TraceEvent(BaseModel):
    """Событие трассы: ретвит по ребру (followee, retweeter).

    Атрибуты:
        edge_class: Заранее известный класс ребра (поле "class" в JSON).
        src_features: Признаки автора исходного сообщения V_k.
        dst_features: Признаки ретвитнувшего пользователя U_k.
        score: Готовая оценка классификатора в [0, 1].
        true_class: Истинный класс (для синтетических данных).
        time: Момент заражения в симуляции.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    edge_class: Optional[int] = Field(None, alias='class', ge=0)
    src_features: Optional[tuple[float, ...]] = None
    dst_features: Optional[tuple[float, ...]] = None
    score: Optional[float] = Field(None, ge=0, le=1)
    true_class: Optional[int] = Field(None, ge=0)
    time: Optional[float] = None

    @model_validator(mode='after')
    def check_payload(self) -> 'TraceEvent':
        if (self.src_features is None) != (self.dst_features is None):
            raise ValueError(
                'src_features и dst_features задаются только вместе'
            )
        if (self.edge_class is None and self.src_features is None
                and self.score is None):
            raise ValueError('событие без класса, признаков и оценки')
        return self

    @property
    def has_features(self) -> bool:
        return self.src_features is not None

    @property
    def feature_vector(self) -> np.ndarray:
        """Вектор (V, U), склеенный в одну строку."""
        return np.concatenate([self.src_features, self.dst_features])


class TraceKind(enum.Enum):
    """Вид содержимого трассы."""
    classified = 'classified'
    features = 'features'
    scored = 'scored'


class Trace(BaseModel):
    """Трасса распространения одного сообщения.

    Атрибуты:
        trace_id: Идентификатор трассы.
        label: Истинная гипотеза (если известна).
        events: Упорядоченные события.
    """
    model_config = ConfigDict(frozen=True)

    trace_id: str
    label: Optional[Hypothesis] = None
    events: tuple[TraceEvent, ...] = Field(min_length=1)

    @model_validator(mode='after')
    def check_events(self) -> 'Trace':
        kind = self.kind
        if kind is TraceKind.features:
            dims = {
                (len(e.src_features), len(e.dst_features))
                for e in self.events
            }
            if len(dims) > 1:
                raise ValueError(
                    f'трасса {self.trace_id}: признаки разной размерности'
                )
        return self

    @cached_property
    def kind(self) -> TraceKind:
        if all(e.edge_class is not None for e in self.events):
            return TraceKind.classified
        if all(e.has_features for e in self.events):
            return TraceKind.features
        if all(e.score is not None for e in self.events):
            return TraceKind.scored
        raise ValueError(
            f'трасса {self.trace_id}: события с классами, признаками и '
            f'оценками смешаны'
        )

    @property
    def classes(self) -> list[int]:
        """Классы ребер; только для трасс с известными классами."""
        if self.kind is not TraceKind.classified:
            raise ValueError(f'трасса {self.trace_id} не классифицирована')
        return [e.edge_class for e in self.events]

    @property
    def true_classes(self) -> list[Optional[int]]:
        return [e.true_class for e in self.events]

    @property
    def feature_dimension(self) -> Optional[tuple[int, int]]:
        if self.kind is not TraceKind.features:
            return None
        first = self.events[0]
        return len(first.src_features), len(first.dst_features)

    def __len__(self) -> int:
        return len(self.events)

    @classmethod
    def from_classes(
            cls,
            trace_id: str,
            classes: Sequence[int],
            label: Optional[Hypothesis] = None
    ) -> 'Trace':
        return cls(
            trace_id=trace_id,
            label=label,
            events=[TraceEvent(edge_class=int(z)) for z in classes],
        )
