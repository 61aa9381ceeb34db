"""Обучающая часть QuickStop: оценка ребер, квантование и переходы.

Линейный оценщик с логистической связью обучается на усредненных по трассе
признаках ребер, его оценки квантуются в классы, а по размеченным
последовательностям классов оцениваются матрицы переходов α₀ и α₁.
"""

import enum
import logging
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import expit, logit
from scipy.stats import entropy

from quickstop.exceptions import TrainingError
from quickstop.models import (DEFAULT_CLASS_COUNT, Hypothesis, Trace,
                              TraceEvent, TraceKind, TransitionModel)

logger = logging.getLogger(__name__)

DEFAULT_BOUNDARIES = (0.25, 0.5, 0.75)
MAX_CALIBRATION_LEVELS = 64


class ScorerKind(enum.Enum):
    """Вид оценщика ребер.

    Атрибуты:
        linear: Линейная модель с логистической связью.
        precomputed: Оценки уже записаны в событиях трассы.
    """
    linear = 'linear'
    precomputed = 'precomputed'


class EdgeScorer(BaseModel):
    """Оценщик ребра (V, U) → [0, 1].

    Атрибуты:
        kind: Вид оценщика.
        weights: Веса при склеенном векторе (V, U).
        bias: Свободный член.
    """
    model_config = ConfigDict(frozen=True)

    kind: ScorerKind = ScorerKind.linear
    weights: tuple[float, ...] = ()
    bias: float = 0.0

    @model_validator(mode='after')
    def check_weights(self) -> 'EdgeScorer':
        if self.kind is ScorerKind.linear and not self.weights:
            raise ValueError('линейному оценщику нужны веса')
        return self

    @classmethod
    def precomputed(cls) -> 'EdgeScorer':
        return cls(kind=ScorerKind.precomputed)

    def calibrated(self, scale: float, offset: float) -> 'EdgeScorer':
        """Оценщик с логитом k·(w·x + b − m)."""
        return EdgeScorer(
            weights=[scale * w for w in self.weights],
            bias=scale * (self.bias - offset),
        )

    def score(self, src_features, dst_features) -> float:
        """Оценивает одно ребро.

        Исключения:
            ValueError: Если оценщик не принимает признаки или размерность
                не совпадает.
        """
        if self.kind is ScorerKind.precomputed:
            raise ValueError('оценщик precomputed не принимает признаки')
        x = np.concatenate([
            np.asarray(src_features, dtype=float),
            np.asarray(dst_features, dtype=float),
        ])
        if x.shape[0] != len(self.weights):
            raise ValueError(
                f'размерность признаков {x.shape[0]} не совпадает с '
                f'размерностью оценщика {len(self.weights)}'
            )
        return float(expit(np.dot(self.weights, x) + self.bias))

    def score_event(self, event: TraceEvent) -> float:
        if self.kind is ScorerKind.precomputed:
            if event.score is None:
                raise ValueError('в событии нет готовой оценки')
            return event.score
        if not event.has_features:
            raise ValueError('в событии нет признаков')
        return self.score(event.src_features, event.dst_features)


class Quantizer(BaseModel):
    """Разбиение [0, 1] на C классов.

    Граница принадлежит нижнему классу: [0, b₁] → 0, (b₁, b₂] → 1, ...

    Атрибуты:
        boundaries: Строго возрастающие границы внутри (0, 1).
    """
    model_config = ConfigDict(frozen=True)

    boundaries: tuple[float, ...] = DEFAULT_BOUNDARIES

    @model_validator(mode='after')
    def check_boundaries(self) -> 'Quantizer':
        b = np.asarray(self.boundaries, dtype=float)
        if b.size == 0:
            raise ValueError('нужна хотя бы одна граница')
        if np.any(b <= 0) or np.any(b >= 1):
            raise ValueError('границы должны лежать в (0, 1)')
        if np.any(np.diff(b) <= 0):
            raise ValueError('границы должны строго возрастать')
        return self

    @property
    def class_count(self) -> int:
        return len(self.boundaries) + 1

    @classmethod
    def uniform(cls, class_count: int) -> 'Quantizer':
        """Равные интервалы; для C = 4 совпадает с границами по умолчанию."""
        if class_count < 2:
            raise ValueError('нужно хотя бы два класса')
        return cls(boundaries=[k / class_count
                               for k in range(1, class_count)])

    def quantize(self, score: float) -> int:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f'оценка {score} вне [0, 1]')
        return int(np.searchsorted(self.boundaries, score, side='left'))


class TrainingReport(BaseModel):
    """Итог оценки матриц переходов.

    Атрибуты:
        class_count: Число классов C.
        transition_counts: Счетчики переходов [label][z_prev][z_next].
        smoothing_alpha: Параметр сглаживания.
        trace_counts: Число трасс по меткам [news, misinformation].
        prior_pi1: Доля трасс с дезинформацией.
        undefined_rows: Классы без исходящих переходов (только без
            сглаживания) по меткам.
        model: Итоговая модель, если все строки определены.
    """
    model_config = ConfigDict(frozen=True)

    class_count: int
    transition_counts: tuple[tuple[tuple[int, ...], ...], ...]
    smoothing_alpha: float
    trace_counts: tuple[int, int]
    prior_pi1: float
    undefined_rows: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
    model: Optional[TransitionModel] = None

    def transition_probabilities(self) -> np.ndarray:
        """Оценки α_j формы (2, C, C); неопределенные строки равны NaN."""
        counts = (np.asarray(self.transition_counts, dtype=float)
                  + self.smoothing_alpha)
        totals = counts.sum(axis=2, keepdims=True)
        with np.errstate(invalid='ignore', divide='ignore'):
            return counts / totals

    def require_model(self) -> TransitionModel:
        """Возвращает модель или сообщает о непосещенных классах.

        Исключения:
            TrainingError: Если какая-то строка матрицы не определена.
        """
        if self.model is None:
            parts = [
                f'{hypothesis.name}: классы {list(rows)}'
                for hypothesis, rows in zip(Hypothesis, self.undefined_rows)
                if rows
            ]
            raise TrainingError(
                'нет переходов из непосещенных классов ('
                + '; '.join(parts)
                + '), задайте сглаживание больше 0'
            )
        return self.model


def _require_both_labels(traces: Sequence[Trace]) -> None:
    labels = {trace.label for trace in traces}
    if None in labels:
        raise TrainingError('все обучающие трассы должны быть размечены')
    if len(labels) < 2:
        raise TrainingError('нужны трассы обеих меток')


def average_edge_features(trace: Trace) -> np.ndarray:
    """Средний вектор (V, U) по ребрам трассы."""
    return np.mean([event.feature_vector for event in trace.events], axis=0)


def train_scorer(
        traces: Sequence[Trace],
        l2: float = 1e-3,
        learning_rate: float = 0.5,
        epochs: int = 3000
) -> EdgeScorer:
    """Обучает линейный оценщик на усредненных признаках трасс.

    Признаки стандартизуются, логистическая регрессия с L2 обучается
    градиентным спуском, после чего стандартизация переносится в веса.

    Параметры:
        traces: Размеченные трассы с признаками.
        l2: Коэффициент регуляризации.
        learning_rate: Шаг градиентного спуска.
        epochs: Число эпох.
    Возвращает:
        Оценщик, принимающий одно ребро.
    Исключения:
        TrainingError: Если меток меньше двух, у трасс нет признаков или
            размерности различаются.
    """
    _require_both_labels(traces)
    dims = set()
    for trace in traces:
        if trace.kind is not TraceKind.features:
            raise TrainingError(f'трасса {trace.trace_id} без признаков')
        dims.add(trace.feature_dimension)
    if len(dims) > 1:
        raise TrainingError(f'разная размерность признаков: {sorted(dims)}')

    x = np.array([average_edge_features(trace) for trace in traces])
    y = np.array([trace.label.label for trace in traces], dtype=float)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    z = (x - mean) / scale

    weights = np.zeros(z.shape[1])
    bias = 0.0
    for _ in range(epochs):
        prob = expit(z @ weights + bias)
        error = prob - y
        weights -= learning_rate * (z.T @ error / len(y) + l2 * weights)
        bias -= learning_rate * error.mean()

    raw_weights = weights / scale
    raw_bias = bias - float(np.dot(raw_weights, mean))
    logger.info('Оценщик обучен на %d трассах', len(traces))
    return EdgeScorer(weights=raw_weights.tolist(), bias=raw_bias)


def _search_levels(logits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Различные значения логита с весами; длинные выборки сжимаются."""
    levels, counts = np.unique(logits, return_counts=True)
    if levels.size <= MAX_CALIBRATION_LEVELS:
        return levels, counts.astype(float)
    quantiles = ((np.arange(MAX_CALIBRATION_LEVELS) + 0.5)
                 / MAX_CALIBRATION_LEVELS)
    return (np.quantile(logits, quantiles),
            np.ones(MAX_CALIBRATION_LEVELS))


def _scale_candidates(shifted: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    # масштабы, при которых точка пересекает границу; берутся середины
    with np.errstate(divide='ignore', invalid='ignore'):
        critical = np.divide.outer(cuts, shifted).ravel()
    critical = np.unique(critical[np.isfinite(critical) & (critical > 0)])
    if critical.size == 0:
        return np.ones(1)
    inner = np.sqrt(critical[:-1] * critical[1:])
    return np.concatenate([[critical[0] / 2], inner, [critical[-1] * 2]])


def calibrate_scorer(
        scorer: EdgeScorer,
        traces: Sequence[Trace],
        quantizer: Quantizer
) -> EdgeScorer:
    """Подбирает масштаб k и сдвиг m логита: score = σ(k·(w·x + b − m)).

    На ребрах обучающих трасс выбираются k > 0 и m, при которых гистограмма
    классов имеет наибольшую энтропию, то есть интервалы квантования
    заняты как можно равномернее. Порядок ребер по оценке сохраняется;
    упорядоченные типы ребер попадают в разные интервалы.
    """
    if scorer.kind is not ScorerKind.linear:
        return scorer
    features = np.array([
        event.feature_vector for trace in traces for event in trace.events
    ])
    logits = features @ np.asarray(scorer.weights) + scorer.bias
    levels, weights = _search_levels(logits)
    if levels.size < 2:
        logger.info('Калибровка пропущена: все ребра имеют одну оценку')
        return scorer
    cuts = logit(np.asarray(quantizer.boundaries, dtype=float))
    class_count = quantizer.class_count
    best = (-1.0, 1.0, 0.0)
    for offset in (levels[:-1] + levels[1:]) / 2:
        shifted = levels - offset
        scales = _scale_candidates(shifted, cuts)
        bins = np.searchsorted(cuts, np.outer(scales, shifted), side='left')
        rows = bins + class_count * np.arange(scales.size)[:, None]
        counts = np.bincount(
            rows.ravel(), weights=np.tile(weights, scales.size),
            minlength=class_count * scales.size,
        ).reshape(scales.size, class_count)
        spread = entropy(counts, axis=1)
        index = int(np.argmax(spread))
        if spread[index] > best[0]:
            best = (float(spread[index]), float(scales[index]),
                    float(offset))
    _, scale, offset = best
    logger.info('Калибровка оценщика: k=%.4g, m=%.4g, энтропия %.4f',
                scale, offset, best[0])
    return scorer.calibrated(scale, offset)


def classify_edge(
        scorer: EdgeScorer,
        quantizer: Quantizer,
        src_features,
        dst_features
) -> int:
    """Возвращает класс ребра как номер интервала его оценки."""
    return quantizer.quantize(scorer.score(src_features, dst_features))


def classify_trace(
        trace: Trace,
        scorer: Optional[EdgeScorer],
        quantizer: Quantizer
) -> list[int]:
    """Переводит события трассы в классы ребер.

    Трассы с готовыми классами возвращаются как есть; для остальных
    нужен оценщик.
    """
    if trace.kind is TraceKind.classified:
        return trace.classes
    if scorer is None:
        if trace.kind is not TraceKind.scored:
            raise TrainingError(
                f'трасса {trace.trace_id}: нужен обученный оценщик'
            )
        scorer = EdgeScorer.precomputed()
    try:
        return [
            quantizer.quantize(scorer.score_event(event))
            for event in trace.events
        ]
    except ValueError as exc:
        raise TrainingError(f'трасса {trace.trace_id}: {exc}') from exc


def estimate_transitions(
        classified_traces: Iterable[tuple[Hypothesis, Sequence[int]]],
        class_count: int = DEFAULT_CLASS_COUNT,
        smoothing_alpha: float = 1.0
) -> TrainingReport:
    """Оценивает матрицы переходов по размеченным последовательностям.

    α_j(z₁|z₂) = (N_j(z₂→z₁) + a) / (N_j(z₂) + C·a), где N_j(z₂) есть число
    переходов из z₂ в трассах с меткой j.

    Параметры:
        classified_traces: Пары (метка, классы ребер).
        class_count: Число классов C.
        smoothing_alpha: Параметр сглаживания a ≥ 0.
    Возвращает:
        Отчет со счетчиками и моделью (если все строки определены).
    Исключения:
        TrainingError: Если у какой-то метки нет трасс или переходов,
            либо класс вне диапазона.
    """
    if smoothing_alpha < 0:
        raise TrainingError('сглаживание должно быть неотрицательным')
    counts = np.zeros((2, class_count, class_count), dtype=np.int64)
    trace_counts = [0, 0]
    for label, classes in classified_traces:
        path = np.asarray(classes, dtype=int)
        if path.size and (path.min() < 0 or path.max() >= class_count):
            raise TrainingError(
                f'класс вне диапазона [0, {class_count - 1}]'
            )
        trace_counts[label.label] += 1
        np.add.at(counts[label.label], (path[:-1], path[1:]), 1)

    for hypothesis in Hypothesis:
        if trace_counts[hypothesis.label] == 0:
            raise TrainingError(f'нет трасс с меткой {hypothesis.name}')
        if counts[hypothesis.label].sum() == 0:
            raise TrainingError(f'нет переходов в трассах {hypothesis.name}')

    smoothed = counts + smoothing_alpha
    row_totals = smoothed.sum(axis=2, keepdims=True)
    undefined = tuple(
        tuple(int(z) for z in np.flatnonzero(row_totals[j, :, 0] == 0))
        for j in range(2)
    )
    model = None
    if not any(undefined):
        matrices = smoothed / row_totals
        model = TransitionModel.from_arrays(matrices[0], matrices[1])
    else:
        logger.warning('Строки без переходов: %s', undefined)

    total = sum(trace_counts)
    return TrainingReport(
        class_count=class_count,
        transition_counts=counts.tolist(),
        smoothing_alpha=smoothing_alpha,
        trace_counts=tuple(trace_counts),
        prior_pi1=trace_counts[1] / total,
        undefined_rows=undefined,
        model=model,
    )


def estimate_prior(traces: Sequence[Trace]) -> float:
    """Доля размеченных трасс с дезинформацией."""
    labels = [trace.label for trace in traces if trace.label is not None]
    if not labels:
        raise TrainingError('нет размеченных трасс')
    return sum(label.label for label in labels) / len(labels)


def split_traces(
        traces: Sequence[Trace],
        test_fraction: float = 0.2,
        seed: int = 0
) -> tuple[list[Trace], list[Trace]]:
    """Случайно делит трассы на обучающие и тестовые (по умолчанию 80/20)."""
    if not 0.0 < test_fraction < 1.0:
        raise TrainingError('доля теста должна лежать в (0, 1)')
    order = np.random.default_rng(seed).permutation(len(traces))
    test_size = int(round(test_fraction * len(traces)))
    test_idx = set(order[:test_size].tolist())
    train = [t for i, t in enumerate(traces) if i not in test_idx]
    test = [t for i, t in enumerate(traces) if i in test_idx]
    return train, test


class TrainingResult(BaseModel):
    """Результат обучающего конвейера.

    Атрибуты:
        scorer: Обученный оценщик (None для трасс с готовыми классами).
        quantizer: Использованное квантование.
        report: Отчет об оценке переходов.
    """
    model_config = ConfigDict(frozen=True)

    scorer: Optional[EdgeScorer] = None
    quantizer: Quantizer = Field(default_factory=Quantizer)
    report: TrainingReport


def fit_training_pipeline(
        traces: Sequence[Trace],
        quantizer: Optional[Quantizer] = None,
        smoothing_alpha: float = 1.0,
        class_count: Optional[int] = None,
        calibrate: bool = True
) -> TrainingResult:
    """Полный обучающий конвейер: оценщик, классы ребер, переходы.

    Линейный оценщик по умолчанию калибруется под квантование
    (calibrate_scorer).
    """
    _require_both_labels(traces)
    quantizer = quantizer or Quantizer()
    class_count = class_count or quantizer.class_count
    kinds = {trace.kind for trace in traces}
    scorer = None
    if TraceKind.features in kinds:
        featured = [t for t in traces if t.kind is TraceKind.features]
        scorer = train_scorer(featured)
        if calibrate:
            scorer = calibrate_scorer(scorer, featured, quantizer)
    elif kinds == {TraceKind.scored}:
        scorer = EdgeScorer.precomputed()
    if scorer is not None and class_count != quantizer.class_count:
        raise TrainingError(
            f'число классов {class_count} не совпадает с квантованием '
            f'({quantizer.class_count})'
        )
    classified = [
        (trace.label, classify_trace(trace, scorer, quantizer))
        for trace in traces
    ]
    report = estimate_transitions(classified, class_count, smoothing_alpha)
    return TrainingResult(scorer=scorer, quantizer=quantizer, report=report)
