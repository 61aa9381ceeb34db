"""Оценка качества QuickStop.

Метрики по набору трасс, реализованная стоимость, перебор всех историй
конечной длины (оракул оптимальности) и прогоны по сеткам параметров.
"""

import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from quickstop.detector import decide
from quickstop.exceptions import DataError, HorizonTooLargeError
from quickstop.models import (CostConfig, Hypothesis, SolverConfig, Trace,
                              TransitionModel)
from quickstop.simulator import (SyntheticConfig, generate_traces,
                                 inject_noise_all)
from quickstop.solver import Policy, PolicyThresholds, solve
from quickstop.training import estimate_transitions, split_traces

logger = logging.getLogger(__name__)

MAX_HISTORIES = 10 ** 7
METRIC_COLUMNS = (
    'accuracy',
    'false_positive_rate',
    'false_negative_rate',
    'mean_detection_time_news',
    'mean_detection_time_misinformation',
    'mean_detection_time',
    'forced_decision_fraction',
    'mean_realized_cost',
    'trace_count',
    'news_count',
    'misinformation_count',
    'correct_count',
    'forced_count',
)


class MetricsReport(BaseModel):
    """Метрики детектора на размеченных трассах.

    Атрибуты:
        accuracy: Доля правильно распознанных трасс.
        false_positive_rate: Доля новостей, объявленных дезинформацией.
        false_negative_rate: Доля дезинформации, объявленной новостями.
        mean_detection_time_news: Среднее T по трассам, объявленным
            новостями.
        mean_detection_time_misinformation: Среднее T по трассам,
            объявленным дезинформацией.
        mean_detection_time: Среднее T по всем трассам.
        forced_decision_fraction: Доля решений по концу трассы.
        mean_realized_cost: Средняя стоимость
            c_I·1{FP} + c_II·1{FN} + c·T·1{H1}.
        trace_count, news_count, misinformation_count, correct_count,
        forced_count: Счетчики.
    """
    model_config = ConfigDict(frozen=True)

    accuracy: float
    false_positive_rate: float
    false_negative_rate: float
    mean_detection_time_news: Optional[float]
    mean_detection_time_misinformation: Optional[float]
    mean_detection_time: float
    forced_decision_fraction: float
    mean_realized_cost: float
    trace_count: int
    news_count: int
    misinformation_count: int
    correct_count: int
    forced_count: int

    def row(self) -> dict:
        return {column: getattr(self, column) for column in METRIC_COLUMNS}


def _mean_or_none(values: list) -> Optional[float]:
    return float(np.mean(values)) if values else None


def evaluate(
        policy: Policy,
        traces: Sequence[Trace],
        prior: Optional[float] = None
) -> MetricsReport:
    """Прогоняет детектор по каждой трассе и собирает метрики.

    Трассы, закончившиеся внутри области продолжения, решаются
    принудительно по правилу Π ≥ c_I/(c_I+c_II) и учитываются отдельно.

    Исключения:
        DataError: Если трасс нет или у трассы нет метки.
    """
    if not traces:
        raise DataError('нет трасс для оценки')
    costs = policy.costs
    times = {Hypothesis.news: [], Hypothesis.misinformation: []}
    all_times, realized = [], []
    errors = {Hypothesis.news: 0, Hypothesis.misinformation: 0}
    totals = {Hypothesis.news: 0, Hypothesis.misinformation: 0}
    forced = 0
    for trace in traces:
        if trace.label is None:
            raise DataError(f'трасса {trace.trace_id} без метки')
        verdict = decide(policy, trace.classes, prior)
        totals[trace.label] += 1
        times[verdict.decision].append(verdict.stopping_time)
        all_times.append(verdict.stopping_time)
        forced += verdict.forced
        cost = 0.0
        if verdict.decision is not trace.label:
            errors[trace.label] += 1
            cost += (costs.c_I if trace.label is Hypothesis.news
                     else costs.c_II)
        if trace.label is Hypothesis.misinformation:
            cost += costs.c * verdict.stopping_time
        realized.append(cost)

    count = len(traces)
    news, mis = totals[Hypothesis.news], totals[Hypothesis.misinformation]
    correct = count - errors[Hypothesis.news] - errors[
        Hypothesis.misinformation]
    return MetricsReport(
        accuracy=correct / count,
        false_positive_rate=errors[Hypothesis.news] / news if news else 0.0,
        false_negative_rate=(errors[Hypothesis.misinformation] / mis
                             if mis else 0.0),
        mean_detection_time_news=_mean_or_none(times[Hypothesis.news]),
        mean_detection_time_misinformation=_mean_or_none(
            times[Hypothesis.misinformation]),
        mean_detection_time=float(np.mean(all_times)),
        forced_decision_fraction=forced / count,
        mean_realized_cost=float(np.mean(realized)),
        trace_count=count,
        news_count=news,
        misinformation_count=mis,
        correct_count=correct,
        forced_count=forced,
    )


class OracleResult(BaseModel):
    """Сравнение пороговой политики с точным оптимумом на горизонте L.

    Атрибуты:
        horizon: Предельное число наблюдений L.
        optimal_cost: Минимум ожидаемой стоимости по всем правилам
            остановки с принудительной остановкой в L.
        policy_cost: Ожидаемая стоимость пороговой политики (тоже с
            остановкой в L).
        gap: policy_cost − optimal_cost.
        continuation_probability: Вероятность дойти до L, не пересекая
            пороги.
        truncation_slack: continuation_probability · max(c_I, c_II).
    """
    model_config = ConfigDict(frozen=True)

    horizon: int
    optimal_cost: float
    policy_cost: float
    gap: float
    continuation_probability: float
    truncation_slack: float


def brute_force_optimal(
        model: TransitionModel,
        costs: CostConfig,
        horizon: int,
        thresholds: Optional[PolicyThresholds] = None,
        prior: Optional[float] = None
) -> OracleResult:
    """Точная обратная индукция по всем историям длины ≤ L.

    Стоимость остановки после k наблюдений равна
    min{c_II·Π_k, c_I·(1−Π_k)} + c·k·Π_k, в момент L остановка
    обязательна. На том же дереве точно оценивается пороговая политика.

    Параметры:
        model: Модель переходов.
        costs: Стоимости.
        horizon: Горизонт L ≥ 1.
        thresholds: Пороги; по умолчанию решаются заново.
        prior: Априорная вероятность H1 (по умолчанию costs.prior_pi1).
    Исключения:
        HorizonTooLargeError: Если C^L больше 10^7.
    """
    if horizon < 1:
        raise HorizonTooLargeError('горизонт должен быть не меньше 1')
    size = model.class_count
    if size ** horizon > MAX_HISTORIES:
        raise HorizonTooLargeError(
            f'C^L = {size}^{horizon} больше {MAX_HISTORIES}'
        )
    if thresholds is None:
        thresholds = solve(model, costs).thresholds
    prior = costs.prior_pi1 if prior is None else prior
    lower = np.asarray(thresholds.pi_lower)
    upper = np.asarray(thresholds.pi_upper)
    a0, a1 = model.matrices

    # слой k: убеждения, последние классы и вероятности узлов дерева
    beliefs = [np.full(size, prior)]
    classes = [np.arange(size)]
    reach = [np.full(size, 1.0 / size)]
    for _ in range(1, horizon):
        pi = beliefs[-1][:, None]
        z = classes[-1]
        weighted = pi * a1[z]
        prob = weighted + (1.0 - pi) * a0[z]
        with np.errstate(invalid='ignore', divide='ignore'):
            posterior = np.where(prob > 0, weighted / prob, pi)
        beliefs.append(posterior.ravel())
        classes.append(np.tile(np.arange(size), z.size))
        reach.append((reach[-1][:, None] * prob).ravel())

    def stop_cost(k: int) -> np.ndarray:
        pi = beliefs[k - 1]
        return (np.minimum(costs.c_II * pi, costs.c_I * (1.0 - pi))
                + costs.c * k * pi)

    optimal = stop_cost(horizon)
    following = stop_cost(horizon)
    for k in range(horizon - 1, 0, -1):
        z = classes[k - 1]
        pi = beliefs[k - 1][:, None]
        prob = pi * a1[z] + (1.0 - pi) * a0[z]
        cont_opt = np.sum(prob * optimal.reshape(-1, size), axis=1)
        cont_pol = np.sum(prob * following.reshape(-1, size), axis=1)
        stop = stop_cost(k)
        optimal = np.minimum(stop, cont_opt)
        halt = (beliefs[k - 1] >= upper[z]) | (beliefs[k - 1] <= lower[z])
        following = np.where(halt, stop, cont_pol)

    running = np.ones(size, dtype=bool)
    for k in range(1, horizon):
        pi, z = beliefs[k - 1], classes[k - 1]
        running &= (pi < upper[z]) & (pi > lower[z])
        running = np.repeat(running, size)
    pi, z = beliefs[-1], classes[-1]
    running &= (pi < upper[z]) & (pi > lower[z])
    continuation = float(np.sum(reach[-1][running]))

    optimal_cost = float(np.sum(optimal) / size)
    policy_cost = float(np.sum(following) / size)
    return OracleResult(
        horizon=horizon,
        optimal_cost=optimal_cost,
        policy_cost=policy_cost,
        gap=policy_cost - optimal_cost,
        continuation_probability=continuation,
        truncation_slack=continuation * max(costs.c_I, costs.c_II),
    )


def cost_sweep(
        model: TransitionModel,
        costs_base: CostConfig,
        c_values: Sequence[float],
        traces: Sequence[Trace],
        config: SolverConfig = SolverConfig()
) -> pd.DataFrame:
    """Метрики детектора для каждого значения c.

    Возвращает:
        Таблицу со столбцом c и столбцами METRIC_COLUMNS.
    """
    rows = []
    for c in c_values:
        policy = solve(model, costs_base.model_copy(update={'c': c}), config)
        report = evaluate(policy, traces)
        rows.append({'c': c, **report.row()})
        logger.info('c=%.3f: точность %.3f', c, report.accuracy)
    return pd.DataFrame(rows, columns=['c', *METRIC_COLUMNS])


def noise_sweep(
        synthetic: SyntheticConfig,
        misclass_probs: Sequence[float],
        costs: CostConfig,
        config: SolverConfig = SolverConfig(),
        smoothing_alpha: float = 1.0,
        test_fraction: float = 0.2
) -> pd.DataFrame:
    """Устойчивость к ошибкам классификации ребер.

    Для каждой вероятности ошибки классы всех трасс искажаются, на
    обучающей части заново оцениваются переходы и решается политика, на
    тестовой части считаются метрики. Трассы и разбиение общие для всех
    уровней шума.
    """
    clean = generate_traces(synthetic)
    rows = []
    for prob in misclass_probs:
        noisy = inject_noise_all(clean, prob, synthetic.seed)
        train, test = split_traces(noisy, test_fraction, synthetic.seed)
        report = estimate_transitions(
            [(trace.label, trace.classes) for trace in train],
            smoothing_alpha=smoothing_alpha,
        )
        policy = solve(report.require_model(), costs, config)
        metrics = evaluate(policy, test)
        rows.append({'misclassification_probability': prob, **metrics.row()})
        logger.info('шум %.2f: точность %.3f', prob, metrics.accuracy)
    return pd.DataFrame(
        rows, columns=['misclassification_probability', *METRIC_COLUMNS]
    )
