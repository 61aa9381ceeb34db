"""Байесовский пересчет убеждения Π_k = Pr(H1 | Z_1..Z_k).

Рекуррентная и пакетная формы, логарифм отношения правдоподобия и
правило терминального решения.
"""

import math
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from quickstop.exceptions import ImpossibleObservationError
from quickstop.models import CostConfig, Hypothesis, TransitionModel


def posterior_step(
        pi: float,
        z_prev: int,
        z_next: int,
        model: TransitionModel
) -> float:
    """Обновляет убеждение после перехода z_prev → z_next.

    Параметры:
        pi (float): Текущее убеждение Π_k.
        z_prev (int): Класс предыдущего ребра.
        z_next (int): Класс нового ребра.
        model (TransitionModel): Модель переходов.
    Возвращает:
        Π_{k+1} = Π·α₁ / ((1−Π)·α₀ + Π·α₁).
    Исключения:
        ImpossibleObservationError: Если переход невозможен при обеих
            гипотезах.
        ValueError: Если класс вне [0, C−1].
    """
    z_prev, z_next = model.check_class(z_prev), model.check_class(z_next)
    a0 = model.alpha0[z_prev][z_next]
    a1 = model.alpha1[z_prev][z_next]
    numerator = pi * a1
    denominator = (1.0 - pi) * a0 + numerator
    if denominator == 0.0:
        raise ImpossibleObservationError(
            f'переход {z_prev}→{z_next} невозможен при убеждении {pi}'
        )
    return min(1.0, numerator / denominator)


def log_likelihood_ratio(
        classes: Sequence[int],
        model: TransitionModel
) -> float:
    """Возвращает Σ log α₁(Z_{i+1}|Z_i) − Σ log α₀(Z_{i+1}|Z_i).

    Если на пути есть переход, невозможный только при H0, результат равен
    +inf; невозможный только при H1 дает −inf.

    Исключения:
        ImpossibleObservationError: Если путь невозможен при обеих
            гипотезах.
        ValueError: Если класс вне [0, C−1].
    """
    if len(classes) < 1:
        raise ValueError('нужен хотя бы один класс')
    path = np.asarray(classes, dtype=int)
    if path.min() < 0 or path.max() >= model.class_count:
        raise ValueError(
            f'класс вне диапазона [0, {model.class_count - 1}]'
        )
    if path.size == 1:
        return 0.0
    a0 = model.matrices[0][path[:-1], path[1:]]
    a1 = model.matrices[1][path[:-1], path[1:]]
    with np.errstate(divide='ignore'):
        log0 = float(np.sum(np.log(a0)))
        log1 = float(np.sum(np.log(a1)))
    if math.isinf(log0) and math.isinf(log1):
        raise ImpossibleObservationError(
            'последовательность классов невозможна при обеих гипотезах'
        )
    return log1 - log0


def posterior_batch(
        prior_pi1: float,
        classes: Sequence[int],
        model: TransitionModel
) -> float:
    """Вычисляет Π_k по всей последовательности классов сразу.

    Первый класс неинформативен, поэтому для одного наблюдения
    возвращается априорная вероятность. Считается через логарифм
    отношения правдоподобия, чтобы длинные трассы не давали underflow.
    """
    llr = log_likelihood_ratio(classes, model)
    if llr == math.inf:
        return 1.0
    if llr == -math.inf:
        return 0.0
    return float(expit(logit(prior_pi1) + llr))


def belief_path(
        prior_pi1: float,
        classes: Sequence[int],
        model: TransitionModel
) -> list[float]:
    """Возвращает убеждения Π_1..Π_k после каждого наблюдения."""
    beliefs = [prior_pi1] if classes else []
    for z_prev, z_next in zip(classes[:-1], classes[1:]):
        beliefs.append(posterior_step(beliefs[-1], z_prev, z_next, model))
    return beliefs


def stopping_cost(pi: float, costs: CostConfig) -> float:
    """g(π) = min(c_II·π, c_I·(1−π))."""
    return min(costs.c_II * pi, costs.c_I * (1.0 - pi))


def terminal_decision(pi: float, costs: CostConfig) -> Hypothesis:
    """Оптимальное решение при остановке: H1, если c_I(1−Π) ≤ c_II·Π."""
    if costs.c_I * (1.0 - pi) <= costs.c_II * pi:
        return Hypothesis.misinformation
    return Hypothesis.news
