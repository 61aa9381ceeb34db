"""Решатель уравнения Беллмана и вычисление порогов остановки.

Итерация по ценности идет на равномерной сетке убеждений [0, 1]; значения
в точках вне сетки берутся линейной интерполяцией. Из решения для каждого
класса z извлекаются пороги π_l^(z) и π_u^(z).
"""

import logging
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from quickstop.exceptions import ConvergenceError, ThresholdOrderError
from quickstop.models import CostConfig, SolverConfig, TransitionModel

logger = logging.getLogger(__name__)

BRACKET_TOLERANCE = 1e-12


class ValueFunction(BaseModel):
    """Функция s^(z)(π) на сетке убеждений.

    Атрибуты:
        values: Строка на каждый класс z, столбец на каждую точку сетки.
    """
    model_config = ConfigDict(frozen=True)

    values: tuple[tuple[float, ...], ...]

    @cached_property
    def array(self) -> np.ndarray:
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        return values

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.array.shape[1])

    def at(self, z: int, pi: float) -> float:
        """Значение s^(z) в произвольной точке (линейная интерполяция)."""
        return float(np.interp(pi, self.grid, self.array[z]))

    @classmethod
    def from_array(cls, values: np.ndarray) -> 'ValueFunction':
        return cls(values=np.asarray(values, dtype=float).tolist())


class PolicyThresholds(BaseModel):
    """Пороги политики остановки.

    Атрибуты:
        pi_lower: π_l^(z) по классам: объявить новость при Π ≤ π_l.
        pi_upper: π_u^(z) по классам: объявить дезинформацию при Π ≥ π_u.
        value_function: Решение уравнения Беллмана.
        iterations: Число выполненных итераций.
        residual: Последняя величина изменения.
    """
    model_config = ConfigDict(frozen=True)

    pi_lower: tuple[float, ...]
    pi_upper: tuple[float, ...]
    value_function: Optional[ValueFunction] = None
    iterations: int = 0
    residual: float = 0.0

    @model_validator(mode='after')
    def check_lengths(self) -> 'PolicyThresholds':
        if len(self.pi_lower) != len(self.pi_upper):
            raise ValueError('число нижних и верхних порогов различается')
        return self

    def continuation_region(self, z: int) -> tuple[float, float]:
        return self.pi_lower[z], self.pi_upper[z]

    @classmethod
    def collapsed(cls, class_count: int, level: float) -> 'PolicyThresholds':
        """Политика немедленной остановки: π_l = π_u = level."""
        return cls(
            pi_lower=[level] * class_count,
            pi_upper=[level] * class_count,
        )


class Policy(BaseModel):
    """Все, что нужно детектору: модель, стоимости и пороги.

    Атрибуты:
        model: Модель переходов.
        costs: Стоимости и априорная вероятность.
        solver: Параметры решателя.
        thresholds: Пороги остановки.
    """
    model_config = ConfigDict(frozen=True)

    model: TransitionModel
    costs: CostConfig
    solver: SolverConfig = SolverConfig()
    thresholds: PolicyThresholds

    @model_validator(mode='after')
    def check_bracket(self) -> 'Policy':
        star = self.costs.decision_threshold
        if len(self.thresholds.pi_lower) != self.model.class_count:
            raise ValueError('число порогов не совпадает с числом классов')
        for z, (low, high) in enumerate(zip(self.thresholds.pi_lower,
                                            self.thresholds.pi_upper)):
            if not (0.0 <= low <= star + BRACKET_TOLERANCE
                    and star - BRACKET_TOLERANCE <= high <= 1.0):
                raise ValueError(
                    f'пороги класса {z} ({low}, {high}) не охватывают '
                    f'c_I/(c_I+c_II) = {star}'
                )
        return self


def stopping_costs(grid: np.ndarray, costs: CostConfig) -> np.ndarray:
    """g(π) = min(c_II·π, c_I·(1−π)) на сетке."""
    return np.minimum(costs.c_II * grid, costs.c_I * (1.0 - grid))


class _BackupOperator:
    """Оператор Беллмана с заранее вычисленными весами интерполяции.

    Обновленные убеждения π'_{z'} и вероятности наблюдений не зависят от
    s, поэтому индексы соседних узлов сетки считаются один раз.
    """

    def __init__(self, model: TransitionModel, costs: CostConfig,
                 grid: np.ndarray) -> None:
        size = grid.size
        a0 = model.matrices[0][:, :, None]
        a1 = model.matrices[1][:, :, None]
        pi = grid[None, None, :]
        weighted = pi * a1
        self.prob = weighted + (1.0 - pi) * a0
        with np.errstate(invalid='ignore', divide='ignore'):
            posterior = np.where(self.prob > 0, weighted / self.prob, 0.0)
        position = np.clip(posterior, 0.0, 1.0) * (size - 1)
        self.lower = np.minimum(np.floor(position).astype(int), size - 2)
        self.weight = position - self.lower
        self.next_class = np.broadcast_to(
            np.arange(model.class_count)[None, :, None], self.lower.shape
        )
        self.stop = stopping_costs(grid, costs)
        self.running_cost = costs.c * grid

    def __call__(self, values: np.ndarray) -> np.ndarray:
        left = values[self.next_class, self.lower]
        right = values[self.next_class, self.lower + 1]
        interpolated = left + self.weight * (right - left)
        expected = np.sum(interpolated * self.prob, axis=1)
        return np.minimum(self.stop, expected + self.running_cost)


def bellman_backup(
        s: ValueFunction,
        model: TransitionModel,
        costs: CostConfig,
        config: SolverConfig
) -> ValueFunction:
    """Один шаг итерации по ценности.

    s₁^(z)(π) = min{g(π), Σ_{z'} s^(z')(π'_{z'})·P(z'|π, z) + c·π}.

    Параметры:
        s: Текущая функция ценности на полной сетке.
        model: Модель переходов.
        costs: Стоимости.
        config: Параметры сетки.
    Возвращает:
        Обновленную функцию ценности.
    """
    grid = config.grid()
    if s.array.shape != (model.class_count, grid.size):
        raise ValueError('функция ценности задана не на полной сетке')
    operator = _BackupOperator(model, costs, grid)
    return ValueFunction.from_array(operator(s.array))


def extract_thresholds(
        values: np.ndarray,
        grid: np.ndarray,
        costs: CostConfig,
        tolerance: float
) -> tuple[list[float], list[float]]:
    """Находит пороги как крайние точки сетки, где s совпадает с g.

    π_l^(z): наибольшая точка π ≤ c_I/(c_I+c_II) с s^(z)(π) = c_II·π,
    π_u^(z): наименьшая точка π ≥ c_I/(c_I+c_II) с s^(z)(π) = c_I·(1−π);
    равенство проверяется с допуском tolerance.
    """
    star = costs.decision_threshold
    below = grid <= star + BRACKET_TOLERANCE
    above = grid >= star - BRACKET_TOLERANCE
    lower, upper = [], []
    for row in values:
        stop_news = np.abs(row - costs.c_II * grid) <= tolerance
        stop_mis = np.abs(row - costs.c_I * (1.0 - grid)) <= tolerance
        lower.append(min(float(grid[below & stop_news].max()), star))
        upper.append(max(float(grid[above & stop_mis].min()), star))
    return lower, upper


def solve(
        model: TransitionModel,
        costs: CostConfig,
        config: SolverConfig = SolverConfig()
) -> Policy:
    """Решает уравнение Беллмана и возвращает политику с порогами.

    Итерации начинаются с s₀ = g и продолжаются, пока
    max_z max_π |s₁ − s₀| > ε₀.

    Исключения:
        ConvergenceError: Если за max_iterations невязка не опустилась до
            допуска.
    """
    grid = config.grid()
    operator = _BackupOperator(model, costs, grid)
    values = np.tile(operator.stop, (model.class_count, 1))
    residual = float('inf')
    for iteration in range(1, config.max_iterations + 1):
        updated = operator(values)
        residual = float(np.max(np.abs(updated - values)))
        values = updated
        if residual <= config.tolerance:
            break
    else:
        raise ConvergenceError(residual, config.max_iterations)

    lower, upper = extract_thresholds(values, grid, costs, config.tolerance)
    logger.info(
        'Итерация по ценности сошлась за %d шагов (невязка %.2e)',
        iteration, residual,
    )
    thresholds = PolicyThresholds(
        pi_lower=lower,
        pi_upper=upper,
        value_function=ValueFunction.from_array(values),
        iterations=iteration,
        residual=residual,
    )
    return Policy(model=model, costs=costs, solver=config,
                  thresholds=thresholds)


class ThresholdRow(BaseModel):
    """Пороги при одном значении c."""
    model_config = ConfigDict(frozen=True)

    c: float
    pi_lower: tuple[float, ...]
    pi_upper: tuple[float, ...]


def threshold_monotonicity_sweep(
        model: TransitionModel,
        costs: CostConfig,
        c_values: Sequence[float],
        config: SolverConfig = SolverConfig()
) -> list[ThresholdRow]:
    """Решает задачу для ряда c и проверяет вложенность областей продолжения.

    С ростом c верхний порог не растет, а нижний не убывает (с точностью
    до шага сетки).

    Исключения:
        ThresholdOrderError: Если значения c не возрастают или пороги
            нарушают монотонность.
    """
    if len(c_values) < 2:
        raise ThresholdOrderError('нужно хотя бы два значения c')
    if any(b <= a for a, b in zip(c_values[:-1], c_values[1:])):
        raise ThresholdOrderError('значения c должны строго возрастать')
    rows = []
    for c in c_values:
        policy = solve(model, costs.model_copy(update={'c': c}), config)
        rows.append(ThresholdRow(
            c=c,
            pi_lower=policy.thresholds.pi_lower,
            pi_upper=policy.thresholds.pi_upper,
        ))
    slack = config.grid_step + BRACKET_TOLERANCE
    for prev, curr in zip(rows[:-1], rows[1:]):
        for z in range(model.class_count):
            if (curr.pi_upper[z] > prev.pi_upper[z] + slack
                    or curr.pi_lower[z] < prev.pi_lower[z] - slack):
                raise ThresholdOrderError(
                    f'класс {z}: область продолжения при c={curr.c} не '
                    f'вложена в область при c={prev.c}'
                )
    return rows
