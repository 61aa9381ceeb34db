"""Онлайн-детектор QuickStop.

Состояние детектора: убеждение, последний класс ребра, число наблюдений и
статус; каждое событие обрабатывается за O(1) по времени и памяти.
"""

import enum
import logging
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from quickstop.belief import posterior_step, terminal_decision
from quickstop.exceptions import DetectorError, UsageError
from quickstop.models import Hypothesis
from quickstop.solver import Policy

logger = logging.getLogger(__name__)

FINISHED_CAPACITY = 100_000


class DetectorStatus(enum.Enum):
    """Статус детектора.

    Атрибуты:
        running: Порог еще не пересечен.
        declared_news: Объявлена новость.
        declared_misinformation: Объявлена дезинформация.
    """
    running = 'running'
    declared_news = 'declared_news'
    declared_misinformation = 'declared_misinformation'


@dataclass(frozen=True, slots=True)
class DetectorState:
    """Полное онлайн-состояние одной трассы.

    Атрибуты:
        policy: Общая (только для чтения) политика.
        belief: Текущее убеждение Π.
        last_class: Класс последнего ребра.
        observations: Число обработанных ребер.
        status: Статус детектора.
    """
    policy: Policy = field(repr=False, compare=False)
    belief: float
    last_class: Optional[int] = None
    observations: int = 0
    status: DetectorStatus = DetectorStatus.running

    @property
    def finished(self) -> bool:
        return self.status is not DetectorStatus.running


@dataclass(frozen=True, slots=True)
class Verdict:
    """Решение детектора.

    Атрибуты:
        decision: Объявленная гипотеза δ_T.
        stopping_time: Число наблюдений T до решения.
        final_belief: Убеждение Π_T.
        final_class: Класс ребра в момент T.
        forced: Решение принято по концу трассы, а не по порогу.
    """
    decision: Hypothesis
    stopping_time: int
    final_belief: float
    final_class: Optional[int] = None
    forced: bool = False


@dataclass(frozen=True, slots=True)
class Undecided:
    """Трасса закончилась внутри области продолжения."""
    state: DetectorState

    def forced_verdict(self) -> Verdict:
        """Решение по правилу Π ≥ c_I/(c_I+c_II) в конце трассы."""
        return Verdict(
            decision=terminal_decision(self.state.belief,
                                       self.state.policy.costs),
            stopping_time=self.state.observations,
            final_belief=self.state.belief,
            final_class=self.state.last_class,
            forced=True,
        )


def new_detector(policy: Policy, prior: Optional[float] = None
                 ) -> DetectorState:
    """Создает детектор с убеждением, равным априорной вероятности H1.

    Параметры:
        policy (Policy): Решенная политика.
        prior (float, optional): Априорная вероятность; по умолчанию
            берется из стоимостей политики.
    Исключения:
        UsageError: Если prior вне (0, 1).
    """
    prior = policy.costs.prior_pi1 if prior is None else prior
    if not 0.0 < prior < 1.0:
        raise UsageError(f'априорная вероятность {prior} вне (0, 1)')
    return DetectorState(policy=policy, belief=prior)


def _status_for(belief: float, z: int, policy: Policy) -> DetectorStatus:
    # H1 проверяется первой: при π_l = π_u ничья решается в пользу H1
    if belief >= policy.thresholds.pi_upper[z]:
        return DetectorStatus.declared_misinformation
    if belief <= policy.thresholds.pi_lower[z]:
        return DetectorStatus.declared_news
    return DetectorStatus.running


def observe(state: DetectorState, z: int) -> DetectorState:
    """Обрабатывает одно ребро класса z.

    Первое ребро только запоминает класс (первый класс неинформативен) и
    сравнивает априорное убеждение с порогами; далее убеждение
    пересчитывается по переходу last_class → z.

    Исключения:
        DetectorError: Если решение уже принято.
    """
    if state.finished:
        raise DetectorError('детектор уже принял решение')
    policy = state.policy
    try:
        z = policy.model.check_class(z)
    except ValueError as exc:
        raise DetectorError(str(exc)) from exc
    belief = state.belief
    if state.last_class is not None:
        belief = posterior_step(belief, state.last_class, z, policy.model)
    return replace(
        state,
        belief=belief,
        last_class=z,
        observations=state.observations + 1,
        status=_status_for(belief, z, policy),
    )


def verdict_of(state: DetectorState) -> Optional[Verdict]:
    """Возвращает решение для завершенного состояния, иначе None."""
    if not state.finished:
        return None
    decision = (Hypothesis.misinformation
                if state.status is DetectorStatus.declared_misinformation
                else Hypothesis.news)
    return Verdict(
        decision=decision,
        stopping_time=state.observations,
        final_belief=state.belief,
        final_class=state.last_class,
    )


def run_trace(
        policy: Policy,
        classes: Iterable[int],
        prior: Optional[float] = None
) -> Union[Verdict, Undecided]:
    """Прогоняет детектор по последовательности классов до решения."""
    state = new_detector(policy, prior)
    for z in classes:
        state = observe(state, z)
        if state.finished:
            return verdict_of(state)
    return Undecided(state)


def decide(
        policy: Policy,
        classes: Iterable[int],
        prior: Optional[float] = None
) -> Verdict:
    """Как run_trace, но незавершенная трасса решается принудительно."""
    outcome = run_trace(policy, classes, prior)
    if isinstance(outcome, Undecided):
        return outcome.forced_verdict()
    return outcome


class StreamDetector:
    """Набор независимых детекторов по trace_id для потокового режима.

    Хранит состояние только для незавершенных трасс и последние
    finished_capacity идентификаторов, по которым решение уже выдано.
    Событие трассы, вытесненной из этого списка, открывает новый детектор.
    """

    def __init__(
            self,
            policy: Policy,
            prior: Optional[float] = None,
            finished_capacity: int = FINISHED_CAPACITY
    ) -> None:
        if finished_capacity < 1:
            raise UsageError('finished_capacity должна быть не меньше 1')
        self.policy = policy
        self.prior = policy.costs.prior_pi1 if prior is None else prior
        new_detector(policy, self.prior)
        self.finished_capacity = finished_capacity
        self._states: dict[str, DetectorState] = {}
        self._finished: OrderedDict[str, None] = OrderedDict()

    def _mark_finished(self, trace_id: str) -> None:
        self._finished[trace_id] = None
        self._finished.move_to_end(trace_id)
        while len(self._finished) > self.finished_capacity:
            self._finished.popitem(last=False)

    def feed(self, trace_id: str, z: int) -> Optional[Verdict]:
        """Передает событие трассы; возвращает решение, если оно принято.

        События уже решенных трасс отбрасываются с предупреждением.
        """
        if trace_id in self._finished:
            logger.warning(
                'Трасса %s уже решена, событие отброшено', trace_id
            )
            return None
        state = self._states.get(trace_id)
        if state is None:
            state = new_detector(self.policy, self.prior)
        state = observe(state, z)
        if state.finished:
            self._states.pop(trace_id, None)
            self._mark_finished(trace_id)
            return verdict_of(state)
        self._states[trace_id] = state
        return None

    def flush(self) -> list[tuple[str, Verdict]]:
        """Принудительные решения для всех незавершенных трасс."""
        pending = [
            (trace_id, Undecided(state).forced_verdict())
            for trace_id, state in self._states.items()
        ]
        for trace_id, _ in pending:
            self._mark_finished(trace_id)
        self._states.clear()
        return pending
