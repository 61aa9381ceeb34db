"""Синтетические данные: сеть с предпочтительным присоединением и SI-модель.

Узлы сети бывают двух типов (gossiper и messenger); класс ребра задается
типами его концов. Информация распространяется по непрерывной SI-модели с
вероятностью ретвита, зависящей от метки и класса ребра. Кроме того,
есть прямой генератор марковских трасс для произвольной модели переходов.
"""

import enum
import heapq
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from quickstop.exceptions import SimulationError
from quickstop.fixtures import spread_probabilities
from quickstop.models import Hypothesis, Trace, TraceEvent, TransitionModel

logger = logging.getLogger(__name__)

EDGE_CLASS_COUNT = 4


class NodeKind(enum.Enum):
    """Тип пользователя.

    Атрибуты:
        messenger: Чаще распространяет новости.
        gossiper: Чаще распространяет дезинформацию.
    """
    messenger = 0
    gossiper = 1

    @property
    def one_hot(self) -> tuple[float, float]:
        return (1.0, 0.0) if self is NodeKind.messenger else (0.0, 1.0)


def edge_class(src: NodeKind, dst: NodeKind) -> int:
    """Класс ребра: 0=(m,m), 1=(g,m), 2=(m,g), 3=(g,g)."""
    return src.value + 2 * dst.value


def _default_spread_probs() -> tuple[tuple[float, ...], ...]:
    return tuple(map(tuple, spread_probabilities().tolist()))


class SyntheticConfig(BaseModel):
    """Параметры синтетического эксперимента.

    Атрибуты:
        node_count: Число узлов сети.
        edges_per_node: Число присоединений нового узла.
        same_type_prob: Вероятность выбрать узел своего типа.
        trace_count: Число трасс.
        prior_pi1: Вероятность дезинформации для трассы.
        spread_probs: Вероятности ретвита [метка][класс ребра].
        max_events: Предельная длина трассы.
        max_retries: Число попыток выбрать новый источник.
        with_features: Добавлять ли в события признаки типов (V, U).
        seed: Зерно генератора.
    """
    model_config = ConfigDict(frozen=True)

    node_count: int = Field(500, ge=2)
    edges_per_node: int = Field(3, ge=1)
    same_type_prob: float = Field(0.7, ge=0, le=1)
    trace_count: int = Field(500, ge=1)
    prior_pi1: float = Field(0.5, ge=0, le=1)
    spread_probs: tuple[tuple[float, ...], ...] = Field(
        default_factory=_default_spread_probs
    )
    max_events: int = Field(500, ge=2)
    max_retries: int = Field(20, ge=1)
    with_features: bool = False
    seed: int = 0

    @model_validator(mode='after')
    def check_config(self) -> 'SyntheticConfig':
        if self.node_count <= self.edges_per_node:
            raise ValueError('node_count должен превышать edges_per_node')
        probs = np.asarray(self.spread_probs, dtype=float)
        if probs.shape != (2, EDGE_CLASS_COUNT):
            raise ValueError(f'spread_probs должна иметь размер 2×'
                             f'{EDGE_CLASS_COUNT}')
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError('spread_probs вне [0, 1]')
        return self


@dataclass(frozen=True)
class SyntheticNetwork:
    """Ориентированная сеть подписок.

    Атрибуты:
        graph: nx.DiGraph; у узла атрибут kind, у ребра атрибут edge_class.
            Ребро u → v означает, что v видит и может ретвитнуть
            сообщения u. Каждое присоединение дает ребра в обе стороны.
        attachments: Узлы, к которым присоединился каждый новый узел.
    """
    graph: nx.DiGraph
    attachments: dict[int, tuple[int, ...]]

    def kind(self, node: int) -> NodeKind:
        return self.graph.nodes[node]['kind']

    def degree(self, node: int) -> int:
        return self.graph.out_degree(node)

    def same_type_fraction(self) -> float:
        """Доля присоединений к узлу своего типа."""
        pairs = [
            (node, target)
            for node, targets in self.attachments.items()
            for target in targets
        ]
        same = sum(self.kind(a) is self.kind(b) for a, b in pairs)
        return same / len(pairs)


def _choose_target(
        rng: np.random.Generator,
        candidates: list[int],
        degrees: np.ndarray
) -> int:
    weights = degrees[candidates].astype(float)
    total = weights.sum()
    if total == 0:
        return candidates[int(rng.integers(len(candidates)))]
    return candidates[int(rng.choice(len(candidates), p=weights / total))]


def generate_network(config: SyntheticConfig,
                     seed: Optional[int] = None) -> SyntheticNetwork:
    """Строит сеть с типизированным предпочтительным присоединением.

    Первые edges_per_node узлов образуют полный граф со случайными типами.
    Каждый следующий узел получает тип равновероятно и делает
    edges_per_node присоединений: для каждого выбирается тип цели (свой с
    вероятностью same_type_prob), затем узел этого типа с вероятностью,
    пропорциональной степени. Если подходящих узлов нужного типа нет,
    берется другой тип.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    m = config.edges_per_node
    draws = rng.integers(2, size=config.node_count)
    kinds = [NodeKind(int(k)) for k in draws]
    degrees = np.zeros(config.node_count, dtype=np.int64)
    graph = nx.DiGraph()
    for node in range(config.node_count):
        graph.add_node(node, kind=kinds[node])

    def connect(a: int, b: int) -> None:
        graph.add_edge(a, b, edge_class=edge_class(kinds[a], kinds[b]))
        graph.add_edge(b, a, edge_class=edge_class(kinds[b], kinds[a]))

    for a in range(m):
        for b in range(a + 1, m):
            connect(a, b)
            degrees[[a, b]] += 1

    members = {kind: [v for v in range(m) if kinds[v] is kind]
               for kind in NodeKind}
    attachments = {}
    for node in range(m, config.node_count):
        own = kinds[node]
        chosen: list[int] = []
        for _ in range(m):
            same = rng.random() < config.same_type_prob
            wanted = own if same else NodeKind(1 - own.value)
            pool = [v for v in members[wanted] if v not in chosen]
            if not pool:
                pool = [v for v in range(node) if v not in chosen]
            chosen.append(_choose_target(rng, pool, degrees))
        for target in chosen:
            connect(node, target)
        degrees[chosen] += 1
        degrees[node] += m
        attachments[node] = tuple(chosen)
        members[own].append(node)
    return SyntheticNetwork(graph=graph, attachments=attachments)


def _spread_once(
        network: SyntheticNetwork,
        probs: np.ndarray,
        source: int,
        max_events: int,
        rng: np.random.Generator
) -> list[tuple[float, int, int, int]]:
    # очередь: (время заражения, откуда, куда, класс ребра)
    infected = {source}
    queue: list[tuple[float, int, int, int]] = []

    def attempt(node: int, now: float) -> None:
        for follower, data in network.graph[node].items():
            if follower in infected:
                continue
            if rng.random() < probs[data['edge_class']]:
                delay = rng.exponential(1.0)
                heapq.heappush(
                    queue, (now + delay, node, follower, data['edge_class'])
                )

    attempt(source, 0.0)
    events = []
    while queue and len(events) < max_events:
        time, node, follower, z = heapq.heappop(queue)
        if follower in infected:
            continue
        infected.add(follower)
        events.append((time, node, follower, z))
        attempt(follower, time)
    return events


def spread(
        network: SyntheticNetwork,
        label: Hypothesis,
        config: SyntheticConfig,
        seed: int,
        trace_id: Optional[str] = None
) -> Trace:
    """Моделирует распространение одного сообщения по непрерывной SI-модели.

    Источник выбирается равновероятно. Каждый зараженный узел один раз
    пытается заразить каждого подписчика с вероятностью из spread_probs;
    успешное заражение происходит через экспоненциальную задержку с
    интенсивностью 1. События выдаются в порядке времени заражения.

    Исключения:
        SimulationError: Если за max_retries источников трасса так и не
            набрала двух событий.
    """
    rng = np.random.default_rng(seed)
    probs = np.asarray(config.spread_probs[label.label], dtype=float)
    nodes = network.graph.number_of_nodes()
    for retry in range(config.max_retries):
        source = int(rng.integers(nodes))
        events = _spread_once(network, probs, source, config.max_events, rng)
        if len(events) >= 2:
            break
        logger.debug('Короткая трасса из узла %d, новый источник', source)
    else:
        raise SimulationError(
            f'за {config.max_retries} попыток не получено трассы длиной '
            f'хотя бы 2 ({label.name})'
        )
    trace_events = []
    for time, node, follower, z in events:
        payload = {'edge_class': z, 'true_class': z, 'time': time}
        if config.with_features:
            payload['src_features'] = network.kind(node).one_hot
            payload['dst_features'] = network.kind(follower).one_hot
        trace_events.append(TraceEvent(**payload))
    return Trace(
        trace_id=trace_id or f'{label.name}-{seed}',
        label=label,
        events=trace_events,
    )


def generate_traces(config: SyntheticConfig,
                    network: Optional[SyntheticNetwork] = None
                    ) -> list[Trace]:
    """Строит сеть (если не передана) и trace_count трасс.

    Каждая трасса получает метку H1 с вероятностью prior_pi1; зерна
    трасс порождаются из общего зерна через SeedSequence.
    """
    network = network or generate_network(config)
    sequence = np.random.SeedSequence(config.seed)
    label_seed, *trace_seeds = sequence.spawn(config.trace_count + 1)
    labels = np.random.default_rng(label_seed).random(config.trace_count)
    traces = []
    for index, (draw, child) in enumerate(zip(labels, trace_seeds)):
        label = (Hypothesis.misinformation if draw < config.prior_pi1
                 else Hypothesis.news)
        seed = int(child.generate_state(1)[0])
        traces.append(spread(network, label, config, seed,
                             trace_id=f'synthetic-{index:05d}'))
    logger.info('Сгенерировано %d синтетических трасс', len(traces))
    return traces


def inject_noise(
        trace: Trace,
        misclass_prob: float,
        seed: int,
        class_count: int = EDGE_CLASS_COUNT
) -> Trace:
    """Искажает классы ребер.

    Каждый класс сохраняется с вероятностью 1 − misclass_prob, иначе
    заменяется равновероятно одним из остальных C − 1 классов. Истинный
    класс сохраняется в true_class.
    """
    if not 0.0 <= misclass_prob <= 1.0:
        raise ValueError('вероятность ошибки вне [0, 1]')
    rng = np.random.default_rng(seed)
    classes = np.asarray(trace.classes, dtype=int)
    flip = rng.random(classes.size) < misclass_prob
    shift = rng.integers(1, class_count, size=classes.size)
    noisy = np.where(flip, (classes + shift) % class_count, classes)
    events = [
        event.model_copy(update={
            'edge_class': int(z),
            'true_class': (event.true_class if event.true_class is not None
                           else event.edge_class),
        })
        for event, z in zip(trace.events, noisy)
    ]
    return Trace(trace_id=trace.trace_id, label=trace.label, events=events)


def sample_markov_trace(
        model: TransitionModel,
        label: Hypothesis,
        length: int,
        seed: int,
        trace_id: Optional[str] = None
) -> Trace:
    """Сэмплирует трассу из марковской модели гипотезы label.

    Первый класс равновероятен, следующие берутся из матрицы α_label.
    """
    if length < 2:
        raise ValueError('длина трассы должна быть не меньше 2')
    rng = np.random.default_rng(seed)
    cumulative = np.cumsum(model.alpha(label), axis=1)
    draws = rng.random(length)
    classes = [int(draws[0] * model.class_count)]
    for u in draws[1:]:
        row = cumulative[classes[-1]]
        classes.append(min(int(np.searchsorted(row, u, side='right')),
                           model.class_count - 1))
    return Trace.from_classes(trace_id or f'{label.name}-{seed}', classes,
                              label)


def sample_markov_mixture(
        model: TransitionModel,
        prior_pi1: float,
        count: int,
        length: int,
        seed: int
) -> list[Trace]:
    """Смесь марковских трасс: H1 с вероятностью prior_pi1."""
    sequence = np.random.SeedSequence(seed)
    label_seed, *trace_seeds = sequence.spawn(count + 1)
    labels = np.random.default_rng(label_seed).random(count)
    return [
        sample_markov_trace(
            model,
            (Hypothesis.misinformation if draw < prior_pi1
             else Hypothesis.news),
            length,
            int(child.generate_state(1)[0]),
            trace_id=f'markov-{index:05d}',
        )
        for index, (draw, child) in enumerate(zip(labels, trace_seeds))
    ]


def inject_noise_all(
        traces: Sequence[Trace],
        misclass_prob: float,
        seed: int,
        class_count: int = EDGE_CLASS_COUNT
) -> list[Trace]:
    """Искажает все трассы; зерна трасс порождаются из общего зерна.

    При одном и том же seed множество искаженных ребер растет вместе с
    misclass_prob.
    """
    children = np.random.SeedSequence(seed).spawn(len(traces))
    return [
        inject_noise(trace, misclass_prob, int(child.generate_state(1)[0]),
                     class_count)
        for trace, child in zip(traces, children)
    ]
