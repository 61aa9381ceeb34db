"""Схемы Pydantic для файлов QuickStop.

Определяют артефакт модели и политики, манифест симуляции, событие
потокового детектора и строку с решением.
"""

from datetime import datetime
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from quickstop.detector import Verdict
from quickstop.models import (CostConfig, SolverConfig, TraceEvent,
                              TransitionModel)
from quickstop.simulator import SyntheticConfig
from quickstop.solver import Policy, PolicyThresholds
from quickstop.training import EdgeScorer, Quantizer

ARTIFACT_FORMAT_VERSION = 1


class Provenance(BaseModel):
    """Происхождение артефакта.

    Атрибуты:
        seed: Зерно, с которым получен артефакт.
        data_hash: SHA-256 входного файла.
        created_at: Время создания (UTC), если задано SOURCE_DATE_EPOCH.
        source: Путь к входным данным или родительскому артефакту.
    """
    model_config = ConfigDict(frozen=True)

    seed: Optional[int] = None
    data_hash: Optional[str] = None
    created_at: Optional[datetime] = None
    source: Optional[str] = None


class ModelArtifact(BaseModel):
    """Схема артефакта модели (после train) и политики (после solve).

    Атрибуты:
        format_version: Версия формата.
        class_count: Число классов C.
        alpha0: Матрица переходов для новостей.
        alpha1: Матрица переходов для дезинформации.
        quantizer: Границы интервалов оценки.
        scorer: Параметры линейного оценщика (если обучался).
        prior_pi1: Оценка априорной вероятности дезинформации.
        costs: Стоимости (только у политики).
        solver: Параметры решателя (только у политики).
        thresholds: Пороги (только у политики).
        provenance: Происхождение.
    """
    model_config = ConfigDict(frozen=True)

    format_version: Literal[1] = ARTIFACT_FORMAT_VERSION
    class_count: int = Field(ge=2)
    alpha0: tuple[tuple[float, ...], ...]
    alpha1: tuple[tuple[float, ...], ...]
    quantizer: Quantizer = Field(default_factory=Quantizer)
    scorer: Optional[EdgeScorer] = None
    prior_pi1: float = Field(0.5, gt=0, lt=1)
    costs: Optional[CostConfig] = None
    solver: Optional[SolverConfig] = None
    thresholds: Optional[PolicyThresholds] = None
    provenance: Provenance = Field(default_factory=Provenance)

    @model_validator(mode='after')
    def check_consistency(self) -> 'ModelArtifact':
        self.transition_model()
        if self.thresholds is not None:
            if self.costs is None or self.solver is None:
                raise ValueError('у политики нет стоимостей или решателя')
            self.policy()
        if (self.scorer is not None
                and self.quantizer.class_count != self.class_count):
            raise ValueError('квантование не совпадает с числом классов')
        return self

    @property
    def is_policy(self) -> bool:
        return self.thresholds is not None

    def transition_model(self) -> TransitionModel:
        return TransitionModel(
            class_count=self.class_count,
            alpha0=self.alpha0,
            alpha1=self.alpha1,
        )

    def policy(self) -> Policy:
        if self.thresholds is None:
            raise ValueError('артефакт не содержит порогов, выполните solve')
        return Policy(
            model=self.transition_model(),
            costs=self.costs,
            solver=self.solver,
            thresholds=self.thresholds,
        )

    def with_policy(self, policy: Policy, provenance: Provenance
                    ) -> 'ModelArtifact':
        """Артефакт политики на основе артефакта модели."""
        return self.model_copy(update={
            'costs': policy.costs,
            'solver': policy.solver,
            'thresholds': policy.thresholds,
            'provenance': provenance,
        })


class SimulationManifest(BaseModel):
    """Манифест синтетического набора трасс.

    Атрибуты:
        config: Полная конфигурация симулятора.
        trace_count: Число записанных трасс.
        label_counts: Число трасс по меткам [news, misinformation].
        misclassification_probability: Вероятность ошибки класса ребра.
        same_type_fraction: Доля ребер между узлами одного типа.
        provenance: Происхождение.
    """
    model_config = ConfigDict(frozen=True)

    format_version: Literal[1] = ARTIFACT_FORMAT_VERSION
    config: SyntheticConfig
    trace_count: int
    label_counts: tuple[int, int]
    misclassification_probability: float = 0.0
    same_type_fraction: float
    provenance: Provenance = Field(default_factory=Provenance)


class StreamEvent(TraceEvent):
    """Строка потока для detect: событие с идентификатором трассы.

    Атрибуты:
        trace_id: Идентификатор трассы.
    """
    trace_id: str


class VerdictLine(BaseModel):
    """Строка с решением детектора.

    Атрибуты:
        trace_id: Идентификатор трассы.
        decision: Объявленная гипотеза (news или misinformation).
        label: Та же гипотеза числом (0 или 1).
        stopping_time: Число наблюдений T.
        final_belief: Убеждение Π_T.
        forced: Решение по концу потока.
    """
    trace_id: str
    decision: Literal['news', 'misinformation']
    label: Literal[0, 1]
    stopping_time: int
    final_belief: float
    forced: bool = False

    @classmethod
    def build(cls, trace_id: str, verdict: Verdict) -> 'VerdictLine':
        return cls(
            trace_id=trace_id,
            decision=verdict.decision.name,
            label=verdict.decision.label,
            stopping_time=verdict.stopping_time,
            final_belief=verdict.final_belief,
            forced=verdict.forced,
        )
