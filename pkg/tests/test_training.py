import numpy as np
import pytest

from quickstop.exceptions import TrainingError
from quickstop.models import Hypothesis, Trace, TraceEvent
from quickstop.simulator import (SyntheticConfig, generate_traces,
                                 sample_markov_trace)
from quickstop.training import (EdgeScorer, Quantizer, calibrate_scorer,
                                classify_edge, classify_trace,
                                estimate_prior, estimate_transitions,
                                fit_training_pipeline, split_traces,
                                train_scorer)


def feature_trace(trace_id, label, value, jitter, rng, length=5):
    events = [
        TraceEvent(
            src_features=[value + jitter * rng.standard_normal()],
            dst_features=[value + jitter * rng.standard_normal()],
        )
        for _ in range(length)
    ]
    return Trace(trace_id=trace_id, label=label, events=events)


class TestQuantizer:
    @pytest.mark.parametrize('score, expected', [
        (0.0, 0),
        (0.10, 0),
        (0.25, 0),
        (0.2500001, 1),
        (0.5, 1),
        (0.75, 2),
        (1.0, 3),
    ])
    def test_default_boundaries(self, score, expected):
        assert Quantizer().quantize(score) == expected

    def test_uniform(self):
        assert Quantizer.uniform(5).boundaries == pytest.approx(
            (0.2, 0.4, 0.6, 0.8)
        )

    def test_rejects_unsorted_boundaries(self):
        with pytest.raises(ValueError):
            Quantizer(boundaries=(0.5, 0.25))

    def test_rejects_score_outside_unit_interval(self):
        with pytest.raises(ValueError):
            Quantizer().quantize(1.5)


class TestEstimateTransitions:
    def test_counts_without_smoothing(self):
        report = estimate_transitions(
            [(Hypothesis.news, [0, 0, 1]),
             (Hypothesis.misinformation, [3, 3])],
            smoothing_alpha=0.0,
        )
        probs = report.transition_probabilities()
        assert probs[0, 0].tolist() == [0.5, 0.5, 0.0, 0.0]
        assert report.undefined_rows == ((1, 2, 3), (0, 1, 2))
        assert report.model is None
        with pytest.raises(TrainingError, match='1, 2, 3'):
            report.require_model()

    def test_laplace_smoothing_fills_empty_rows(self):
        report = estimate_transitions(
            [(Hypothesis.news, [0, 0, 1]),
             (Hypothesis.misinformation, [3, 3])],
            smoothing_alpha=1.0,
        )
        model = report.require_model()
        assert model.alpha0[2] == pytest.approx((0.25, 0.25, 0.25, 0.25))
        assert model.alpha0[0] == pytest.approx((2 / 6, 2 / 6, 1 / 6, 1 / 6))
        assert report.prior_pi1 == 0.5

    def test_recovers_weibo_matrices(self, weibo):
        traces = [
            (h, sample_markov_trace(weibo, h, 100_000, seed=h.label).classes)
            for h in Hypothesis
        ]
        report = estimate_transitions(traces, smoothing_alpha=0.0)
        visits = np.asarray(report.transition_counts).sum(axis=2)
        # редкие строки проверяются с допуском в пять стандартных ошибок
        tolerance = np.maximum(0.02, 2.5 / np.sqrt(visits))[:, :, None]
        error = np.abs(report.transition_probabilities() - weibo.matrices)
        assert np.all(error <= tolerance)

    def test_synthetic_misinformation_favours_gossiper_edges(self):
        traces = generate_traces(SyntheticConfig(node_count=200,
                                                 trace_count=60, seed=6))
        model = fit_training_pipeline(traces).report.require_model()
        a0, a1 = model.matrices
        assert a1[:, 3].mean() > a0[:, 3].mean()
        assert a0[:, 0].mean() > a1[:, 0].mean()

    def test_requires_both_labels(self):
        with pytest.raises(TrainingError):
            estimate_transitions([(Hypothesis.news, [0, 1, 2])])

    def test_label_without_transitions(self):
        with pytest.raises(TrainingError):
            estimate_transitions([(Hypothesis.news, [0, 1]),
                                  (Hypothesis.misinformation, [2])])

    def test_class_out_of_range(self):
        with pytest.raises(TrainingError):
            estimate_transitions([(Hypothesis.news, [0, 4]),
                                  (Hypothesis.misinformation, [1, 1])])


class TestScorer:
    def test_separable_features(self):
        rng = np.random.default_rng(0)
        traces = [
            feature_trace(f'n{i}', Hypothesis.news, 0.0, 0.05, rng)
            for i in range(10)
        ] + [
            feature_trace(f'm{i}', Hypothesis.misinformation, 1.0, 0.05, rng)
            for i in range(10)
        ]
        scorer = train_scorer(traces)
        assert scorer.score([0.0], [0.0]) < 0.5
        assert scorer.score([1.0], [1.0]) > 0.5

    def test_single_label(self):
        rng = np.random.default_rng(1)
        traces = [feature_trace('n', Hypothesis.news, 0.0, 0.1, rng)]
        with pytest.raises(TrainingError):
            train_scorer(traces)

    def test_dimension_mismatch_between_traces(self):
        rng = np.random.default_rng(2)
        wide = Trace(
            trace_id='w',
            label=Hypothesis.misinformation,
            events=[TraceEvent(src_features=[1.0, 0.0],
                               dst_features=[1.0, 0.0])],
        )
        traces = [feature_trace('n', Hypothesis.news, 0.0, 0.1, rng), wide]
        with pytest.raises(TrainingError):
            train_scorer(traces)

    def test_scorer_dimension_check(self):
        scorer = EdgeScorer(weights=[1.0, 1.0])
        with pytest.raises(ValueError):
            scorer.score([1.0], [1.0, 2.0])

    def test_precomputed_scores(self):
        trace = Trace(
            trace_id='s',
            events=[TraceEvent(score=0.1), TraceEvent(score=0.9)],
        )
        assert classify_trace(trace, None, Quantizer()) == [0, 3]

    def test_classify_edge(self):
        scorer = EdgeScorer(weights=[4.0, 4.0], bias=-4.0)
        assert classify_edge(scorer, Quantizer(), [0.0], [0.0]) == 0
        assert classify_edge(scorer, Quantizer(), [1.0], [1.0]) == 3

    def test_recovers_all_edge_types(self):
        """Каждый из четырех типов ребер попадает в свой класс."""
        config = SyntheticConfig(node_count=200, trace_count=60,
                                 max_events=200, with_features=True, seed=3)
        traces = [
            Trace(
                trace_id=trace.trace_id,
                label=trace.label,
                events=[e.model_copy(update={'edge_class': None})
                        for e in trace.events],
            )
            for trace in generate_traces(config)
        ]
        result = fit_training_pipeline(traces)
        assert result.scorer is not None
        predicted, truth = [], []
        for trace in traces:
            predicted += classify_trace(trace, result.scorer,
                                        result.quantizer)
            truth += trace.true_classes
        predicted, truth = np.array(predicted), np.array(truth)
        for z in range(4):
            assert np.mean(predicted[truth == z] == z) > 0.99


ONE_HOT = {
    0: ((1.0, 0.0), (1.0, 0.0)),
    1: ((0.0, 1.0), (1.0, 0.0)),
    2: ((1.0, 0.0), (0.0, 1.0)),
    3: ((0.0, 1.0), (0.0, 1.0)),
}


def typed_trace(trace_id, types):
    return Trace(
        trace_id=trace_id,
        events=[TraceEvent(src_features=ONE_HOT[z][0],
                           dst_features=ONE_HOT[z][1]) for z in types],
    )


class TestCalibration:
    # логиты типов: -12, -8, 8, 12
    saturated = EdgeScorer(weights=[0.0, 4.0, 0.0, 20.0], bias=-12.0)

    def test_saturated_scorer_merges_middle_types(self):
        quantizer = Quantizer()
        classes = [classify_edge(self.saturated, quantizer, *ONE_HOT[z])
                   for z in range(4)]
        assert classes == [0, 0, 3, 3]

    def test_calibration_separates_types(self):
        quantizer = Quantizer()
        traces = [typed_trace('a', [0, 1, 2, 3]),
                  typed_trace('b', [3, 2, 1, 0])]
        scorer = calibrate_scorer(self.saturated, traces, quantizer)
        classes = [classify_edge(scorer, quantizer, *ONE_HOT[z])
                   for z in range(4)]
        assert classes == [0, 1, 2, 3]

    def test_constant_logits_are_left_alone(self):
        traces = [typed_trace('a', [1, 1, 1])]
        scorer = calibrate_scorer(self.saturated, traces, Quantizer())
        assert scorer == self.saturated

    def test_precomputed_scorer_is_left_alone(self):
        scorer = EdgeScorer.precomputed()
        assert calibrate_scorer(scorer, [], Quantizer()) is scorer


class TestSplitsAndPrior:
    def test_split_is_seeded(self):
        traces = [Trace.from_classes(f't{i}', [0, 1]) for i in range(10)]
        first = split_traces(traces, seed=4)
        second = split_traces(traces, seed=4)
        assert [t.trace_id for t in first[1]] == [
            t.trace_id for t in second[1]
        ]
        assert len(first[0]) == 8
        assert len(first[1]) == 2

    def test_prior_is_label_frequency(self):
        traces = [
            Trace.from_classes('a', [0, 1], Hypothesis.news),
            Trace.from_classes('b', [0, 1], Hypothesis.misinformation),
            Trace.from_classes('c', [0, 1], Hypothesis.misinformation),
            Trace.from_classes('d', [0, 1]),
        ]
        assert estimate_prior(traces) == pytest.approx(2 / 3)

    def test_pipeline_on_classified_traces(self):
        traces = [
            Trace.from_classes('a', [0, 0, 1, 0], Hypothesis.news),
            Trace.from_classes('b', [3, 3, 2, 3], Hypothesis.misinformation),
        ]
        result = fit_training_pipeline(traces)
        assert result.scorer is None
        assert result.report.trace_counts == (1, 1)
        assert result.report.require_model().class_count == 4
