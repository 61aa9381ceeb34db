import numpy as np
import pytest

from quickstop.detector import decide
from quickstop.evaluation import (METRIC_COLUMNS, brute_force_optimal,
                                  cost_sweep, evaluate, noise_sweep)
from quickstop.exceptions import DataError, HorizonTooLargeError
from quickstop.models import CostConfig, Hypothesis, SolverConfig, Trace
from quickstop.simulator import SyntheticConfig, sample_markov_mixture
from quickstop.solver import Policy, PolicyThresholds, solve

COARSE = SolverConfig(grid_step=0.01)


@pytest.fixture(scope='module')
def mixture(weibo):
    return sample_markov_mixture(weibo, 0.5, 2000, 200, seed=12)


def toy_traces():
    return [
        Trace.from_classes('n1', [0] * 20, Hypothesis.news),
        Trace.from_classes('n2', [0] * 20, Hypothesis.news),
        Trace.from_classes('m1', [3] * 20, Hypothesis.misinformation),
    ]


class TestEvaluate:
    def test_perfect_separation(self, news_policy):
        report = evaluate(news_policy, toy_traces(), prior=0.5)
        assert report.accuracy == 1.0
        assert report.false_positive_rate == 0.0
        assert report.false_negative_rate == 0.0
        assert report.forced_count == 0
        mis_time = report.mean_detection_time_misinformation
        assert report.mean_realized_cost == pytest.approx(
            news_policy.costs.c * mis_time / 3
        )

    def test_collapsed_policy_declares_everything(self, weibo):
        policy = Policy(model=weibo, costs=CostConfig(),
                        thresholds=PolicyThresholds.collapsed(4, 0.5))
        report = evaluate(policy, toy_traces(), prior=0.6)
        assert report.false_positive_rate == 1.0
        assert report.false_negative_rate == 0.0
        assert report.mean_detection_time == 1.0
        assert report.mean_detection_time_news is None
        assert report.mean_realized_cost == pytest.approx(
            (10.0 + 10.0 + 0.05) / 3
        )

    def test_metric_identities(self, coarse_policy, mixture):
        report = evaluate(coarse_policy, mixture)
        errors = (report.false_positive_rate * report.news_count
                  + report.false_negative_rate * report.misinformation_count)
        assert report.trace_count == 2000
        assert report.news_count + report.misinformation_count == 2000
        assert report.correct_count == pytest.approx(2000 - errors)
        assert report.accuracy == report.correct_count / 2000
        assert set(report.row()) == set(METRIC_COLUMNS)

    def test_realized_cost_matches_value_function(self, weibo_policy,
                                                  mixture):
        report = evaluate(weibo_policy, mixture)
        costs = weibo_policy.costs
        per_trace = []
        for trace in mixture:
            verdict = decide(weibo_policy, trace.classes)
            cost = 0.0
            if verdict.decision is not trace.label:
                cost = (costs.c_I if trace.label is Hypothesis.news
                        else costs.c_II)
            if trace.label is Hypothesis.misinformation:
                cost += costs.c * verdict.stopping_time
            per_trace.append(cost)
        assert report.mean_realized_cost == pytest.approx(np.mean(per_trace))
        standard_error = np.std(per_trace, ddof=1) / np.sqrt(len(mixture))
        values = weibo_policy.thresholds.value_function
        expected = (np.mean([values.at(z, costs.prior_pi1)
                             for z in range(4)])
                    + costs.c * costs.prior_pi1)
        assert (abs(report.mean_realized_cost - expected)
                <= 4 * standard_error + 0.02)

    def test_misinformation_is_detected_first(self, weibo_policy, weibo):
        traces = sample_markov_mixture(weibo, 0.5, 2000, 500, seed=1)
        report = evaluate(weibo_policy, traces)
        assert (report.mean_detection_time_misinformation
                < report.mean_detection_time_news)
        assert report.false_negative_rate <= report.false_positive_rate

    def test_detection_time_shrinks_with_c(self, weibo, mixture):
        cheap = solve(weibo, CostConfig(c=0.05), COARSE)
        dear = solve(weibo, CostConfig(c=1.0), COARSE)
        traces = mixture[:500]
        assert (evaluate(dear, traces).mean_detection_time
                <= evaluate(cheap, traces).mean_detection_time)

    def test_rejects_empty_and_unlabeled(self, weibo_policy):
        with pytest.raises(DataError):
            evaluate(weibo_policy, [])
        with pytest.raises(DataError):
            evaluate(weibo_policy, [Trace.from_classes('u', [0, 1])])


class TestOracle:
    def test_single_observation(self, weibo, costs):
        result = brute_force_optimal(weibo, costs, 1)
        assert result.optimal_cost == pytest.approx(5.025)
        assert result.policy_cost == pytest.approx(5.025)
        assert result.gap == pytest.approx(0.0)

    def test_prohibitive_spreading_cost(self, weibo):
        result = brute_force_optimal(weibo, CostConfig(c=100.0), 5)
        assert result.gap == pytest.approx(0.0, abs=1e-9)
        assert result.continuation_probability == 0.0

    def test_random_binary_models(self, random_model):
        rng = np.random.default_rng(31)
        for _ in range(20):
            model = random_model(rng, 2)
            costs = CostConfig(c=float(rng.uniform(0.05, 0.5)))
            policy = solve(model, costs)
            result = brute_force_optimal(model, costs, 8,
                                         policy.thresholds)
            bound = (5 * policy.solver.grid_step * 10.0
                     + result.truncation_slack + 1e-9)
            assert -1e-9 <= result.gap <= bound

    def test_weibo_model(self, weibo_policy):
        result = brute_force_optimal(weibo_policy.model, weibo_policy.costs,
                                     6, weibo_policy.thresholds)
        assert result.gap >= -1e-9
        assert result.gap <= 0.05 + result.truncation_slack + 1e-9
        assert 0.0 <= result.continuation_probability <= 1.0

    @pytest.mark.parametrize('horizon', [0, 12])
    def test_horizon_limits(self, weibo, costs, horizon):
        with pytest.raises(HorizonTooLargeError):
            brute_force_optimal(weibo, costs, horizon)


class TestSweeps:
    def test_cost_sweep_table(self, weibo, costs, mixture):
        frame = cost_sweep(weibo, costs, [0.1, 0.5], mixture[:100], COARSE)
        assert list(frame.columns) == ['c', *METRIC_COLUMNS]
        assert frame['c'].tolist() == [0.1, 0.5]

    def test_noise_sweep_table(self):
        synthetic = SyntheticConfig(node_count=100, trace_count=40, seed=1)
        frame = noise_sweep(synthetic, [0.0, 0.3], CostConfig(c=0.3),
                            COARSE)
        assert frame['misclassification_probability'].tolist() == [0.0, 0.3]
        assert frame['trace_count'].tolist() == [8, 8]

    @pytest.mark.slow
    def test_noise_robustness(self):
        levels = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
        frame = noise_sweep(SyntheticConfig(), levels, CostConfig(c=0.3))
        accuracy = frame['accuracy'].tolist()
        assert accuracy[-1] >= 0.85
        for better, worse in zip(accuracy[:-1], accuracy[1:]):
            assert better >= worse - 0.02
