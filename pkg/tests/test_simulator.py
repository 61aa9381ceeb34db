import numpy as np
import pytest

from quickstop.exceptions import SimulationError
from quickstop.models import Hypothesis, Trace, TransitionModel
from quickstop.simulator import (NodeKind, SyntheticConfig, edge_class,
                                 generate_network, generate_traces,
                                 inject_noise, inject_noise_all,
                                 sample_markov_mixture, sample_markov_trace,
                                 spread)


class TestNetwork:
    def test_edge_class_numbering(self):
        assert edge_class(NodeKind.messenger, NodeKind.messenger) == 0
        assert edge_class(NodeKind.gossiper, NodeKind.messenger) == 1
        assert edge_class(NodeKind.messenger, NodeKind.gossiper) == 2
        assert edge_class(NodeKind.gossiper, NodeKind.gossiper) == 3

    def test_small_network_attaches_to_seed_nodes(self):
        network = generate_network(SyntheticConfig(node_count=4))
        assert set(network.attachments[3]) == {0, 1, 2}
        assert network.degree(3) == 3

    def test_edges_carry_endpoint_classes(self):
        network = generate_network(SyntheticConfig(node_count=50, seed=2))
        for u, v, z in network.graph.edges(data='edge_class'):
            assert z == edge_class(network.kind(u), network.kind(v))

    def test_homophily(self):
        fractions = [
            generate_network(
                SyntheticConfig(node_count=500, seed=seed)
            ).same_type_fraction()
            for seed in range(10)
        ]
        assert np.mean(fractions) == pytest.approx(0.7, abs=0.03)

    def test_rejects_too_few_nodes(self):
        with pytest.raises(ValueError):
            SyntheticConfig(node_count=3, edges_per_node=3)


class TestSpread:
    def test_certain_spread_reaches_everyone(self):
        config = SyntheticConfig(node_count=30,
                                 spread_probs=((1.0,) * 4, (1.0,) * 4))
        network = generate_network(config)
        trace = spread(network, Hypothesis.news, config, seed=1)
        assert len(trace) == 29
        times = [event.time for event in trace.events]
        assert times == sorted(times)

    def test_no_spread(self):
        config = SyntheticConfig(node_count=30, max_retries=3,
                                 spread_probs=((0.0,) * 4, (0.0,) * 4))
        network = generate_network(config)
        with pytest.raises(SimulationError):
            spread(network, Hypothesis.misinformation, config, seed=1)

    def test_max_events(self):
        config = SyntheticConfig(node_count=100, max_events=10,
                                 spread_probs=((1.0,) * 4, (1.0,) * 4))
        trace = generate_traces(
            config.model_copy(update={'trace_count': 1})
        )[0]
        assert len(trace) == 10

    def test_label_shapes_class_histogram(self):
        traces = generate_traces(SyntheticConfig(node_count=300,
                                                 trace_count=80, seed=5))
        counts = {h: np.zeros(4) for h in Hypothesis}
        for trace in traces:
            counts[trace.label] += np.bincount(trace.classes, minlength=4)
        news = counts[Hypothesis.news] / counts[Hypothesis.news].sum()
        mis = (counts[Hypothesis.misinformation]
               / counts[Hypothesis.misinformation].sum())
        assert news[0] > news[3]
        assert mis[3] > mis[0]
        assert mis[3] > news[3]

    def test_generation_is_seeded(self):
        config = SyntheticConfig(node_count=100, trace_count=5, seed=9)
        first = [t.classes for t in generate_traces(config)]
        second = [t.classes for t in generate_traces(config)]
        assert first == second

    def test_features_follow_node_kinds(self):
        config = SyntheticConfig(node_count=100, trace_count=3,
                                 with_features=True, seed=4)
        for trace in generate_traces(config):
            for event in trace.events:
                src = NodeKind(int(event.src_features[1]))
                dst = NodeKind(int(event.dst_features[1]))
                assert event.edge_class == edge_class(src, dst)


class TestNoise:
    def trace(self, classes):
        return Trace.from_classes('t', classes, Hypothesis.news)

    def test_zero_noise_is_identity(self):
        trace = self.trace([0, 1, 2, 3, 3, 2])
        assert inject_noise(trace, 0.0, seed=1).classes == trace.classes

    def test_full_noise_flips_binary_classes(self):
        trace = self.trace([0, 1, 1, 0])
        noisy = inject_noise(trace, 1.0, seed=1, class_count=2)
        assert noisy.classes == [1, 0, 0, 1]
        assert noisy.true_classes == [0, 1, 1, 0]

    def test_half_noise(self):
        classes = [0, 1, 2, 3] * 500
        noisy = inject_noise(self.trace(classes), 0.5, seed=2)
        kept = np.mean(np.array(noisy.classes) == np.array(classes))
        assert kept == pytest.approx(0.5, abs=0.05)

    def test_flipped_edges_are_nested(self):
        traces = [self.trace([0, 1, 2, 3] * 10) for _ in range(5)]
        low = inject_noise_all(traces, 0.1, seed=3)
        high = inject_noise_all(traces, 0.4, seed=3)
        for clean, a, b in zip(traces, low, high):
            for z, za, zb in zip(clean.classes, a.classes, b.classes):
                if za != z:
                    assert zb != z

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            inject_noise(self.trace([0, 1]), 1.5, seed=0)


class TestMarkovSampling:
    def test_identity_matrix_repeats_first_class(self):
        model = TransitionModel.from_arrays(np.eye(3), np.eye(3))
        trace = sample_markov_trace(model, Hypothesis.news, 20, seed=7)
        assert len(set(trace.classes)) == 1

    def test_uniform_frequencies(self):
        model = TransitionModel.uniform(4)
        trace = sample_markov_trace(model, Hypothesis.misinformation,
                                    20_000, seed=1)
        frequencies = np.bincount(trace.classes, minlength=4) / len(trace)
        assert np.allclose(frequencies, 0.25, atol=0.02)

    def test_mixture_labels(self, weibo):
        traces = sample_markov_mixture(weibo, 0.3, 1000, 5, seed=0)
        share = np.mean([t.label is Hypothesis.misinformation
                         for t in traces])
        assert share == pytest.approx(0.3, abs=0.05)
        assert len({t.trace_id for t in traces}) == 1000

    def test_rejects_short_length(self, weibo):
        with pytest.raises(ValueError):
            sample_markov_trace(weibo, Hypothesis.news, 1, seed=0)
