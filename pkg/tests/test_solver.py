import numpy as np
import pytest

from quickstop.exceptions import ConvergenceError, ThresholdOrderError
from quickstop.models import CostConfig, SolverConfig, TransitionModel
from quickstop.solver import (Policy, PolicyThresholds, ValueFunction,
                              bellman_backup, solve, stopping_costs,
                              threshold_monotonicity_sweep)

COARSE = SolverConfig(grid_step=0.01)


def stop_values(model, costs, config):
    grid = config.grid()
    return ValueFunction.from_array(
        np.tile(stopping_costs(grid, costs), (model.class_count, 1))
    )


class TestBellmanBackup:
    def test_boundary_values(self, weibo, costs):
        updated = bellman_backup(stop_values(weibo, costs, COARSE), weibo,
                                 costs, COARSE)
        assert np.all(updated.array[:, 0] == 0.0)
        assert np.all(updated.array[:, -1] == 0.0)

    def test_uninformative_model_is_fixed_point(self, costs):
        model = TransitionModel.uniform(4)
        start = stop_values(model, costs, COARSE)
        updated = bellman_backup(start, model, costs, COARSE)
        assert np.allclose(updated.array, start.array, atol=1e-12)

    def test_never_exceeds_stopping_cost(self, weibo, costs):
        start = stop_values(weibo, costs, COARSE)
        updated = bellman_backup(start, weibo, costs, COARSE)
        assert np.all(updated.array <= start.array)

    def test_rejects_partial_grid(self, weibo, costs):
        with pytest.raises(ValueError):
            bellman_backup(ValueFunction(values=[[0.0, 0.0]] * 4), weibo,
                           costs, COARSE)


class TestSolve:
    def test_weibo_continuation_region(self, weibo_policy):
        thresholds = weibo_policy.thresholds
        assert len(thresholds.pi_lower) == 4
        for z in range(4):
            low, high = thresholds.continuation_region(z)
            assert low < 0.5 < high

    def test_value_function_properties(self, weibo_policy, costs):
        values = weibo_policy.thresholds.value_function.array
        grid = weibo_policy.solver.grid()
        assert np.all(values <= stopping_costs(grid, costs) + 1e-12)
        assert np.all(values[:, 0] == 0.0)
        assert np.all(values[:, -1] == 0.0)

    def test_huge_c_collapses_thresholds(self, weibo):
        policy = solve(weibo, CostConfig(c=100.0))
        assert policy.thresholds.pi_lower == pytest.approx((0.5,) * 4)
        assert policy.thresholds.pi_upper == pytest.approx((0.5,) * 4)

    def test_uninformative_model_collapses_thresholds(self):
        policy = solve(TransitionModel.uniform(3),
                       CostConfig(c_I=10.0, c_II=30.0, c=0.2))
        step = policy.solver.grid_step
        for low, high in zip(policy.thresholds.pi_lower,
                             policy.thresholds.pi_upper):
            assert abs(low - 0.25) <= step
            assert abs(high - 0.25) <= step

    def test_random_models_respect_bracket(self, random_model):
        rng = np.random.default_rng(21)
        for _ in range(20):
            model = random_model(rng, int(rng.integers(2, 5)))
            costs = CostConfig(c_I=float(rng.uniform(1, 20)),
                               c_II=float(rng.uniform(1, 20)),
                               c=float(rng.uniform(0.05, 1.0)))
            policy = solve(model, costs)
            star = costs.decision_threshold
            values = policy.thresholds.value_function.array
            grid = policy.solver.grid()
            assert np.all(values <= stopping_costs(grid, costs) + 1e-12)
            for low, high in zip(policy.thresholds.pi_lower,
                                 policy.thresholds.pi_upper):
                assert low <= star <= high

    def test_grid_refinement(self, weibo, costs):
        coarse = solve(weibo, costs, SolverConfig(grid_step=0.01))
        fine = solve(weibo, costs, SolverConfig(grid_step=0.005))
        assert np.allclose(coarse.thresholds.pi_lower,
                           fine.thresholds.pi_lower, atol=0.02)
        assert np.allclose(coarse.thresholds.pi_upper,
                           fine.thresholds.pi_upper, atol=0.02)

    def test_non_convergence(self, weibo, costs):
        with pytest.raises(ConvergenceError) as error:
            solve(weibo, costs, SolverConfig(max_iterations=1))
        assert error.value.iterations == 1
        assert error.value.residual > 0
        assert error.value.exit_code == 4


class TestPolicy:
    def test_rejects_thresholds_outside_bracket(self, weibo, costs):
        with pytest.raises(ValueError):
            Policy(
                model=weibo,
                costs=costs,
                thresholds=PolicyThresholds(pi_lower=[0.6] * 4,
                                            pi_upper=[0.9] * 4),
            )

    def test_rejects_wrong_threshold_count(self, weibo, costs):
        with pytest.raises(ValueError):
            Policy(model=weibo, costs=costs,
                   thresholds=PolicyThresholds.collapsed(3, 0.5))


class TestMonotonicitySweep:
    def test_region_shrinks_with_c(self, weibo, costs):
        rows = threshold_monotonicity_sweep(weibo, costs, [0.1, 0.8],
                                            COARSE)
        step = COARSE.grid_step
        for z in range(4):
            assert rows[1].pi_upper[z] <= rows[0].pi_upper[z] + step
            assert rows[1].pi_lower[z] >= rows[0].pi_lower[z] - step

    def test_full_staircase(self, weibo, costs):
        c_values = [round(0.05 * k, 2) for k in range(1, 25)]
        rows = threshold_monotonicity_sweep(weibo, costs, c_values)
        assert [row.c for row in rows] == c_values

    def test_requires_ascending_values(self, weibo, costs):
        with pytest.raises(ThresholdOrderError):
            threshold_monotonicity_sweep(weibo, costs, [0.5, 0.1], COARSE)
        with pytest.raises(ThresholdOrderError):
            threshold_monotonicity_sweep(weibo, costs, [0.5], COARSE)
