import numpy as np
import pytest

from quickstop.fixtures import weibo_transition_model
from quickstop.models import CostConfig, SolverConfig, TransitionModel
from quickstop.solver import solve


@pytest.fixture(scope='session')
def weibo():
    return weibo_transition_model()


@pytest.fixture
def costs():
    return CostConfig(c_I=10.0, c_II=10.0, c=0.05, prior_pi1=0.5)


@pytest.fixture(scope='session')
def weibo_policy(weibo):
    return solve(weibo, CostConfig(), SolverConfig())


@pytest.fixture(scope='session')
def news_policy(weibo):
    """Политика с дорогим распространением: π_l^(z) > 0 для всех z."""
    return solve(weibo, CostConfig(c=1.2), SolverConfig())


@pytest.fixture(scope='session')
def coarse_policy(weibo):
    return solve(weibo, CostConfig(), SolverConfig(grid_step=0.01))


@pytest.fixture
def random_model():
    """Фабрика случайных моделей с строками из распределения Дирихле."""
    def make(rng: np.random.Generator, class_count: int) -> TransitionModel:
        ones = np.ones(class_count)
        return TransitionModel.from_arrays(
            rng.dirichlet(ones, size=class_count),
            rng.dirichlet(ones, size=class_count),
        )
    return make
