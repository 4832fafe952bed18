import numpy as np
import pytest

from dada.autodiff import Tensor
from dada.datagen import make_gaussian_grid, make_open_set_grid, make_two_moons, restrict_label_space
from dada.models import probabilities_from_logits, reset_degenerate_events
from dada.schemas.config import TrainConfig


def prob_output(rows, K=None):
    """由给定的概率行构造 ProbOutput（logits 取 log p，softmax 还原 p）"""
    probs = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    K = probs.shape[1] - 1 if K is None else K
    return probabilities_from_logits(Tensor(np.log(probs), requires_grad=True), K)


def tiny_config(**overrides) -> TrainConfig:
    """几秒内跑完的训练配置"""
    values = {
        "eta0": 0.01,
        "pretrain_epochs": 2,
        "T_adv": 2,
        "T_cls": 1,
        "batch_size": 32,
        "hidden_dims": [8],
        "seed": 0,
    }
    values.update(overrides)
    return TrainConfig.parse(values)


@pytest.fixture(autouse=True)
def _clear_degenerate_events():
    reset_degenerate_events()
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def moons():
    return make_two_moons(60, rotation_deg=30.0, noise_sd=0.1, seed=3)


@pytest.fixture
def grid4():
    return make_gaussian_grid(4, n_per_class=15, shift=(0.5, 0.5), seed=5)


@pytest.fixture
def partial_pair(grid4):
    return restrict_label_space(grid4, target_labels=[1, 2])


@pytest.fixture
def open_pair():
    return make_open_set_grid(K_known=3, n_per_class=15, known_to_unknown=1.0, seed=7)
