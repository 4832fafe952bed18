"""
合成基准（约数分钟）：pytest -m slow
"""

from pathlib import Path
from typing import Dict, Sequence

import numpy as np
import pytest

from dada.datagen import make_gaussian_grid, make_open_set_grid, make_two_moons, restrict_label_space, save_csv
from dada.schemas.config import TrainConfig
from dada.schemas.sweep import SweepSpec
from dada.services.diagnostics import alternation_dynamics, gradient_check, sign_property, step_dynamics
from dada.services.evaluation import category_weight_split
from dada.services.runs import execute_run, replay_run
from dada.services.sweep import run_sweep
from dada.services.trainer import train
from dada.worker.tasks import final_metric_values

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SEEDS = (0, 1, 2, 3, 4)


def _config(name: str, seed: int, **overrides) -> TrainConfig:
    base = TrainConfig.from_file(CONFIGS / name)
    return TrainConfig.parse({**base.snapshot(), **overrides, "seed": seed})


def _mean_finals(config_name: str, make_pair, metrics: Sequence[str], **overrides) -> Dict[str, float]:
    """各种子最后一个epoch的指标取均值"""
    values = {metric: [] for metric in metrics}
    for seed in SEEDS:
        _, history = train(_config(config_name, seed, **overrides), make_pair(seed))
        final = final_metric_values(history)
        for metric in metrics:
            values[metric].append(final[metric])
    return {metric: float(np.mean(series)) for metric, series in values.items()}


def _mean_final(config_name: str, make_pair, metric: str = "acc_target", **overrides) -> float:
    return _mean_finals(config_name, make_pair, [metric], **overrides)[metric]


def _moons(seed):
    return make_two_moons(500, rotation_deg=30.0, noise_sd=0.1, seed=seed)


@pytest.fixture(scope="module")
def closed_set_finals():
    return {
        name: _mean_finals(f"two_moons_{name}.cfg", _moons, ["acc_target", "avg_true_prob"])
        for name in ("source_only", "dann_ca", "dada", "no_em", "dada_dc")
    }


@pytest.fixture(scope="module")
def closed_set_means(closed_set_finals):
    return {name: finals["acc_target"] for name, finals in closed_set_finals.items()}


def test_gradient_fidelity():
    result = gradient_check(draws=100)
    assert result.passed, result.detail


def test_sign_analysis():
    assert sign_property(n_points=10_000).passed


def test_step_dynamics():
    assert step_dynamics(trials=100).passed


def test_closed_set_ordering(closed_set_means):
    means = closed_set_means
    assert means["source_only"] < means["dann_ca"] <= means["dada"]
    assert means["dada"] - means["source_only"] >= 0.05
    assert means["dada"] >= means["no_em"] - 0.01


def test_symmetric_variant_does_not_beat_dada(closed_set_means):
    assert closed_set_means["dada"] >= closed_set_means["dada_dc"] - 0.01


def test_true_class_probability_ordering(closed_set_finals):
    assert closed_set_finals["dada"]["avg_true_prob"] > closed_set_finals["source_only"]["avg_true_prob"]


def _partial(seed):
    grid = make_gaussian_grid(6, n_per_class=80, shift=(0.5, 0.5), seed=seed)
    return restrict_label_space(grid, target_labels=[1, 2, 3])


def test_partial_weighting():
    weighted, plain, ratios = [], [], []
    for seed in SEEDS:
        pair = _partial(seed)
        state, history = train(_config("grid_partial_dada_p.cfg", seed), pair)
        weighted.append(final_metric_values(history)["acc_target"])
        split = category_weight_split(state.category_weights.c, pair.evaluation_view())
        ratios.append(split["outlier"] / split["shared"])
        _, history = train(_config("grid_partial_dada_p.cfg", seed, objective="dada"), pair)
        plain.append(final_metric_values(history)["acc_target"])
    assert np.mean(weighted) - np.mean(plain) >= 0.03
    assert np.mean(ratios) < 0.5


def _open(seed):
    return make_open_set_grid(K_known=3, n_per_class=100, known_to_unknown=1.0, shift=(0.5, 0.5), seed=seed)


def test_open_set_recall():
    finals = _mean_finals("open_grid_dada_o.cfg", _open, ["unk_recall", "os_star"])
    unk_recall, os_star = finals["unk_recall"], finals["os_star"]
    known_baseline = _mean_final("open_grid_dada_o.cfg", _open, metric="os_star", objective="source_only")
    assert unk_recall >= 0.7
    assert os_star >= known_baseline - 0.02


def test_open_set_q_sweep():
    spec = SweepSpec.read(CONFIGS / "sweeps" / "open_set_q.json")
    rows = run_sweep(spec, n_jobs=1)
    recall = [row.means["unk_recall"] for row in rows]
    assert [row.value for row in rows] == [0.0, 0.1, 0.3]
    # q = 0 时目标项不再给未知类分配概率
    assert recall[0] < 0.1
    assert recall[1] > recall[0]
    assert recall[1] >= 0.7
    assert recall[2] >= recall[1]


def test_alternation_dynamics():
    _, history = train(TrainConfig.from_file(CONFIGS / "alternation_dada.cfg"), _moons(0))
    result = alternation_dynamics(history)
    assert result.passed, result.metrics


def test_replay_is_bit_identical(tmp_path):
    save_csv(_moons(0), tmp_path / "moons")
    config = _config("two_moons_dada.cfg", 0, T_adv=5, pretrain_epochs=5)
    execute_run(config, tmp_path / "moons", tmp_path / "run")
    for name in ("first", "second"):
        _, identical = replay_run(tmp_path / "run" / "manifest.json", tmp_path / name)
        assert identical
