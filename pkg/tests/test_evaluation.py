import math

import numpy as np
import pytest

from conftest import prob_output
from dada.core.errors import ValidationError
from dada.datagen import MISSING_LABEL, DatasetPair, Scenario
from dada.models import init_network
from dada.services.evaluation import (
    TargetMonitor, accuracy, avg_true_class_prob, category_weight_split, confusion, evaluate_network,
    mean_per_class, open_set_metrics, per_class_accuracy,
)
from dada.utils.report import eval_report_records, render_eval_report


def test_accuracy():
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    assert accuracy([1, 1, 2, 2], [1, 2, 2, 2]) == 0.75
    with pytest.raises(ValidationError):
        accuracy([], [])
    with pytest.raises(ValidationError):
        accuracy([1], [1, 2])


def test_shuffled_predictions_are_at_chance(rng):
    labels = np.repeat([1, 2], 500)
    assert accuracy(rng.permutation(labels), labels) == pytest.approx(0.5, abs=0.06)


def test_per_class_mean_ignores_imbalance():
    labels = np.array([1] * 9 + [2])
    preds = np.array([1] * 9 + [1])
    per_class = per_class_accuracy(preds, labels, 2)
    assert per_class.tolist() == [1.0, 0.0]
    assert mean_per_class(per_class) == 0.5
    assert accuracy(preds, labels) == 0.9


def test_absent_class_is_excluded():
    per_class = per_class_accuracy([1, 1, 2], [1, 1, 2], 3)
    assert np.isnan(per_class[2])
    assert mean_per_class(per_class) == 1.0


def test_confusion_rows_match_class_counts():
    labels = np.array([1, 1, 2, 3, 3, 3])
    preds = np.array([1, 2, 2, 3, 1, 3])
    matrix = confusion(preds, labels, 3)
    assert matrix.sum(axis=1).tolist() == [2, 1, 3]
    assert np.trace(matrix) / len(labels) == accuracy(preds, labels)


def test_open_set_perfect():
    labels = [1, 2, 3, 3]
    scores = open_set_metrics(labels, labels, 3)
    assert (scores.os, scores.os_star, scores.unk_recall) == (1.0, 1.0, 1.0)


def test_open_set_everything_unknown():
    labels = [1, 2, 3, 3]
    scores = open_set_metrics([3, 3, 3, 3], labels, 3)
    assert scores.os_star == 0.0
    assert scores.unk_recall == 1.0
    assert scores.os == pytest.approx(1 / 3)


def test_open_set_arithmetic():
    # 已知类各 0.8，未知类 0.5
    labels = [1] * 5 + [2] * 5 + [3] * 2
    preds = [1, 1, 1, 1, 2] + [2, 2, 2, 2, 1] + [3, 1]
    scores = open_set_metrics(preds, labels, 3)
    assert scores.os_star == pytest.approx(0.8)
    assert scores.os == pytest.approx(0.7)
    assert scores.os == pytest.approx((2 * scores.os_star + scores.unk_recall) / 3)


def test_open_set_without_unknown_falls_back():
    scores = open_set_metrics([1, 2], [1, 2], 3)
    assert not scores.unknown_present
    assert scores.os == scores.os_star == 1.0


def test_avg_true_class_prob():
    uniform = prob_output([[0.25, 0.25, 0.5], [0.1, 0.1, 0.8]])
    assert avg_true_class_prob(uniform, np.array([1, 2])) == pytest.approx(0.5)
    assert math.isnan(avg_true_class_prob(uniform, np.array([3, 3])))


def _pair(scenario, target_y, K=2, unknown=None):
    return DatasetPair(
        source_x=np.array([[0.0, 0.0], [3.0, 0.0]]),
        source_y=np.array([1, 2]),
        target_x=np.zeros((len(target_y), 2)),
        target_y=np.array(target_y),
        K_source=K,
        K_target=unknown or K,
        scenario=scenario,
        unknown_label=unknown,
    ).validate()


def test_evaluate_network_closed(moons):
    net = init_network([2, 4], K=2, seed=0)
    report = evaluate_network(net, moons.evaluation_view(), split="target")
    assert report.n_instances == len(moons.target_x)
    assert report.labels == [1, 2]
    assert sum(map(sum, report.confusion)) == report.n_instances
    # 闭集也保留未知类一行一列，且全为0
    assert len(report.confusion) == 3 and all(len(row) == 3 for row in report.confusion)
    assert report.confusion[2] == [0, 0, 0]
    assert [row[2] for row in report.confusion] == [0, 0, 0]
    assert report.os is None
    assert evaluate_network(net, moons.evaluation_view(), split="target") == report


def test_eval_report_rows_cover_unknown_column(moons):
    report = evaluate_network(init_network([2, 4], K=2, seed=0), moons.evaluation_view(), split="target")
    records = eval_report_records(report)
    assert [record["label"] for record in records[1:]] == [1, 2, 3]
    assert records[-1]["accuracy"] is None
    assert "true\\pred" in render_eval_report(report)


def test_evaluate_network_open(open_pair):
    net = init_network([2, 4], K=4, seed=0)
    report = evaluate_network(net, open_pair.evaluation_view(), split="target")
    assert report.labels == [1, 2, 3, 4]
    assert len(report.confusion) == 4 and all(len(row) == 4 for row in report.confusion)
    assert report.unknown_present
    assert report.os is not None and report.os_star is not None


def test_evaluate_network_needs_target_labels():
    pair = _pair(Scenario.CLOSED, [MISSING_LABEL, MISSING_LABEL])
    net = init_network([2, 4], K=2)
    with pytest.raises(ValidationError, match="held-out labels"):
        evaluate_network(net, pair.evaluation_view(), split="target")
    with pytest.raises(ValidationError, match="unknown split"):
        evaluate_network(net, pair.evaluation_view(), split="both")
    assert evaluate_network(net, pair.evaluation_view(), split="source").n_instances == 2


def test_monitor_reports_nan_without_labels():
    pair = _pair(Scenario.CLOSED, [MISSING_LABEL])
    values = TargetMonitor(pair.evaluation_view())(init_network([2, 4], K=2))
    assert set(values) == {"acc_target", "avg_true_prob"}
    assert all(np.isnan(value) for value in values.values())


def test_category_weight_split(partial_pair, moons):
    split = category_weight_split(np.array([1.0, 0.8, 0.1, 0.3]), partial_pair.evaluation_view())
    assert split == pytest.approx({"shared": 0.9, "outlier": 0.2})
    assert category_weight_split(np.ones(2), moons.evaluation_view()) is None
