"""
评估指标

目标域标签只通过 EvaluationView 进入本模块，训练器拿到的 TrainingView 中没有目标域标签。
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix

from ..autodiff import no_grad
from ..core.errors import ValidationError
from ..core.logging import logger
from ..datagen import EvaluationView, Scenario
from ..models.network import DadaNetwork, ProbOutput, forward, predict_category
from ..schemas.metrics import EvalReport


def _check_pair(preds: np.ndarray, labels: np.ndarray) -> None:
    if len(preds) != len(labels):
        raise ValidationError(f"predictions and labels differ in length ({len(preds)} vs {len(labels)})")
    if len(labels) == 0:
        raise ValidationError("cannot evaluate an empty set of predictions")


def accuracy(preds: Sequence[int], labels: Sequence[int]) -> float:
    """总体准确率"""
    preds, labels = np.asarray(preds), np.asarray(labels)
    _check_pair(preds, labels)
    return float(np.mean(preds == labels))


def confusion(preds: Sequence[int], labels: Sequence[int], K: int) -> np.ndarray:
    """K×K 混淆矩阵，行为真实类别 1..K，列为预测类别 1..K"""
    preds, labels = np.asarray(preds), np.asarray(labels)
    _check_pair(preds, labels)
    size = max(K, int(preds.max()), int(labels.max()))
    return confusion_matrix(labels, preds, labels=np.arange(1, size + 1))[:K, :K]


def per_class_accuracy(preds: Sequence[int], labels: Sequence[int], K: int) -> np.ndarray:
    """
    各类别准确率

    Returns:
        np.ndarray: 长度 K；没有实例的类别为 NaN，计算均值时需排除
    """
    preds, labels = np.asarray(preds), np.asarray(labels)
    _check_pair(preds, labels)
    result = np.full(K, np.nan)
    for k in range(1, K + 1):
        members = labels == k
        if np.any(members):
            result[k - 1] = float(np.mean(preds[members] == k))
    absent = [k for k in range(1, K + 1) if np.isnan(result[k - 1])]
    if absent:
        logger.debug(f"类别 {absent} 没有实例，按类平均时排除")
    return result


def mean_per_class(per_class: np.ndarray) -> float:
    """忽略未定义项的按类平均"""
    defined = per_class[~np.isnan(per_class)]
    return float(np.mean(defined)) if defined.size else float("nan")


@dataclass(frozen=True)
class OpenSetScores:
    os: float
    os_star: float
    unk_recall: float
    unknown_present: bool


def open_set_metrics(preds: Sequence[int], labels: Sequence[int], K: int) -> OpenSetScores:
    """
    开放集指标，第 K 类为未知类

    OS* 为已知类 1..K-1 的按类平均准确率，OS 为含未知类在内的按类平均，unk_recall 为未知类准确率。
    没有未知类实例时 OS 退化为 OS*，并标记 unknown_present=False。
    """
    per_class = per_class_accuracy(preds, labels, K)
    os_star = mean_per_class(per_class[:K - 1])
    unk_recall = float(per_class[K - 1])
    if np.isnan(unk_recall):
        logger.warning("目标数据中没有未知类实例，OS 退化为 OS*")
        return OpenSetScores(os=os_star, os_star=os_star, unk_recall=unk_recall, unknown_present=False)
    return OpenSetScores(os=mean_per_class(per_class), os_star=os_star, unk_recall=unk_recall, unknown_present=True)


def avg_true_class_prob(p: ProbOutput, labels: np.ndarray) -> float:
    """
    真实类别上的平均条件概率 p̄_y

    只统计标签落在网络类别范围 1..K 内的实例。
    """
    labels = np.asarray(labels, dtype=np.int64)
    inside = (labels >= 1) & (labels <= p.K)
    if not np.any(inside):
        return float("nan")
    rows = np.flatnonzero(inside)
    return float(np.mean(p.p_bar.data[rows, labels[rows] - 1]))


def predict(net: DadaNetwork, x: np.ndarray) -> ProbOutput:
    """不记录计算图的前向"""
    with no_grad():
        return forward(net, x)


def evaluate_network(net: DadaNetwork, view: EvaluationView, split: str = "target") -> EvalReport:
    """
    在源域或目标域上评估网络

    Args:
        net: 网络
        view: 评估视图（含目标域保留标签）
        split: "target" 或 "source"

    Returns:
        EvalReport: 评估报告；开放集目标域额外包含 OS、OS*、unk_recall
    """
    if split == "source":
        x, labels = view.source_x, view.source_y
    elif split == "target":
        mask = view.labeled_target_mask
        if not np.any(mask):
            raise ValidationError("target split has no held-out labels to evaluate against")
        x, labels = view.target_x[mask], view.target_y[mask]
    else:
        raise ValidationError(f"unknown split '{split}', expected 'source' or 'target'")

    p = predict(net, x)
    preds = predict_category(p)
    open_set = split == "target" and view.scenario == Scenario.OPEN
    K_eval = view.unknown_label if open_set else max(net.K, int(labels.max()))
    # 混淆矩阵总含未知类那一行一列
    confusion_size = max(K_eval, view.K_source + 1)
    per_class = per_class_accuracy(preds, labels, K_eval)

    report = EvalReport(
        split=split,
        labels=list(range(1, K_eval + 1)),
        per_class_acc=[None if np.isnan(value) else float(value) for value in per_class],
        overall=accuracy(preds, labels),
        mean_per_class=mean_per_class(per_class),
        confusion=confusion(preds, labels, confusion_size).tolist(),
        n_instances=int(len(labels)),
        avg_true_prob=avg_true_class_prob(p, labels),
    )
    if open_set:
        scores = open_set_metrics(preds, labels, K_eval)
        report.os, report.os_star, report.unk_recall = scores.os, scores.os_star, scores.unk_recall
        report.unknown_present = scores.unknown_present
    return report


class TargetMonitor:
    """训练过程中按epoch评估目标域，持有评估通道"""

    def __init__(self, view: EvaluationView):
        self._view = view
        self.open_set = view.scenario == Scenario.OPEN

    def metric_names(self) -> tuple:
        names = ("acc_target", "avg_true_prob")
        return names + ("os", "os_star", "unk_recall") if self.open_set else names

    def __call__(self, net: DadaNetwork) -> Dict[str, float]:
        mask = self._view.labeled_target_mask
        if not np.any(mask):
            return {name: float("nan") for name in self.metric_names()}
        report = evaluate_network(net, self._view, split="target")
        values = {"acc_target": report.overall, "avg_true_prob": report.avg_true_prob}
        if self.open_set:
            values.update({"os": report.os, "os_star": report.os_star, "unk_recall": report.unk_recall})
        return values


def category_weight_split(c: np.ndarray, view: EvaluationView) -> Optional[Dict[str, float]]:
    """部分集：共享类别与离群类别上的平均权重"""
    if view.scenario != Scenario.PARTIAL:
        return None
    shared = sorted({int(y) for y in view.target_y[view.labeled_target_mask]})
    outlier = [k for k in range(1, len(c) + 1) if k not in shared]
    return {
        "shared": float(np.mean(c[np.array(shared) - 1])) if shared else float("nan"),
        "outlier": float(np.mean(c[np.array(outlier) - 1])) if outlier else float("nan"),
    }
