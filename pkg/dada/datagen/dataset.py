from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from ..core.errors import DataError


class Scenario(str, Enum):
    """标签空间场景枚举"""
    CLOSED = "closed"
    PARTIAL = "partial"
    OPEN = "open"


class Domain(str, Enum):
    """实例所属领域"""
    SOURCE = "s"
    TARGET = "t"


# 目标域标签缺失时的占位值（真实标签从1开始）
MISSING_LABEL = 0


@dataclass(frozen=True)
class LabeledInstance:
    """单个实例：特征向量、可选类别标签与领域标记"""
    x: np.ndarray
    y: Optional[int]
    domain: Domain


@dataclass(frozen=True)
class TrainingView:
    """训练阶段可见的数据：目标域只有特征，没有标签"""
    source_x: np.ndarray
    source_y: np.ndarray
    target_x: np.ndarray
    K_source: int
    scenario: Scenario


@dataclass(frozen=True)
class EvaluationView:
    """评估通道：目标域的保留标签只从这里流出"""
    source_x: np.ndarray
    source_y: np.ndarray
    target_x: np.ndarray
    target_y: np.ndarray
    K_source: int
    scenario: Scenario
    unknown_label: Optional[int]

    @property
    def labeled_target_mask(self) -> np.ndarray:
        return self.target_y != MISSING_LABEL


@dataclass(frozen=True, eq=False)
class DatasetPair:
    """
    源域/目标域数据对

    标签使用 1..K 编号；目标域未标注的行记为 MISSING_LABEL。
    开放集场景下目标域未知类统一标为 unknown_label = K_source + 1。
    """
    source_x: np.ndarray
    source_y: np.ndarray
    target_x: np.ndarray
    target_y: np.ndarray
    K_source: int
    K_target: int
    scenario: Scenario
    unknown_label: Optional[int] = None

    @property
    def n_features(self) -> int:
        return int(self.source_x.shape[1])

    @property
    def source(self) -> List[LabeledInstance]:
        return [LabeledInstance(x, int(y), Domain.SOURCE) for x, y in zip(self.source_x, self.source_y)]

    @property
    def target(self) -> List[LabeledInstance]:
        return [
            LabeledInstance(x, int(y) if y != MISSING_LABEL else None, Domain.TARGET)
            for x, y in zip(self.target_x, self.target_y)
        ]

    def source_label_set(self) -> set:
        return {int(y) for y in np.unique(self.source_y)}

    def target_label_set(self) -> set:
        return {int(y) for y in np.unique(self.target_y) if y != MISSING_LABEL}

    def training_view(self) -> TrainingView:
        """训练器使用的视图，不含目标域标签"""
        return TrainingView(self.source_x, self.source_y, self.target_x, self.K_source, self.scenario)

    def evaluation_view(self) -> EvaluationView:
        """评估器使用的视图"""
        return EvaluationView(
            self.source_x, self.source_y, self.target_x, self.target_y,
            self.K_source, self.scenario, self.unknown_label,
        )

    def validate(self) -> "DatasetPair":
        """
        校验场景不变量

        Returns:
            DatasetPair: 自身，便于链式调用

        Raises:
            DataError: 任一不变量不成立
        """
        if self.source_x.ndim != 2 or self.target_x.ndim != 2:
            raise DataError("feature arrays must be two-dimensional")
        if self.source_x.shape[1] != self.target_x.shape[1]:
            raise DataError(
                f"source has {self.source_x.shape[1]} features but target has {self.target_x.shape[1]}"
            )
        if len(self.source_x) == 0 or len(self.target_x) == 0:
            raise DataError("no instances")
        if len(self.source_y) != len(self.source_x) or len(self.target_y) != len(self.target_x):
            raise DataError("label and feature counts differ")
        if not (np.all(np.isfinite(self.source_x)) and np.all(np.isfinite(self.target_x))):
            raise DataError("features must be finite")
        if np.any(self.source_y == MISSING_LABEL):
            raise DataError("every source instance must carry a label")
        if np.any(self.source_y < 1) or np.any(self.source_y > self.K_source):
            raise DataError(f"source labels must lie in 1..{self.K_source}")

        source_labels = self.source_label_set()
        target_labels = self.target_label_set()
        if self.scenario == Scenario.CLOSED:
            if self.K_target != self.K_source or not target_labels <= set(range(1, self.K_source + 1)):
                raise DataError("closed scenario requires identical source and target label spaces")
            # 目标域全部带标签时，两个标签集合必须相等
            if not np.any(self.target_y == MISSING_LABEL) and target_labels != source_labels:
                raise DataError(
                    f"closed scenario target labels {sorted(target_labels)} differ from source labels {sorted(source_labels)}"
                )
        elif self.scenario == Scenario.PARTIAL:
            if not target_labels < source_labels or self.K_target >= self.K_source:
                raise DataError("partial scenario requires the target label set to be a strict subset of the source one")
        elif self.scenario == Scenario.OPEN:
            if self.unknown_label != self.K_source + 1 or self.K_target != self.K_source + 1:
                raise DataError(f"open scenario requires unknown label {self.K_source + 1}")
            if not target_labels <= set(range(1, self.K_source + 2)):
                raise DataError("open scenario target labels must be known labels or the unknown label")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DatasetPair):
            return NotImplemented
        return (
            self.K_source == other.K_source
            and self.K_target == other.K_target
            and self.scenario == other.scenario
            and self.unknown_label == other.unknown_label
            and np.array_equal(self.source_x, other.source_x)
            and np.array_equal(self.source_y, other.source_y)
            and np.array_equal(self.target_x, other.target_x)
            and np.array_equal(self.target_y, other.target_y)
        )

    __hash__ = None
