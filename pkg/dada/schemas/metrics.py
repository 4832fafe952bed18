import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from ..core.errors import DataError

# 指标名称的封闭词表；损失分量统一以 loss_ 为前缀
METRIC_NAMES = (
    "acc_source",
    "acc_target",
    "cond_fail_rate",
    "avg_true_prob",
    "os",
    "os_star",
    "unk_recall",
)
LOSS_PREFIX = "loss_"
OPEN_SET_METRICS = ("os", "os_star", "unk_recall")


def is_known_metric(name: str) -> bool:
    return name in METRIC_NAMES or (name.startswith(LOSS_PREFIX) and len(name) > len(LOSS_PREFIX))


def component_metric_name(component: str) -> str:
    """损失分量名（如 L_t_F）对应的指标名（loss_t_F）"""
    stem = component[2:] if component.startswith("L_") else component
    return f"{LOSS_PREFIX}{stem}"


class Phase(str, Enum):
    """训练阶段"""
    PRETRAIN = "pretrain"
    CLS = "cls"
    ADV = "adv"
    EVAL = "eval"


class MetricsRecord(BaseModel):
    """一条指标记录"""
    step: int = Field(..., ge=0, description="全局迭代步数")
    epoch: int = Field(..., ge=0, description="全局epoch编号")
    phase: Phase = Field(..., description="训练阶段")
    name: str = Field(..., description="指标名称")
    value: float = Field(..., description="指标值")

    @field_validator("name")
    @classmethod
    def check_name(cls, value: str) -> str:
        if not is_known_metric(value):
            raise ValueError(f"unknown metric name '{value}'. Valid names are: {', '.join(METRIC_NAMES)} or loss_*")
        return value

    def to_line(self) -> str:
        """`step,epoch,phase,name,value`，浮点数以 repr 形式保留全部精度"""
        return f"{self.step},{self.epoch},{self.phase.value},{self.name},{self.value!r}"

    @classmethod
    def from_line(cls, line: str, line_number: Optional[int] = None) -> "MetricsRecord":
        parts = line.strip().split(",")
        if len(parts) != 5:
            raise DataError(f"metrics record needs 5 fields, got {len(parts)}", line=line_number)
        step, epoch, phase, name, value = parts
        try:
            return cls(step=int(step), epoch=int(epoch), phase=Phase(phase), name=name, value=float(value))
        except ValueError as exc:
            raise DataError(f"malformed metrics record: {exc}", line=line_number) from None


def format_metrics_log(records: List[MetricsRecord]) -> str:
    return "".join(record.to_line() + "\n" for record in records)


def parse_metrics_log(text: str) -> List[MetricsRecord]:
    return [
        MetricsRecord.from_line(line, line_number)
        for line_number, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]


class EvalReport(BaseModel):
    """评估报告"""
    split: str = Field(default="target", description="被评估的数据划分")
    labels: List[int] = Field(..., description="per_class_acc 各项对应的类别编号")
    per_class_acc: List[Optional[float]] = Field(..., description="各类别准确率；无实例的类别为空")
    overall: float = Field(..., description="总体准确率")
    mean_per_class: float = Field(..., description="按类别平均的准确率（不含无实例类别）")
    confusion: List[List[int]] = Field(..., description="(K+1)×(K+1) 混淆矩阵，行为真实类别，列为预测类别，末行末列为未知类")
    n_instances: int = Field(..., description="实例数")
    avg_true_prob: Optional[float] = Field(default=None, description="真实类别上的平均条件概率")
    os: Optional[float] = Field(default=None, description="OS：含未知类的按类平均准确率")
    os_star: Optional[float] = Field(default=None, description="OS*：已知类的按类平均准确率")
    unk_recall: Optional[float] = Field(default=None, description="未知类召回率")
    unknown_present: Optional[bool] = Field(default=None, description="目标数据中是否存在未知类实例")

    def metric_values(self) -> dict:
        """报告中可写入指标日志的数值项"""
        values = {"acc_target": self.overall}
        for name in ("avg_true_prob", "os", "os_star", "unk_recall"):
            value = getattr(self, name)
            if value is not None and not math.isnan(value):
                values[name] = value
        return values
