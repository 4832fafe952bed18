import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.errors import ArtifactError, ValidationError
from .config import TrainConfig


class DatasetKind(str, Enum):
    """合成数据集类型"""
    TWO_MOONS = "two_moons"
    GRID = "grid"
    OPEN_GRID = "open_grid"


class DatasetSpec(BaseModel):
    """合成数据集参数，也作为 gen 命令写出的参数文件"""

    model_config = ConfigDict(extra="forbid")

    kind: DatasetKind = Field(default=DatasetKind.TWO_MOONS, description="数据集类型")
    seed: int = Field(default=0, ge=0, description="随机种子")
    # two_moons
    n_per_domain: int = Field(default=500, ge=2, description="每个领域的实例数")
    rotation_deg: float = Field(default=30.0, ge=0, lt=360, description="目标域旋转角度")
    noise_sd: float = Field(default=0.1, ge=0, description="噪声标准差")
    # grid / open_grid
    K: int = Field(default=4, ge=2, description="类别数")
    n_per_class: int = Field(default=100, ge=1, description="每类实例数")
    shift: List[float] = Field(default_factory=lambda: [0.0, 0.0], description="目标域平移向量")
    spread: float = Field(default=0.3, gt=0, description="簇标准差")
    grid_step: float = Field(default=3.0, gt=0, description="网格间距")
    K_known: int = Field(default=3, ge=1, description="开放集已知类别数")
    known_to_unknown: float = Field(default=1.0, gt=0, description="目标域已知:未知实例比")
    n_unknown_clusters: int = Field(default=1, ge=1, description="未知簇个数")
    # 标签空间裁剪
    restrict_target: Optional[List[int]] = Field(default=None, description="部分集：保留的目标域类别")
    restrict_source: Optional[List[int]] = Field(default=None, description="开放集：保留的源域类别")
    target_classes: Optional[int] = Field(default=None, ge=1, description="部分集：保留前若干个目标域类别")
    source_classes: Optional[int] = Field(default=None, ge=1, description="开放集：保留前若干个源域类别")

    @field_validator("shift")
    @classmethod
    def check_shift(cls, value: List[float]) -> List[float]:
        if len(value) != 2:
            raise ValueError("shift must have exactly two components")
        return value

    def target_selection(self) -> Optional[List[int]]:
        if self.restrict_target is not None:
            return self.restrict_target
        if self.target_classes is not None:
            return list(range(1, self.target_classes + 1))
        return None

    def source_selection(self) -> Optional[List[int]]:
        if self.restrict_source is not None:
            return self.restrict_source
        if self.source_classes is not None:
            return list(range(1, self.source_classes + 1))
        return None


class KnobTarget(str, Enum):
    CONFIG = "config"
    DATASET = "dataset"


class SweepKnob(BaseModel):
    """被扫描的参数"""
    target: KnobTarget = Field(default=KnobTarget.CONFIG, description="参数所属：训练配置或数据集")
    name: str = Field(..., description="参数名")
    values: List[Any] = Field(..., min_length=1, description="取值列表")


class SweepSpec(BaseModel):
    """扫描任务描述（JSON）"""

    model_config = ConfigDict(extra="forbid")

    config: Dict[str, Any] = Field(default_factory=dict, description="基础训练配置")
    dataset: DatasetSpec = Field(default_factory=DatasetSpec, description="数据集参数")
    knob: SweepKnob = Field(..., description="扫描参数")
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], description="共享的随机种子")
    metrics: List[str] = Field(default_factory=lambda: ["acc_target"], description="汇总的指标")
    n_jobs: Optional[int] = Field(default=None, description="并行进程数，为空时使用 SWEEP_N_JOBS")

    def base_config(self) -> TrainConfig:
        return TrainConfig.parse(self.config)

    def check_knob(self) -> None:
        """校验扫描参数名存在"""
        fields = TrainConfig.model_fields if self.knob.target == KnobTarget.CONFIG else DatasetSpec.model_fields
        if self.knob.name not in fields:
            raise ValidationError(
                f"unknown {self.knob.target.value} field '{self.knob.name}' for sweep",
                details={"available": sorted(fields)},
            )

    @classmethod
    def read(cls, path: Union[str, Path]) -> "SweepSpec":
        source = Path(path)
        if not source.is_file():
            raise ArtifactError(f"sweep spec not found: {source}")
        try:
            data = json.loads(source.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"sweep spec {source} is not valid JSON: {exc}") from None
        try:
            return cls.model_validate(data)
        except pydantic.ValidationError as exc:
            raise ValidationError(f"invalid sweep spec {source}: {exc.error_count()} problem(s)", details=str(exc)) from None
