from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pydantic
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.config import settings
from ..core.errors import ArtifactError, ValidationError


class Objective(str, Enum):
    """训练目标枚举"""
    DADA = "dada"
    DADA_P = "dada_p"
    DADA_O = "dada_o"
    DANN_CA = "dann_ca"
    DADA_DC = "dada_dc"
    SOURCE_ONLY = "source_only"
    NO_EM = "no_em"
    NO_EM_NO_TD = "no_em_no_td"


class LambdaPlacement(str, Enum):
    """λ 的作用位置：joint 为 λ(L_s + L_t)，target 为 L_s + λ·L_t"""
    JOINT = "joint"
    TARGET = "target"


class LambdaMode(str, Enum):
    """λ 取值方式：按进度爬升或固定值"""
    SCHEDULE = "schedule"
    FIXED = "fixed"


class SupervisionSignal(str, Enum):
    """源域监督信号：full 为整个 K+1 路 softmax 上的 -log p_y，bar 为条件概率上的 -log p̄_y"""
    FULL = "full"
    BAR = "bar"


class ProgressScope(str, Enum):
    """训练进度 p 的统计范围"""
    ADVERSARIAL = "adversarial"
    ALL = "all"


class TrainConfig(BaseModel):
    """训练超参数"""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    objective: Objective = Field(default=Objective.DADA, description="训练目标")
    eta0: float = Field(default=1e-4, gt=0, description="初始学习率")
    alpha: float = Field(default=10.0, ge=0, description="学习率衰减系数 α")
    beta: float = Field(default=0.75, ge=0, description="学习率衰减指数 β")
    gamma: float = Field(default=10.0, gt=0, description="λ 爬升速度 γ")
    q: float = Field(default=0.1, ge=0, lt=0.5, description="开放集泄漏概率；0 表示极限形式")
    batch_size: int = Field(default=64, ge=1, description="批大小")
    momentum: float = Field(default=0.9, ge=0, lt=1, description="SGD动量")
    weight_decay: float = Field(default=5e-4, ge=0, description="权重衰减")
    T_cls: int = Field(default=10, ge=1, description="每轮交替中的分类训练epoch数")
    T_adv: int = Field(default=20, ge=1, description="每轮交替中的对抗训练epoch数")
    N_alter: int = Field(default=1, ge=1, description="交替轮数")
    pretrain_epochs: int = Field(default=10, ge=0, description="源域预训练epoch数")
    seed: int = Field(default=0, ge=0, description="随机种子")
    lambda_placement: LambdaPlacement = Field(default=LambdaPlacement.JOINT, description="λ 作用位置")
    condition_threshold: float = Field(default=0.5, gt=0, lt=1, description="条件失败判定阈值")

    hidden_dims: List[int] = Field(default_factory=lambda: list(settings.HIDDEN_DIMS), description="隐藏层宽度")
    pretrain_lr: Optional[float] = Field(default=None, gt=0, description="预训练学习率，为空时使用 eta0")
    lambda_mode: LambdaMode = Field(default=LambdaMode.SCHEDULE, description="λ 取值方式")
    lambda_fixed: float = Field(default=1.0, ge=0, description="固定模式下的 λ")
    category_lambda: Optional[float] = Field(default=None, ge=0, le=1, description="类别权重组合系数，为空时与 λ 共用爬升值")
    keep_supervision: bool = Field(default=True, description="对抗训练时保留源域监督交叉熵")
    supervision: SupervisionSignal = Field(default=SupervisionSignal.FULL, description="预训练、分类训练与对抗监督使用的交叉熵")
    supervise_features: bool = Field(default=True, description="监督交叉熵是否也作用于特征提取器")
    adv_use_target: bool = Field(default=True, description="对抗训练是否使用目标域数据")
    alternation: bool = Field(default=False, description="是否在每轮对抗训练前插入分类训练")
    progress_scope: ProgressScope = Field(default=ProgressScope.ADVERSARIAL, description="进度统计范围")
    eval_every: int = Field(default=1, ge=1, description="每隔多少个epoch评估一次")

    @field_validator("hidden_dims", mode="before")
    @classmethod
    def parse_hidden_dims(cls, value: Any) -> Any:
        """支持逗号分隔的字符串"""
        if isinstance(value, str):
            return [int(width.strip()) for width in value.split(",") if width.strip()]
        return value

    @field_validator("hidden_dims")
    @classmethod
    def check_hidden_dims(cls, value: List[int]) -> List[int]:
        if not value or any(width < 1 for width in value):
            raise ValueError("hidden_dims must be a non-empty list of positive integers")
        return value

    @field_validator("pretrain_lr", "category_lambda", mode="before")
    @classmethod
    def empty_as_none(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in {"", "none"}:
            return None
        return value

    @model_validator(mode="after")
    def check_fixed_lambda(self) -> "TrainConfig":
        if self.lambda_mode == LambdaMode.FIXED and self.objective == Objective.DADA_P and self.lambda_fixed > 1:
            raise ValueError("lambda_fixed must lie in [0, 1] for dada_p, where it also weights the category vector")
        return self

    @property
    def effective_pretrain_lr(self) -> float:
        return self.pretrain_lr if self.pretrain_lr is not None else self.eta0

    def total_adversarial_epochs(self) -> int:
        return self.N_alter * self.T_adv

    def total_classification_epochs(self) -> int:
        return self.N_alter * self.T_cls if self.alternation else 0

    def total_epochs(self) -> int:
        return self.pretrain_epochs + self.total_classification_epochs() + self.total_adversarial_epochs()

    def snapshot(self) -> Dict[str, Any]:
        """可JSON序列化的配置快照"""
        return self.model_dump(mode="json")

    def to_text(self) -> str:
        """写回 `key = value` 配置文本"""
        lines = []
        for key, value in self.snapshot().items():
            if value is None:
                text = ""
            elif isinstance(value, list):
                text = ",".join(str(item) for item in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, values: Dict[str, Any]) -> "TrainConfig":
        """
        校验配置字典

        Raises:
            ValidationError: 键未知或取值非法
        """
        try:
            return cls.model_validate(values)
        except pydantic.ValidationError as exc:
            problems = [
                f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}"
                for error in exc.errors()
            ]
            raise ValidationError("invalid training config: " + "; ".join(problems), details=problems) from None

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TrainConfig":
        """
        读取 `key = value` 形式的配置文件（python-dotenv 语法，支持 # 注释）

        Raises:
            ArtifactError: 文件不存在
            ValidationError: 配置非法
        """
        source = Path(path)
        if not source.is_file():
            raise ArtifactError(f"config file not found: {source}")
        values = {key: value for key, value in dotenv_values(source).items() if value is not None}
        return cls.parse(values)
