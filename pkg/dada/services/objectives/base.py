from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ...autodiff import Tensor
from ...core.errors import ValidationError
from ...datagen import Scenario
from ...models.network import ProbOutput
from ...schemas.config import LambdaPlacement, SupervisionSignal
from ..losses import CategoryWeights, LossBundle


@dataclass
class ObjectiveInputs:
    """组装目标所需的输入"""
    p_s: ProbOutput
    y_s: np.ndarray
    p_t: Optional[ProbOutput]
    lam: float
    placement: LambdaPlacement = LambdaPlacement.JOINT
    weights: Optional[CategoryWeights] = None
    q: float = 0.1
    supervision: SupervisionSignal = SupervisionSignal.FULL


class TrainingObjective(ABC):
    """训练目标基类"""

    # 该目标要求的数据场景，为空表示不限
    required_scenario: Optional[Scenario] = None
    # False 时 G 与 F 一同最小化 L_F
    adversarial: bool = True
    # 目标自带源域监督项时，训练器不再叠加源域监督交叉熵
    self_supervised: bool = False
    uses_category_weights: bool = False

    @property
    @abstractmethod
    def name(self) -> str:
        """目标名称"""
        pass

    @property
    @abstractmethod
    def component_names(self) -> Tuple[str, ...]:
        """组装时产生的损失分量"""
        pass

    @abstractmethod
    def assemble(self, inputs: ObjectiveInputs) -> LossBundle:
        """
        组装 L_F / L_G

        Args:
            inputs: 源域与目标域的概率输出及系数

        Returns:
            LossBundle: 损失及其分量
        """
        pass

    @property
    def logged_components(self) -> Tuple[str, ...]:
        """写入指标日志的分量（含 L_F、L_G）"""
        return self.component_names + (("L_F", "L_G") if self.adversarial else ("L_F",))

    def output_categories(self, K_source: int, scenario: Scenario) -> int:
        """网络的类别输出个数 K"""
        return K_source

    def check_scenario(self, scenario: Scenario) -> None:
        if self.required_scenario is not None and scenario != self.required_scenario:
            raise ValidationError(
                f"objective {self.name} requires {self.required_scenario.value} data, got {scenario.value}",
                details={"objective": self.name, "scenario": scenario.value},
            )

    def check_inputs(self, inputs: ObjectiveInputs) -> None:
        if len(inputs.p_s) == 0:
            raise ValidationError(f"objective {self.name}: empty source batch")
        if inputs.p_t is not None and inputs.p_t.K != inputs.p_s.K:
            raise ValidationError(
                f"objective {self.name}: source and target outputs disagree on K ({inputs.p_s.K} vs {inputs.p_t.K})"
            )

    @staticmethod
    def combine(inputs: ObjectiveInputs, source: Tensor, target: Optional[Tensor]) -> Tensor:
        """按 λ 的作用位置组合源域项与目标域项"""
        if inputs.placement == LambdaPlacement.JOINT:
            return inputs.lam * (source if target is None else source + target)
        return source if target is None else source + inputs.lam * target
