"""
DADA 及其变体

L_F = combine(L_s, L_t_F) + em_sign_F·L_em，L_G = combine(L_s, L_t_G) - L_em，
其中 combine 按 λ 作用位置组合；目标域批为空时只保留源域项。
"""

from typing import Tuple

from ...autodiff import Tensor
from ...core.errors import ValidationError
from ...datagen import Scenario
from .. import losses
from ..losses import LossBundle
from . import register_objective
from .base import ObjectiveInputs, TrainingObjective


@register_objective
class DadaObjective(TrainingObjective):
    """判别对抗目标"""

    use_entropy: bool = True
    em_sign_F: float = -1.0

    @property
    def name(self) -> str:
        return "dada"

    @property
    def component_names(self) -> Tuple[str, ...]:
        names = ("L_s", "L_t_F", "L_t_G")
        return names + ("L_em",) if self.use_entropy else names

    def source_loss(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_source_dada(inputs.p_s, inputs.y_s)

    def target_loss_F(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_target_F_dada(inputs.p_t)

    def target_loss_G(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_target_G_dada(inputs.p_t)

    def assemble(self, inputs: ObjectiveInputs) -> LossBundle:
        self.check_inputs(inputs)
        L_s = self.source_loss(inputs)
        if inputs.p_t is None:
            source_only = self.combine(inputs, L_s, None)
            return LossBundle(L_F=source_only, L_G=source_only, components={"L_s": L_s})

        L_t_F = self.target_loss_F(inputs)
        L_t_G = self.target_loss_G(inputs)
        components = {"L_s": L_s, "L_t_F": L_t_F, "L_t_G": L_t_G}
        L_F = self.combine(inputs, L_s, L_t_F)
        L_G = self.combine(inputs, L_s, L_t_G)
        if self.use_entropy:
            L_em = losses.loss_entropy(inputs.p_t)
            components["L_em"] = L_em
            L_F = L_F + self.em_sign_F * L_em
            L_G = L_G - L_em
        return LossBundle(L_F=L_F, L_G=L_G, components=components)


@register_objective
class DadaPartialObjective(DadaObjective):
    """部分集：源域项按类别权重缩放，F 上最小化熵"""

    required_scenario = Scenario.PARTIAL
    uses_category_weights = True
    em_sign_F = 1.0

    @property
    def name(self) -> str:
        return "dada_p"

    def source_loss(self, inputs: ObjectiveInputs) -> Tensor:
        if inputs.weights is None:
            raise ValidationError("objective dada_p needs category weights")
        return losses.loss_source_dada_p(inputs.p_s, inputs.y_s, inputs.weights)


@register_objective
class DadaOpenObjective(DadaObjective):
    """开放集：F 侧目标域项换成以概率 q 泄漏到未知类的损失"""

    required_scenario = Scenario.OPEN

    @property
    def name(self) -> str:
        return "dada_o"

    def output_categories(self, K_source: int, scenario: Scenario) -> int:
        # 未知类占用第 K 个类别输出
        return K_source + 1

    def target_loss_F(self, inputs: ObjectiveInputs) -> Tensor:
        if inputs.q == 0:
            return losses.loss_target_dann_F(inputs.p_t)
        return losses.loss_target_F_openset(inputs.p_t, inputs.q)


@register_objective
class DadaSymmetricObjective(DadaObjective):
    """G 侧目标域项换成对称领域混淆损失"""

    @property
    def name(self) -> str:
        return "dada_dc"

    def target_loss_G(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_symmetric_dc(inputs.p_t)


@register_objective
class DadaNoEntropyObjective(DadaObjective):
    use_entropy = False

    @property
    def name(self) -> str:
        return "no_em"


@register_objective
class DadaNoTargetDiscriminationObjective(DadaObjective):
    """去掉熵项与目标域判别项：源域判别损失加普通的目标域对抗项"""

    use_entropy = False

    @property
    def name(self) -> str:
        return "no_em_no_td"

    def target_loss_F(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_target_dann_F(inputs.p_t)

    def target_loss_G(self, inputs: ObjectiveInputs) -> Tensor:
        return losses.loss_target_dann_G(inputs.p_t)
