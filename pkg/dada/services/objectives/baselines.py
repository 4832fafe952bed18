from typing import Tuple

from .. import losses
from ..losses import LossBundle
from . import register_objective
from .base import ObjectiveInputs, TrainingObjective


@register_objective
class DannCaObjective(TrainingObjective):
    """一体化分类器的分类感知对抗基线"""

    self_supervised = True

    @property
    def name(self) -> str:
        return "dann_ca"

    @property
    def component_names(self) -> Tuple[str, ...]:
        return ("L_s_F", "L_s_G", "L_t_F", "L_t_G")

    def assemble(self, inputs: ObjectiveInputs) -> LossBundle:
        self.check_inputs(inputs)
        return losses.loss_dann_ca(inputs.p_s, inputs.y_s, inputs.p_t, inputs.lam)


@register_objective
class SourceOnlyObjective(TrainingObjective):
    """无适配：只在源域上做K路交叉熵"""

    adversarial = False
    self_supervised = True

    @property
    def name(self) -> str:
        return "source_only"

    @property
    def component_names(self) -> Tuple[str, ...]:
        return ("L_ce",)

    def assemble(self, inputs: ObjectiveInputs) -> LossBundle:
        self.check_inputs(inputs)
        L_ce = losses.supervision_loss(inputs.p_s, inputs.y_s, inputs.supervision)
        return LossBundle(L_F=L_ce, L_G=None, components={"L_ce": L_ce})
