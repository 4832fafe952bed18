from typing import Dict, Type, Union

from ...core.errors import ValidationError
from ...core.logging import logger
from ...schemas.config import Objective
from ..losses import LossBundle
from .base import ObjectiveInputs, TrainingObjective

# 训练目标注册表
_objectives: Dict[str, Type[TrainingObjective]] = {}


def register_objective(objective_class: Type[TrainingObjective]) -> Type[TrainingObjective]:
    """
    注册训练目标

    Args:
        objective_class: 目标类

    Returns:
        Type[TrainingObjective]: 目标类
    """
    objective_instance = objective_class()
    _objectives[objective_instance.name] = objective_class
    return objective_class


def get_objective(name: Union[str, Objective]) -> TrainingObjective:
    """
    获取训练目标实例

    Raises:
        ValidationError: 目标不存在
    """
    key = name.value if isinstance(name, Objective) else str(name)
    objective_class = _objectives.get(key)

    if objective_class is None:
        available_objectives = ", ".join(sorted(_objectives.keys()))
        logger.error(f"Objective '{key}' not found. Available objectives: {available_objectives}")
        raise ValidationError(f"Objective '{key}' not found. Available objectives: {available_objectives}")

    return objective_class()


def get_all_objectives() -> Dict[str, TrainingObjective]:
    return {name: objective_class() for name, objective_class in _objectives.items()}


def assemble(objective: Union[str, Objective], inputs: ObjectiveInputs) -> LossBundle:
    """按目标名称组装损失"""
    return get_objective(objective).assemble(inputs)


# 导入所有目标模块以触发注册
from . import discriminative  # noqa: E402,F401  判别对抗目标及其变体
from . import baselines  # noqa: E402,F401  基线
