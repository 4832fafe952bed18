from typing import Dict, List, Optional, Sequence

import numpy as np

from ..autodiff import Tensor
from ..core.errors import ValidationError


class SGD:
    """
    带动量与权重衰减的随机梯度下降

    更新规则：d = g + wd·θ；v = μ·v + d；θ = θ - lr·v。
    梯度上升通过传入取反后的梯度实现，动量缓冲按参数各自保存。
    """

    def __init__(self, params: Sequence[Tensor], momentum: float = 0.9, weight_decay: float = 5e-4):
        if not 0.0 <= momentum < 1.0:
            raise ValidationError(f"momentum must lie in [0, 1), got {momentum}")
        if weight_decay < 0:
            raise ValidationError(f"weight_decay must be non-negative, got {weight_decay}")
        self.params: List[Tensor] = list(params)
        self.momentum = momentum
        self.weight_decay = weight_decay
        self._velocity: Dict[int, np.ndarray] = {}

    def step(self, params: Sequence[Tensor], grads: Sequence[Optional[np.ndarray]], lr: float) -> None:
        """
        对一组参数做一次下降更新

        Args:
            params: 参数（必须属于本优化器）
            grads: 下降方向对应的梯度，None 视为0
            lr: 学习率
        """
        owned = {id(param) for param in self.params}
        for param, grad in zip(params, grads):
            if id(param) not in owned:
                raise ValidationError(f"parameter {param.name or param!r} is not managed by this optimizer")
            direction = np.zeros_like(param.data) if grad is None else grad
            if self.weight_decay:
                direction = direction + self.weight_decay * param.data
            velocity = self._velocity.get(id(param))
            velocity = direction if velocity is None else self.momentum * velocity + direction
            self._velocity[id(param)] = velocity
            param.data = param.data - lr * velocity

    def state_dict(self) -> Dict[str, np.ndarray]:
        """按参数名导出动量缓冲"""
        return {
            param.name or str(index): self._velocity[id(param)].copy()
            for index, param in enumerate(self.params)
            if id(param) in self._velocity
        }
