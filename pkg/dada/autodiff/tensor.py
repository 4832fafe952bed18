from contextlib import contextmanager
from typing import Any, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import BackwardError, ShapeError

# 是否记录计算图（评估阶段关闭）
_grad_enabled: bool = True


@contextmanager
def no_grad() -> Iterator[None]:
    """在上下文内关闭计算图记录"""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """
    参与反向模式自动微分的稠密张量

    数据统一为64位浮点数；grad 与 data 形状一致，仅在反向传播后存在。
    """

    __array_priority__ = 100

    def __init__(self, data: Any, requires_grad: bool = False, _ctx: Optional["Function"] = None, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._ctx = _ctx
        self._backward_done = False

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._ctx is None

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={list(self.shape)}, requires_grad={self.requires_grad}{label})"

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item", self.shape, ())
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """
        从标量根节点反向传播

        Raises:
            BackwardError: 根节点不是标量、与计算图分离，或已经反向传播过
        """
        if self.data.size != 1:
            raise BackwardError(f"backward requires a scalar root, got shape {list(self.shape)}")
        if not self.requires_grad:
            raise BackwardError("backward called on a tensor detached from every gradient leaf")
        if self._backward_done:
            raise BackwardError("backward already called on this graph; rebuild the forward pass before calling it again")

        order = _topological_order(self)
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node._ctx is None:
                if node.requires_grad:
                    node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            parent_grads = node._ctx.backward(grad)
            for parent, parent_grad in zip(node._ctx.parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad
        self._backward_done = True

    # 运算符
    def __add__(self, other):
        from .functions import add
        return add(self, other)

    def __radd__(self, other):
        from .functions import add
        return add(other, self)

    def __sub__(self, other):
        from .functions import add, neg
        return add(self, neg(other))

    def __rsub__(self, other):
        from .functions import add, neg
        return add(other, neg(self))

    def __mul__(self, other):
        from .functions import elementwise_mul
        return elementwise_mul(self, other)

    def __rmul__(self, other):
        from .functions import elementwise_mul
        return elementwise_mul(other, self)

    def __truediv__(self, other):
        from .functions import divide
        return divide(self, other)

    def __rtruediv__(self, other):
        from .functions import divide
        return divide(other, self)

    def __neg__(self):
        from .functions import neg
        return neg(self)

    def __matmul__(self, other):
        from .functions import matmul
        return matmul(self, other)

    def __getitem__(self, index):
        from .functions import take
        return take(self, index)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        from .functions import sum as _sum
        return _sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        from .functions import mean
        return mean(self, axis=axis, keepdims=keepdims)

    def log(self) -> "Tensor":
        from .functions import log
        return log(self)

    def exp(self) -> "Tensor":
        from .functions import exp
        return exp(self)

    def relu(self) -> "Tensor":
        from .functions import relu
        return relu(self)

    def clamp(self, low: float, high: float) -> "Tensor":
        from .functions import clamp
        return clamp(self, low, high)


class Function:
    """可微运算基类：forward 计算数值，backward 返回各输入的梯度"""

    def __init__(self, parents: Sequence[Tensor], **kwargs: Any):
        self.parents: List[Tensor] = list(parents)
        self.kwargs = kwargs
        self.saved: Tuple[Any, ...] = ()

    @classmethod
    def apply(cls, *args: Any, **kwargs: Any) -> Tensor:
        parents = [arg if isinstance(arg, Tensor) else Tensor(arg) for arg in args]
        ctx = cls(parents, **kwargs)
        output = ctx.forward(*[parent.data for parent in parents])
        requires_grad = _grad_enabled and any(parent.requires_grad for parent in parents)
        return Tensor(output, requires_grad=requires_grad, _ctx=ctx if requires_grad else None)

    def save_for_backward(self, *values: Any) -> None:
        self.saved = values

    def forward(self, *arrays: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_output: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        raise NotImplementedError


def _topological_order(root: Tensor) -> List[Tensor]:
    """迭代式拓扑排序，避免深图上的递归"""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node._ctx is not None:
            for parent in node._ctx.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
    return order
